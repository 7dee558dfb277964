//! Finite presentations of C*-algebras by generators, norm bounds and
//! *-polynomial relations, together with their finite-dimensional
//! representations.

mod enumerate;
mod modulus;
mod poly;

pub use enumerate::{
    lipschitz_constant, norm_ceiling, norm_lower_enumerate, DyadicBound, Emission,
    RepresentationCatalog, SeededCatalog,
};
pub use modulus::{combine_moduli, Combination, ModulusRule, StabilityModulusTable};
pub use poly::{GaussianRational, Letter, NCPolynomial, Word};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, Tolerance};
use crate::perturbation::{
    partial_isometry_cut, round_to_projection, round_to_pvm, round_to_unitary,
};
use crate::sampling;

/// Presentations with known shapes. Only the first three carry stability
/// witnesses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PresentationId {
    /// `n` unitaries `g1…gn` (`g` when `n = 1`).
    FreeUnitaries(usize),
    /// `n` projections `p1…pn` (`p` when `n = 1`).
    Projections(usize),
    /// The `k×k` matrix units `e11…ekk`, `k ≤ 9`.
    MatrixUnits(usize),
    /// `n` isometries `s1…sn` with orthogonal ranges summing to the unit.
    Cuntz(usize),
    /// A single isometry `s`.
    Toeplitz,
}

impl PresentationId {
    pub fn is_registered(self) -> bool {
        matches!(
            self,
            PresentationId::FreeUnitaries(_)
                | PresentationId::Projections(_)
                | PresentationId::MatrixUnits(_)
        )
    }
}

impl fmt::Display for PresentationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PresentationId::FreeUnitaries(n) => write!(f, "free_unitaries:{n}"),
            PresentationId::Projections(n) => write!(f, "projections:{n}"),
            PresentationId::MatrixUnits(k) => write!(f, "matrix_units:{k}"),
            PresentationId::Cuntz(n) => write!(f, "cuntz:{n}"),
            PresentationId::Toeplitz => write!(f, "toeplitz"),
        }
    }
}

impl FromStr for PresentationId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "toeplitz" {
            return Ok(PresentationId::Toeplitz);
        }
        let (kind, count) = s
            .split_once(':')
            .ok_or_else(|| Error::input(format!("unknown presentation id '{s}'")))?;
        let count: usize = count
            .parse()
            .map_err(|_| Error::input(format!("bad count in presentation id '{s}'")))?;
        let id = match kind {
            "free_unitaries" => PresentationId::FreeUnitaries(count),
            "projections" => PresentationId::Projections(count),
            "matrix_units" => PresentationId::MatrixUnits(count),
            "cuntz" => PresentationId::Cuntz(count),
            _ => return Err(Error::input(format!("unknown presentation id '{s}'"))),
        };
        let max = if matches!(id, PresentationId::MatrixUnits(_)) {
            9
        } else {
            64
        };
        if count == 0 || count > max {
            return Err(Error::input(format!(
                "count in '{s}' must lie in 1..={max}"
            )));
        }
        Ok(id)
    }
}

/// A generator with its norm bound `‖x‖ ≤ C`, `C` a nonnegative dyadic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    pub name: String,
    pub bound: BigRational,
}

impl Generator {
    pub fn new(name: impl Into<String>, bound: BigRational) -> Result<Self> {
        let name = name.into();
        if bound.is_negative() || !bound.denom().is_one() && !is_power_of_two(bound.denom()) {
            return Err(Error::input(format!(
                "bound of '{name}' must be a nonnegative dyadic rational"
            )));
        }
        Ok(Generator { name, bound })
    }

    pub fn bound_f64(&self) -> f64 {
        self.bound.to_f64().unwrap_or(f64::INFINITY)
    }
}

fn is_power_of_two(n: &BigInt) -> bool {
    n.is_positive() && (n & (n - BigInt::one())).is_zero()
}

/// Parses `"p/2^k"`, `"p/q"` with `q` a power of two, or an integer.
pub fn parse_dyadic(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::input(format!("'{s}' is not a dyadic rational p/2^k"));
    let (num, den) = match s.split_once('/') {
        None => (s, None),
        Some((n, d)) => (n.trim(), Some(d.trim())),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = match den {
        None => BigInt::one(),
        Some(d) => match d.strip_prefix("2^") {
            Some(k) => BigInt::one() << k.parse::<u32>().map_err(|_| bad())?,
            None => d.parse().map_err(|_| bad())?,
        },
    };
    if !is_power_of_two(&den) {
        return Err(bad());
    }
    Ok(BigRational::new(num, den))
}

/// Generators with bounds, relations `pᵢ = 0`, and a distinguished unit.
#[derive(Clone, Debug, PartialEq)]
pub struct Presentation {
    generators: Vec<Generator>,
    relations: Vec<NCPolynomial>,
    unit: String,
    id: Option<PresentationId>,
}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    name != "i"
        && chars.next().is_some_and(|c| c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_')
}

impl Presentation {
    pub fn new(
        generators: Vec<Generator>,
        relations: Vec<NCPolynomial>,
        unit: &str,
    ) -> Result<Self> {
        if !valid_name(unit) {
            return Err(Error::input(format!("'{unit}' is not a valid unit name")));
        }
        let mut names = BTreeSet::new();
        for g in &generators {
            if !valid_name(&g.name) || g.name == unit {
                return Err(Error::input(format!(
                    "'{}' is not a valid generator name",
                    g.name
                )));
            }
            if !names.insert(g.name.as_str()) {
                return Err(Error::input(format!(
                    "generator '{}' declared twice",
                    g.name
                )));
            }
        }
        let relations: Vec<NCPolynomial> =
            relations.iter().map(|r| r.normalize_unit(unit)).collect();
        for r in &relations {
            if let Some(s) = r
                .symbols()
                .into_iter()
                .find(|s| *s != unit && !names.contains(s))
            {
                return Err(Error::input(format!(
                    "relation {r} mentions undeclared '{s}'"
                )));
            }
        }
        Ok(Presentation {
            generators,
            relations,
            unit: unit.to_string(),
            id: None,
        })
    }

    /// The canonical presentation for `id`, with unit `e` and bounds 1.
    pub fn registered(id: PresentationId) -> Self {
        let one = BigRational::one();
        let gen = |name: String| Generator::new(name, one.clone()).expect("bound 1");
        let p = |s: &str| NCPolynomial::parse(s, "e").expect("canonical relation");
        let indexed = |prefix: &str, n: usize| -> Vec<String> {
            if n == 1 {
                vec![prefix.to_string()]
            } else {
                (1..=n).map(|i| format!("{prefix}{i}")).collect()
            }
        };
        let (names, relations): (Vec<String>, Vec<NCPolynomial>) = match id {
            PresentationId::FreeUnitaries(n) => {
                let names = indexed("g", n);
                let rels = names
                    .iter()
                    .flat_map(|g| [p(&format!("{g}* {g} - e")), p(&format!("{g} {g}* - e"))])
                    .collect();
                (names, rels)
            }
            PresentationId::Projections(n) => {
                let names = indexed("p", n);
                let rels = names
                    .iter()
                    .flat_map(|q| [p(&format!("{q}* - {q}")), p(&format!("{q} {q} - {q}"))])
                    .collect();
                (names, rels)
            }
            PresentationId::MatrixUnits(k) => {
                let name = |i: usize, j: usize| format!("e{i}{j}");
                let mut names = Vec::new();
                let mut rels = Vec::new();
                for i in 1..=k {
                    for j in 1..=k {
                        names.push(name(i, j));
                        rels.push(p(&format!("{}* - {}", name(i, j), name(j, i))));
                    }
                }
                for i in 1..=k {
                    for j in 1..=k {
                        for l in 1..=k {
                            for m in 1..=k {
                                let lhs = format!("{} {}", name(i, j), name(l, m));
                                rels.push(if j == l {
                                    p(&format!("{lhs} - {}", name(i, m)))
                                } else {
                                    p(&lhs)
                                });
                            }
                        }
                    }
                }
                let diag: Vec<String> = (1..=k).map(|i| name(i, i)).collect();
                rels.push(p(&format!("{} - e", diag.join(" + "))));
                (names, rels)
            }
            PresentationId::Cuntz(n) => {
                let names = indexed("s", n);
                let mut rels: Vec<NCPolynomial> =
                    names.iter().map(|s| p(&format!("{s}* {s} - e"))).collect();
                let ranges: Vec<String> = names.iter().map(|s| format!("{s} {s}*")).collect();
                rels.push(p(&format!("{} - e", ranges.join(" + "))));
                (names, rels)
            }
            PresentationId::Toeplitz => (vec!["s".into()], vec![p("s* s - e")]),
        };
        let mut pres = Presentation::new(names.into_iter().map(gen).collect(), relations, "e")
            .expect("canonical presentation is valid");
        pres.id = Some(id);
        pres
    }

    /// Tags the presentation with `id` after checking it is exactly the
    /// canonical one (relations compared as sets).
    pub fn with_id(mut self, id: PresentationId) -> Result<Self> {
        let canon = Presentation::registered(id);
        let canon_rel: BTreeSet<String> = canon.relations.iter().map(|r| r.to_string()).collect();
        let mine = self.normalized_to_unit("e");
        let mine_rel: BTreeSet<String> = mine.relations.iter().map(|r| r.to_string()).collect();
        if mine.generators != canon.generators || mine_rel != canon_rel {
            return Err(Error::input(format!(
                "presentation does not match the canonical '{id}' presentation"
            )));
        }
        self.id = Some(id);
        Ok(self)
    }

    fn normalized_to_unit(&self, unit: &str) -> Presentation {
        if self.unit == unit {
            return self.clone();
        }
        let rename = |p: &NCPolynomial| {
            let mut out = NCPolynomial::zero();
            for (w, c) in p.terms() {
                let word = w
                    .iter()
                    .map(|l| {
                        if l.name == self.unit {
                            Letter::new(unit, l.adjoint)
                        } else {
                            l.clone()
                        }
                    })
                    .collect();
                out = &out + &NCPolynomial::term(c.clone(), word);
            }
            out.normalize_unit(unit)
        };
        Presentation {
            generators: self.generators.clone(),
            relations: self.relations.iter().map(rename).collect(),
            unit: unit.to_string(),
            id: self.id,
        }
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn relations(&self) -> &[NCPolynomial] {
        &self.relations
    }

    pub fn unit(&self) -> &str {
        &self.unit
    }

    pub fn id(&self) -> Option<PresentationId> {
        self.id
    }

    pub fn bound(&self, name: &str) -> Option<f64> {
        if name == self.unit {
            return Some(1.0);
        }
        self.generators
            .iter()
            .find(|g| g.name == name)
            .map(Generator::bound_f64)
    }

    /// Largest generator bound.
    pub fn max_bound(&self) -> f64 {
        self.generators
            .iter()
            .map(Generator::bound_f64)
            .fold(1.0, f64::max)
    }

    /// Parses a polynomial over this presentation's symbols.
    pub fn parse_poly(&self, text: &str) -> Result<NCPolynomial> {
        let p = NCPolynomial::parse(text, &self.unit)?;
        for s in p.symbols() {
            if s != self.unit && self.bound(s).is_none() {
                return Err(Error::input(format!("'{s}' is not a generator")));
            }
        }
        Ok(p)
    }
}

/// Default stability modulus of a registered presentation.
///
/// Unitaries: `m = n + 1`; projections: `m = 2n + 4`; `k×k` matrix units:
/// the identity modulus amplified to `M_k`.
pub fn default_modulus(id: PresentationId) -> Result<StabilityModulusTable> {
    let label = id.to_string();
    match id {
        PresentationId::FreeUnitaries(_) => Ok(StabilityModulusTable::new(
            label,
            ModulusRule::Affine {
                slope: 1,
                offset: 1,
            },
        )),
        PresentationId::Projections(_) => Ok(StabilityModulusTable::new(
            label,
            ModulusRule::Affine {
                slope: 2,
                offset: 4,
            },
        )),
        PresentationId::MatrixUnits(k) => {
            let mut t = combine_moduli(
                Combination::MatrixAmplification,
                &StabilityModulusTable::identity(),
                k as u32,
            );
            t.presentation_id = label;
            Ok(t)
        }
        PresentationId::Cuntz(_) | PresentationId::Toeplitz => Err(Error::Unsupported(format!(
            "no stability witness is registered for '{id}'"
        ))),
    }
}

/// Images of the generators in `M_dim`; the unit maps to the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct Representation {
    dim: usize,
    unit: String,
    images: BTreeMap<String, ComplexMatrix>,
}

impl Representation {
    pub fn new(dim: usize, unit: &str, images: BTreeMap<String, ComplexMatrix>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::input("representation dimension must be positive"));
        }
        for (name, m) in &images {
            if m.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: m.dim(),
                });
            }
            if name == unit && *m != ComplexMatrix::identity(dim) {
                return Err(Error::input("the unit must map to the identity"));
            }
        }
        Ok(Representation {
            dim,
            unit: unit.to_string(),
            images,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn image(&self, name: &str) -> Result<ComplexMatrix> {
        if name == self.unit {
            return Ok(ComplexMatrix::identity(self.dim));
        }
        self.images
            .get(name)
            .cloned()
            .ok_or_else(|| Error::input(format!("no image for '{name}'")))
    }

    pub fn images(&self) -> &BTreeMap<String, ComplexMatrix> {
        &self.images
    }

    /// `max_x ‖self(x) − other(x)‖` over the generators of `self`.
    pub fn distance(&self, other: &Representation) -> Result<f64> {
        let mut d = 0.0_f64;
        for (name, m) in &self.images {
            d = d.max((m - &other.image(name)?).norm());
        }
        Ok(d)
    }
}

/// Substitutes the images (adjoint for starred letters) and sums the terms.
pub fn eval_poly(p: &NCPolynomial, rep: &Representation) -> Result<ComplexMatrix> {
    let mut total = ComplexMatrix::zeros(rep.dim());
    for (word, coeff) in p.terms() {
        let mut prod: Option<ComplexMatrix> = None;
        for letter in word {
            let m = rep.image(&letter.name)?;
            let m = if letter.adjoint { m.adjoint() } else { m };
            prod = Some(match prod {
                None => m,
                Some(acc) => &acc * &m,
            });
        }
        let prod = prod.unwrap_or_else(|| ComplexMatrix::identity(rep.dim()));
        total += &prod.scale_complex(coeff.to_c64());
    }
    Ok(total)
}

/// `max( maxᵢ ‖pᵢ(rep)‖, max_k max(0, ‖rep(x_k)‖ − C_k) )`.
pub fn relation_defect(pres: &Presentation, rep: &Representation) -> Result<f64> {
    let mut d = 0.0_f64;
    for r in pres.relations() {
        d = d.max(eval_poly(r, rep)?.norm());
    }
    for g in pres.generators() {
        d = d.max(rep.image(&g.name)?.norm() - g.bound_f64());
    }
    Ok(d)
}

/// Repairs an approximate representation of a registered presentation into
/// an exact one within distance `eps`.
///
/// The relation defect must be at most `2⁻ᵐ` with `m = modulus(n)` and
/// `2⁻ⁿ ≤ eps` the largest such power. Unitaries are replaced by their polar
/// parts, projections by spectral cuts; matrix units are rebuilt from a
/// rounded diagonal PVM and partial isometries `v_{i1}` with
/// `v_{ij} = v_{i1} v_{j1}*`.
pub fn stability_witness(
    pres: &Presentation,
    rep: &Representation,
    eps: f64,
    tol: &Tolerance,
) -> Result<Representation> {
    let id = pres
        .id()
        .ok_or_else(|| Error::Unsupported("presentation has no registered id".into()))?;
    let table = default_modulus(id)?;
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::input(format!("ε must lie in (0, 1], got {eps}")));
    }
    let n = StabilityModulusTable::target_exponent(eps);
    let m = table.modulus(n);
    let bound = (-(m as f64)).exp2();
    let defect = relation_defect(pres, rep)?;
    if defect > bound {
        return Err(Error::hypothesis(
            format!("relation defect for '{id}'"),
            defect,
            bound,
        ));
    }
    let target = (-(n as f64)).exp2();
    let mut images = BTreeMap::new();
    match id {
        PresentationId::FreeUnitaries(_) => {
            for g in pres.generators() {
                let (u, _) = round_to_unitary(&rep.image(&g.name)?, target, tol)?;
                images.insert(g.name.clone(), u);
            }
        }
        PresentationId::Projections(_) => {
            for g in pres.generators() {
                let (p, _) = round_to_projection(&rep.image(&g.name)?, target, tol)?;
                images.insert(g.name.clone(), p);
            }
        }
        PresentationId::MatrixUnits(k) => {
            let name = |i: usize, j: usize| format!("e{i}{j}");
            let diag = (1..=k)
                .map(|i| rep.image(&name(i, i)))
                .collect::<Result<Vec<_>>>()?;
            let (q, _) = round_to_pvm(&diag, tol)?;
            let mut first_column = vec![q[0].clone()];
            for i in 2..=k {
                let v = partial_isometry_cut(&rep.image(&name(i, 1))?, &q[0], &q[i - 1], 0.5);
                first_column.push(v);
            }
            for i in 1..=k {
                for j in 1..=k {
                    let v = &first_column[i - 1] * &first_column[j - 1].adjoint();
                    images.insert(name(i, j), v);
                }
            }
        }
        PresentationId::Cuntz(_) | PresentationId::Toeplitz => unreachable!("rejected above"),
    }
    let out = Representation::new(rep.dim(), pres.unit(), images)?;
    let residual = relation_defect(pres, &out)?;
    if residual > tol.algebraic {
        return Err(Error::precondition(format!(
            "witness misses the relations by {residual:e}"
        )));
    }
    let distance = rep.distance(&out)?;
    if distance >= eps {
        return Err(Error::precondition(format!(
            "witness moved the generators by {distance:e}, not below {eps:e}"
        )));
    }
    Ok(out)
}

/// A random exact representation of a registered presentation. Matrix units
/// use dimension `k·⌈dim/k⌉`.
pub fn random_exact_representation<R: Rng + ?Sized>(
    pres: &Presentation,
    dim: usize,
    rng: &mut R,
) -> Result<Representation> {
    let id = pres
        .id()
        .ok_or_else(|| Error::Unsupported("presentation has no registered id".into()))?;
    let mut images = BTreeMap::new();
    let dim = match id {
        PresentationId::FreeUnitaries(_) => {
            for g in pres.generators() {
                images.insert(g.name.clone(), sampling::random_unitary(dim, rng));
            }
            dim
        }
        PresentationId::Projections(_) => {
            for g in pres.generators() {
                let rank = rng.gen_range(0..=dim);
                images.insert(g.name.clone(), sampling::random_projection(dim, rank, rng));
            }
            dim
        }
        PresentationId::MatrixUnits(k) => {
            let copies = dim.div_ceil(k).max(1);
            let full = k * copies;
            let u = sampling::random_unitary(full, rng);
            for i in 1..=k {
                for j in 1..=k {
                    let unit = ComplexMatrix::matrix_unit(k, i - 1, j - 1)
                        .kron(&ComplexMatrix::identity(copies));
                    images.insert(format!("e{i}{j}"), &(&u * &unit) * &u.adjoint());
                }
            }
            full
        }
        PresentationId::Cuntz(_) | PresentationId::Toeplitz => {
            return Err(Error::Unsupported(format!("no exact sampler for '{id}'")))
        }
    };
    Representation::new(dim, pres.unit(), images)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::C64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn rep(pres: &Presentation, pairs: &[(&str, ComplexMatrix)]) -> Representation {
        let dim = pairs[0].1.dim();
        let images = pairs
            .iter()
            .map(|(n, m)| (n.to_string(), m.clone()))
            .collect();
        Representation::new(dim, pres.unit(), images).unwrap()
    }

    fn scalar(z: C64) -> ComplexMatrix {
        ComplexMatrix::from_rows(&[vec![z]]).unwrap()
    }

    #[test]
    fn eval_examples() {
        let pres = Presentation::registered(PresentationId::FreeUnitaries(1));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = sampling::random_unitary(3, &mut rng);
        let r = rep(&pres, &[("g", u)]);
        assert!(
            eval_poly(&pres.parse_poly("g* g - e").unwrap(), &r)
                .unwrap()
                .norm()
                < 1e-14
        );

        let one = rep(&pres, &[("g", scalar(C64::new(1.0, 0.0)))]);
        let v = eval_poly(&pres.parse_poly("g + g*").unwrap(), &one).unwrap();
        assert_eq!(v.get(0, 0), C64::new(2.0, 0.0));
        assert!(eval_poly(
            &pres.parse_poly("g").unwrap(),
            &Representation::new(1, "e", BTreeMap::new()).unwrap()
        )
        .is_err());
    }

    #[test]
    fn eval_matches_direct_multiplication() {
        let pres = Presentation::registered(PresentationId::FreeUnitaries(2));
        let g1 = ComplexMatrix::from_rows(&[
            vec![C64::new(1.0, 2.0), C64::new(0.5, 0.0)],
            vec![C64::new(0.0, -1.0), C64::new(3.0, 0.0)],
        ])
        .unwrap();
        let g2 = ComplexMatrix::from_rows(&[
            vec![C64::new(0.0, 1.0), C64::new(2.0, 0.0)],
            vec![C64::new(1.0, 1.0), C64::new(-1.0, 0.0)],
        ])
        .unwrap();
        let r = rep(&pres, &[("g1", g1.clone()), ("g2", g2.clone())]);
        let got = eval_poly(&pres.parse_poly("(1/2+1/2i) g1 g2*").unwrap(), &r).unwrap();
        // Oracle: entry-wise product with the conjugate transpose written out.
        let c = C64::new(0.5, 0.5);
        for i in 0..2 {
            for j in 0..2 {
                let mut s = C64::new(0.0, 0.0);
                for l in 0..2 {
                    s += g1.get(i, l) * g2.get(j, l).conj();
                }
                assert!((got.get(i, j) - c * s).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn relation_defect_examples() {
        let m2 = Presentation::registered(PresentationId::MatrixUnits(2));
        let exact = random_exact_representation(&m2, 2, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert!(relation_defect(&m2, &exact).unwrap() < 1e-12);

        let eta = 1e-3;
        let mut images = exact.images().clone();
        let e11 = images["e11"].clone();
        images.insert(
            "e11".into(),
            &e11 + &ComplexMatrix::matrix_unit(2, 0, 0).scale(eta),
        );
        let perturbed = Representation::new(2, "e", images).unwrap();
        let d = relation_defect(&m2, &perturbed).unwrap();
        assert!(d > 0.0 && d <= 5.0 * eta, "{d}");

        let u1 = Presentation::registered(PresentationId::FreeUnitaries(1));
        let big = rep(&u1, &[("g", scalar(C64::new(1.5, 0.0)))]);
        let d = relation_defect(&u1, &big).unwrap();
        // ‖g*g − e‖ = 1.25 dominates the norm-bound excess 0.5.
        assert!((d - 1.25).abs() < 1e-15);
        let bound_only = Presentation::new(
            vec![Generator::new("g", BigRational::one()).unwrap()],
            vec![],
            "e",
        )
        .unwrap();
        assert!((relation_defect(&bound_only, &big).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn registered_presentations_are_exact_on_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for id in [
            PresentationId::FreeUnitaries(2),
            PresentationId::Projections(3),
            PresentationId::MatrixUnits(3),
        ] {
            let pres = Presentation::registered(id);
            for dim in [1, 3, 6] {
                let r = random_exact_representation(&pres, dim, &mut rng).unwrap();
                assert!(
                    relation_defect(&pres, &r).unwrap() < 1e-12,
                    "{id} dim {dim}"
                );
            }
        }
    }

    #[test]
    fn witness_examples() {
        let pres = Presentation::registered(PresentationId::FreeUnitaries(1));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = sampling::random_unitary(3, &mut rng);
        let exact = rep(&pres, &[("g", u.clone())]);
        let w = stability_witness(&pres, &exact, 0.1, &tol()).unwrap();
        assert!(w.distance(&exact).unwrap() < 1e-12);

        let scaled = rep(&pres, &[("g", u.scale(1.01))]);
        let w = stability_witness(&pres, &scaled, 0.1, &tol()).unwrap();
        assert!((&w.image("g").unwrap() - &u).norm() < 1e-12);

        let far = rep(&pres, &[("g", u.scale(1.2))]);
        assert!(matches!(
            stability_witness(&pres, &far, 0.1, &tol()),
            Err(Error::Hypothesis { .. })
        ));
    }

    #[test]
    fn matrix_unit_witness_under_small_noise() {
        let pres = Presentation::registered(PresentationId::MatrixUnits(2));
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let exact = random_exact_representation(&pres, 2, &mut rng).unwrap();
            let images = exact
                .images()
                .iter()
                .map(|(n, m)| {
                    let noise = ComplexMatrix::from_fn(2, |_, _| {
                        let s = if rng.gen_bool(0.5) { 1e-5 } else { -1e-5 };
                        C64::new(s, 0.0)
                    });
                    (n.clone(), m + &noise)
                })
                .collect();
            let noisy = Representation::new(2, "e", images).unwrap();
            let w = stability_witness(&pres, &noisy, 0.125, &tol()).unwrap();
            assert!(w.distance(&exact).unwrap() < 1e-3);
            assert!(relation_defect(&pres, &w).unwrap() < 1e-10);
        }
    }

    #[test]
    fn unregistered_ids_are_unsupported() {
        for id in [PresentationId::Cuntz(2), PresentationId::Toeplitz] {
            let pres = Presentation::registered(id);
            let r = Representation::new(1, "e", BTreeMap::new()).unwrap();
            assert!(matches!(
                stability_witness(&pres, &r, 0.5, &tol()),
                Err(Error::Unsupported(_))
            ));
        }
    }

    #[test]
    fn ids_round_trip() {
        for id in [
            PresentationId::FreeUnitaries(3),
            PresentationId::Projections(1),
            PresentationId::MatrixUnits(4),
            PresentationId::Cuntz(2),
            PresentationId::Toeplitz,
        ] {
            assert_eq!(id.to_string().parse::<PresentationId>().unwrap(), id);
        }
        assert!("matrix_units:10".parse::<PresentationId>().is_err());
        assert!("blah:1".parse::<PresentationId>().is_err());
    }

    #[test]
    fn with_id_checks_canonical_form() {
        let gens = vec![Generator::new("g", BigRational::one()).unwrap()];
        let rels = vec![
            NCPolynomial::parse("g g* - e", "e").unwrap(),
            NCPolynomial::parse("-e + g* g", "e").unwrap(),
        ];
        let p = Presentation::new(gens.clone(), rels, "e").unwrap();
        assert!(p.with_id(PresentationId::FreeUnitaries(1)).is_ok());
        let p = Presentation::new(
            gens,
            vec![NCPolynomial::parse("g g* - e", "e").unwrap()],
            "e",
        )
        .unwrap();
        assert!(p.with_id(PresentationId::FreeUnitaries(1)).is_err());
    }

    #[test]
    fn dyadic_bounds() {
        assert_eq!(
            parse_dyadic("3/2^2").unwrap(),
            BigRational::new(3.into(), 4.into())
        );
        assert_eq!(parse_dyadic("1").unwrap(), BigRational::one());
        assert_eq!(
            parse_dyadic("5/8").unwrap(),
            BigRational::new(5.into(), 8.into())
        );
        assert!(parse_dyadic("1/3").is_err());
        assert!(Generator::new("g", BigRational::new((-1).into(), 1.into())).is_err());
    }

    #[test]
    fn undeclared_symbols_are_rejected() {
        let gens = vec![Generator::new("g", BigRational::one()).unwrap()];
        assert!(Presentation::new(
            gens.clone(),
            vec![NCPolynomial::parse("h g", "e").unwrap()],
            "e"
        )
        .is_err());
        assert!(Presentation::new(gens, vec![], "g").is_err());
    }
}
