//! Certified lower bounds for `‖q‖` in the universal algebra of a
//! presentation, found by scanning near-representations.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{
    eval_poly, random_exact_representation, relation_defect, stability_witness, NCPolynomial,
    Presentation, PresentationId, Representation, StabilityModulusTable,
};
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, Tolerance, C64};
use crate::sampling;

/// The dyadic rational `numer / 2^exp`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DyadicBound {
    pub numer: i64,
    pub exp: u32,
}

impl DyadicBound {
    pub fn value(self) -> f64 {
        self.numer as f64 / (self.exp as f64).exp2()
    }
}

impl fmt::Display for DyadicBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.numer, self.exp)
    }
}

/// One emitted lower bound.
#[derive(Clone, Debug, PartialEq)]
pub struct Emission {
    /// Round `j`: the bound is certified up to slack `2⁻ʲ`.
    pub round: u32,
    /// Continuity exponent `n(j)`.
    pub n: u32,
    /// Admissible defect exponent `m = modulus(n)`.
    pub m: u32,
    pub bound: DyadicBound,
    /// `‖q(r)‖` for the catalog representation `r`.
    pub observed: f64,
    /// `‖q(w)‖` for the exact witness `w` repaired from `r`.
    pub witnessed: f64,
    pub rep_index: usize,
    pub dim: usize,
}

/// An indexed, deterministic source of representations.
pub trait RepresentationCatalog: Sync {
    fn len(&self) -> usize;
    fn get(&self, index: usize) -> &Representation;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Representations of a registered presentation: a systematic
/// dimension-one prefix, then seeded random ones in dimensions `1..=16`,
/// half of them perturbed by noise of random size `2⁻³…2⁻⁴⁰`.
#[derive(Clone, Debug)]
pub struct SeededCatalog {
    reps: Vec<Representation>,
}

const PREFIX_CAP: usize = 256;

impl SeededCatalog {
    pub fn new(pres: &Presentation, seed: u64, size: usize) -> Result<Self> {
        let id = pres
            .id()
            .ok_or_else(|| Error::Unsupported("presentation has no registered id".into()))?;
        if !id.is_registered() {
            return Err(Error::Unsupported(format!("no catalog for '{id}'")));
        }
        let prefix = systematic_prefix(pres, id)?;
        let mut reps: Vec<Representation> = prefix.into_iter().take(size).collect();
        let start = reps.len();
        let random: Vec<Representation> = (start..size)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                random_entry(pres, &mut rng)
            })
            .collect::<Result<_>>()?;
        reps.extend(random);
        Ok(SeededCatalog { reps })
    }
}

impl RepresentationCatalog for SeededCatalog {
    fn len(&self) -> usize {
        self.reps.len()
    }

    fn get(&self, index: usize) -> &Representation {
        &self.reps[index]
    }
}

fn systematic_prefix(pres: &Presentation, id: PresentationId) -> Result<Vec<Representation>> {
    let names: Vec<String> = pres.generators().iter().map(|g| g.name.clone()).collect();
    let choices: Vec<C64> = match id {
        PresentationId::FreeUnitaries(_) => vec![
            C64::new(1.0, 0.0),
            C64::new(-1.0, 0.0),
            C64::new(0.0, 1.0),
            C64::new(0.0, -1.0),
        ],
        PresentationId::Projections(_) => vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        PresentationId::MatrixUnits(k) => {
            let mut images = BTreeMap::new();
            for i in 1..=k {
                for j in 1..=k {
                    images.insert(
                        format!("e{i}{j}"),
                        ComplexMatrix::matrix_unit(k, i - 1, j - 1),
                    );
                }
            }
            return Ok(vec![Representation::new(k, pres.unit(), images)?]);
        }
        PresentationId::Cuntz(_) | PresentationId::Toeplitz => unreachable!("unregistered"),
    };
    let b = choices.len();
    let total = (b as u128)
        .checked_pow(names.len() as u32)
        .unwrap_or(u128::MAX);
    let count = total.min(PREFIX_CAP as u128) as usize;
    (0..count)
        .map(|mut code| {
            let mut images = BTreeMap::new();
            for name in &names {
                let z = choices[code % b];
                code /= b;
                images.insert(name.clone(), ComplexMatrix::from_rows(&[vec![z]])?);
            }
            Representation::new(1, pres.unit(), images)
        })
        .collect()
}

fn random_entry(pres: &Presentation, rng: &mut ChaCha8Rng) -> Result<Representation> {
    let dim = rng.gen_range(1..=16);
    let exact = random_exact_representation(pres, dim, rng)?;
    if rng.gen_bool(0.5) {
        return Ok(exact);
    }
    let size = (-(rng.gen_range(3..=40) as f64)).exp2();
    let images = exact
        .images()
        .iter()
        .map(|(n, m)| {
            (
                n.clone(),
                m + &sampling::random_perturbation(m.dim(), size, rng),
            )
        })
        .collect();
    Representation::new(exact.dim(), pres.unit(), images)
}

fn word_degree(word: &[super::Letter], unit: &str) -> usize {
    word.iter().filter(|l| l.name != unit).count()
}

/// `L = Σ |c|·len·(M + 1)^{len − 1}` over the terms of `q`, `M` the largest
/// generator bound: a Lipschitz constant for `q` on generator tuples within
/// distance 1 of the bounded ball.
pub fn lipschitz_constant(pres: &Presentation, q: &NCPolynomial) -> f64 {
    let radius = pres.max_bound() + 1.0;
    q.terms()
        .map(|(w, c)| {
            let len = word_degree(w, pres.unit());
            if len == 0 {
                0.0
            } else {
                c.abs() * len as f64 * radius.powi(len as i32 - 1)
            }
        })
        .sum()
}

/// Triangle-inequality ceiling `Σ |c| Π C_x` on `‖q‖` in the universal
/// algebra.
pub fn norm_ceiling(pres: &Presentation, q: &NCPolynomial) -> f64 {
    q.terms()
        .map(|(w, c)| {
            c.abs()
                * w.iter()
                    .map(|l| pres.bound(&l.name).unwrap_or(f64::INFINITY))
                    .product::<f64>()
        })
        .sum()
}

/// Largest dyadic `t / 2^{j+1}` strictly below `x`.
fn dyadic_below(x: f64, j: u32) -> DyadicBound {
    let exp = j + 1;
    let scale = (exp as f64).exp2();
    let mut t = (x * scale).floor();
    if t / scale >= x {
        t -= 1.0;
    }
    DyadicBound {
        numer: t as i64,
        exp,
    }
}

/// Emits a strictly increasing sequence of certified lower bounds on `‖q‖`.
///
/// Round `j = 0, 1, …, rounds − 1` picks `n` with `L·2⁻ⁿ < 2⁻ʲ`, sets
/// `m = modulus(n)`, and scans the catalog for representations with
/// defect below `2⁻ᵐ`. A bound `d < ‖q(r)‖ − 2⁻ʲ` is emitted when it beats
/// every earlier output and `r` repairs to an exact witness `w` (within
/// `2⁻ⁿ`) with `‖q(w)‖ > d`.
pub fn norm_lower_enumerate(
    pres: &Presentation,
    q: &NCPolynomial,
    catalog: &dyn RepresentationCatalog,
    modulus: &StabilityModulusTable,
    rounds: u32,
    tol: &Tolerance,
) -> Result<Vec<Emission>> {
    let id = pres
        .id()
        .ok_or_else(|| Error::Unsupported("presentation has no registered id".into()))?;
    if !id.is_registered() {
        return Err(Error::Unsupported(format!(
            "no stability witness is registered for '{id}'"
        )));
    }
    if rounds > 48 {
        return Err(Error::input("at most 48 rounds are supported"));
    }
    for s in q.symbols() {
        if s != pres.unit() && pres.bound(s).is_none() {
            return Err(Error::input(format!("'{s}' is not a generator")));
        }
    }
    let lip = lipschitz_constant(pres, q);
    let lip_exp = if lip > 1.0 {
        lip.log2().ceil() as u32
    } else {
        0
    };

    let mut best = 0.0_f64;
    let mut out = Vec::new();
    for j in 0..rounds {
        let n = j + lip_exp + 1;
        let m = modulus.modulus(n);
        let admissible = (-(m as f64)).exp2();
        let slack = (-(j as f64)).exp2();
        let observed: Vec<Option<f64>> = (0..catalog.len())
            .into_par_iter()
            .map(|i| {
                let r = catalog.get(i);
                match relation_defect(pres, r) {
                    Ok(d) if d < admissible => eval_poly(q, r).ok().map(|v| v.norm()),
                    _ => None,
                }
            })
            .collect();
        for (i, value) in observed.into_iter().enumerate() {
            let Some(value) = value else { continue };
            let bound = dyadic_below(value - slack, j);
            if bound.value() <= best {
                continue;
            }
            let rep = catalog.get(i);
            let Ok(witness) = stability_witness(pres, rep, (-(n as f64)).exp2(), tol) else {
                continue;
            };
            let witnessed = eval_poly(q, &witness)?.norm();
            if witnessed <= bound.value() {
                continue;
            }
            best = bound.value();
            out.push(Emission {
                round: j,
                n,
                m,
                bound,
                observed: value,
                witnessed,
                rep_index: i,
                dim: rep.dim(),
            });
        }
    }
    Ok(out)
}
