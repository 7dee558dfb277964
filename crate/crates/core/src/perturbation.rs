//! Rounding approximate algebraic objects to exact ones.
//!
//! Each `round_to_*` function checks a quantitative hypothesis on the input
//! (its defect), builds the nearby exact object, and returns a
//! [`RoundingReport`] with the defect, the distance moved, and the residual
//! violation of the exact identity by the output.
//!
//! Admissible defects per target distance `ε`:
//!
//! | kind              | admissible defect     |
//! |-------------------|-----------------------|
//! | unitary           | `ε / 2`               |
//! | projection        | `ε² / 16`             |
//! | partial isometry  | `2⁻¹⁷ ε⁸`             |
//! | POVM / PVM        | `min(ε² / 64, 2⁻⁸)`   |
//!
//! [`stability_modulus`] returns the largest power of two below each bound.

use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matrix::{eig_symmetrized, polar_unitary, positive_part, ComplexMatrix, Tolerance, C64};

/// Which exact object a rounding targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RoundingKind {
    Unitary,
    Projection,
    PartialIsometry,
    Povm,
    Pvm,
}

impl RoundingKind {
    pub const ALL: [RoundingKind; 5] = [
        RoundingKind::Unitary,
        RoundingKind::Projection,
        RoundingKind::PartialIsometry,
        RoundingKind::Povm,
        RoundingKind::Pvm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RoundingKind::Unitary => "unitary",
            RoundingKind::Projection => "projection",
            RoundingKind::PartialIsometry => "partial_isometry",
            RoundingKind::Povm => "povm",
            RoundingKind::Pvm => "pvm",
        }
    }
}

impl fmt::Display for RoundingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RoundingReport {
    /// The hypothesis quantity measured on the input.
    pub input_defect: f64,
    /// `max_i ‖input_i − output_i‖`.
    pub output_distance: f64,
    /// How far the output is from satisfying its identity exactly.
    pub exactness_residual: f64,
}

/// The dyadic rational `2^-exponent`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dyadic {
    pub exponent: u32,
}

impl Dyadic {
    pub fn value(self) -> f64 {
        (-(self.exponent as f64)).exp2()
    }

    /// Largest power of two that is `≤ x`, for `0 < x ≤ 1`.
    pub fn floor_of(x: f64) -> Dyadic {
        assert!(
            x > 0.0 && x <= 1.0,
            "dyadic floor needs x in (0, 1], got {x}"
        );
        let mut exponent = 0u32;
        while (-(exponent as f64)).exp2() > x {
            exponent += 1;
        }
        Dyadic { exponent }
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "2^-{}", self.exponent)
    }
}

const PVM_CAP: f64 = 1.0 / 256.0;
/// Per-stage defect allowed for compressed elements inside `round_to_pvm`.
const PVM_STAGE_BUDGET: f64 = 1.0 / 16.0;

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::input(format!("ε must lie in (0, 1], got {eps}")));
    }
    Ok(())
}

/// The admissible input defect for target distance `eps`, before rounding
/// down to a power of two.
pub fn admissible_defect(kind: RoundingKind, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    Ok(match kind {
        RoundingKind::Unitary => eps / 2.0,
        RoundingKind::Projection => eps * eps / 16.0,
        RoundingKind::PartialIsometry => (-17.0f64).exp2() * eps.powi(8),
        RoundingKind::Povm => eps * eps / 64.0,
        RoundingKind::Pvm => (eps * eps / 64.0).min(PVM_CAP),
    })
}

/// Computable stability modulus: a power of two strictly inside the open
/// bound under which the rounding is guaranteed.
pub fn stability_modulus(kind: RoundingKind, eps: f64) -> Result<Dyadic> {
    Ok(Dyadic::floor_of(admissible_defect(kind, eps)?))
}

fn identity_defects(a: &ComplexMatrix) -> (f64, f64) {
    let id = ComplexMatrix::identity(a.dim());
    let left = (&(&a.adjoint() * a) - &id).norm();
    let right = (&(a * &a.adjoint()) - &id).norm();
    (left, right)
}

/// `max(‖a − a*‖, ‖a − a²‖)`.
pub fn projection_defect(a: &ComplexMatrix) -> f64 {
    let herm = a.hermitian_defect();
    let idem = (a - &(a * a)).norm();
    herm.max(idem)
}

/// Rounds an almost-unitary to the unitary factor of its polar decomposition.
pub fn round_to_unitary(
    a: &ComplexMatrix,
    eps: f64,
    tol: &Tolerance,
) -> Result<(ComplexMatrix, RoundingReport)> {
    let bound = admissible_defect(RoundingKind::Unitary, eps)?;
    let (left, right) = identity_defects(a);
    let defect = left.max(right);
    if defect > bound {
        return Err(Error::hypothesis(
            "max(‖a*a − 1‖, ‖aa* − 1‖)",
            defect,
            bound,
        ));
    }
    let u = polar_unitary(a, tol)?;
    let (l, r) = identity_defects(&u);
    let report = RoundingReport {
        input_defect: defect,
        output_distance: (a - &u).norm(),
        exactness_residual: l.max(r),
    };
    Ok((u, report))
}

/// Rounds an almost-projection by cutting the spectrum of its Hermitian part
/// at 1/2.
pub fn round_to_projection(
    a: &ComplexMatrix,
    eps: f64,
    tol: &Tolerance,
) -> Result<(ComplexMatrix, RoundingReport)> {
    let bound = admissible_defect(RoundingKind::Projection, eps)?;
    let norm = a.norm();
    if norm > 2.0 {
        return Err(Error::hypothesis("‖a‖ ≤ 2", norm, 2.0));
    }
    let defect = projection_defect(a);
    if defect > bound {
        return Err(Error::hypothesis("max(‖a − a*‖, ‖a − a²‖)", defect, bound));
    }
    let p = spectral_cut(a);
    let residual = projection_defect(&p);
    check_residual(residual, tol)?;
    Ok((
        p.clone(),
        RoundingReport {
            input_defect: defect,
            output_distance: (a - &p).norm(),
            exactness_residual: residual,
        },
    ))
}

/// `χ_{[1/2, ∞)}((a + a*)/2)`.
fn spectral_cut(a: &ComplexMatrix) -> ComplexMatrix {
    eig_symmetrized(&a.hermitian_part()).apply(|t| if t >= 0.5 { 1.0 } else { 0.0 })
}

fn check_residual(residual: f64, tol: &Tolerance) -> Result<()> {
    if residual > tol.algebraic {
        return Err(Error::precondition(format!(
            "rounded output misses its identity by {residual:e}"
        )));
    }
    Ok(())
}

fn is_projection(p: &ComplexMatrix, tol: &Tolerance) -> bool {
    projection_defect(p) <= tol.algebraic
}

/// Rounds `a` to a partial isometry `w` with `w*w = p1` and `ww* = p2`.
///
/// `b = p2 a p1`, then `w = b · f(b*b)` where `f(t) = 1/√t` above
/// `γ = 7 δ^{1/4}` and zero below; `δ` is the admissible defect for `eps`.
pub fn round_to_partial_isometry(
    a: &ComplexMatrix,
    p1: &ComplexMatrix,
    p2: &ComplexMatrix,
    eps: f64,
    tol: &Tolerance,
) -> Result<(ComplexMatrix, RoundingReport)> {
    let bound = admissible_defect(RoundingKind::PartialIsometry, eps)?;
    a.same_dim(p1)?;
    a.same_dim(p2)?;
    if !is_projection(p1, tol) || !is_projection(p2, tol) {
        return Err(Error::input("p1 and p2 must be projections"));
    }
    let defect = partial_isometry_defect(a, p1, p2);
    if defect > bound {
        return Err(Error::hypothesis(
            "max(‖a*a − p1‖, ‖aa* − p2‖)",
            defect,
            bound,
        ));
    }
    let gamma = 7.0 * bound.powf(0.25);
    let w = partial_isometry_cut(a, p1, p2, gamma);
    let residual = partial_isometry_defect(&w, p1, p2);
    check_residual(residual, tol)?;
    Ok((
        w.clone(),
        RoundingReport {
            input_defect: defect,
            output_distance: (a - &w).norm(),
            exactness_residual: residual,
        },
    ))
}

/// `max(‖a*a − p1‖, ‖aa* − p2‖)`.
pub fn partial_isometry_defect(a: &ComplexMatrix, p1: &ComplexMatrix, p2: &ComplexMatrix) -> f64 {
    let left = (&(&a.adjoint() * a) - p1).norm();
    let right = (&(a * &a.adjoint()) - p2).norm();
    left.max(right)
}

pub(crate) fn partial_isometry_cut(
    a: &ComplexMatrix,
    p1: &ComplexMatrix,
    p2: &ComplexMatrix,
    gamma: f64,
) -> ComplexMatrix {
    let b = &(p2 * a) * p1;
    let gram = (&b.adjoint() * &b).hermitian_part();
    let f = eig_symmetrized(&gram).apply(|t| if t > gamma { 1.0 / t.sqrt() } else { 0.0 });
    &b * &f
}

fn same_dims(ops: &[ComplexMatrix]) -> Result<usize> {
    let first = ops
        .first()
        .ok_or_else(|| Error::input("measurement must have at least one element"))?;
    for op in &ops[1..] {
        first.same_dim(op)?;
    }
    Ok(first.dim())
}

/// `max( max_i dist(A_i, positive cone), ‖Σ A_i − 1‖ )`, with the cone
/// distance realized as `‖X − Π(X)‖` for `Π(X)` the positive part of the
/// Hermitian part of `X`.
pub fn povm_defect(ops: &[ComplexMatrix]) -> Result<f64> {
    let dim = same_dims(ops)?;
    let cone = ops
        .iter()
        .map(|x| (x - &positive_part(x)).norm())
        .fold(0.0_f64, f64::max);
    let total = (&crate::matrix::sum(ops) - &ComplexMatrix::identity(dim)).norm();
    Ok(cone.max(total))
}

/// `S^{-1/2} P_a S^{-1/2}` for `S = Σ P_a`; `None` when `S` is singular.
pub(crate) fn renormalize(positives: &[ComplexMatrix]) -> Option<Vec<ComplexMatrix>> {
    let s = crate::matrix::sum(positives).hermitian_part();
    let spec = eig_symmetrized(&s);
    if spec.min() <= 1e-12 * spec.max().max(1.0) {
        return None;
    }
    let inv_sqrt = spec.apply(|t| 1.0 / t.sqrt());
    Some(
        positives
            .iter()
            .map(|p| (&(&inv_sqrt * p) * &inv_sqrt).hermitian_part())
            .collect(),
    )
}

/// Sum residual and negativity of a candidate POVM.
pub fn povm_residual(ops: &[ComplexMatrix]) -> f64 {
    let dim = ops[0].dim();
    let total = (&crate::matrix::sum(ops) - &ComplexMatrix::identity(dim)).norm();
    let negativity = ops
        .iter()
        .map(|op| (-crate::matrix::min_eigenvalue(op)).max(0.0))
        .fold(0.0_f64, f64::max);
    total.max(negativity)
}

/// Rounds a near-POVM: positive parts of the Hermitian parts, conjugated by
/// `S^{-1/2}` where `S` is their sum. Requires defect below 1/2 so that
/// `S ≥ 1/2`.
pub fn round_to_povm(
    ops: &[ComplexMatrix],
    tol: &Tolerance,
) -> Result<(Vec<ComplexMatrix>, RoundingReport)> {
    let defect = povm_defect(ops)?;
    if defect >= 0.5 {
        return Err(Error::hypothesis("POVM defect < 1/2", defect, 0.5));
    }
    let positives: Vec<ComplexMatrix> = ops.iter().map(positive_part).collect();
    let out =
        renormalize(&positives).ok_or_else(|| Error::precondition("renormalizer is singular"))?;
    let residual = povm_residual(&out);
    check_residual(residual, tol)?;
    let distance = ops
        .iter()
        .zip(&out)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0_f64, f64::max);
    Ok((
        out,
        RoundingReport {
            input_defect: defect,
            output_distance: distance,
            exactness_residual: residual,
        },
    ))
}

/// Largest violation of the PVM identities: each output a projection,
/// pairwise products zero, sum the identity.
pub fn pvm_residual(qs: &[ComplexMatrix]) -> f64 {
    let dim = qs[0].dim();
    let mut worst = (&crate::matrix::sum(qs) - &ComplexMatrix::identity(dim)).norm();
    for (i, q) in qs.iter().enumerate() {
        worst = worst.max(projection_defect(q));
        for r in &qs[i + 1..] {
            worst = worst.max((q * r).norm());
        }
    }
    worst
}

fn wrap_or_zero(m: DMatrix<C64>, dim: usize) -> ComplexMatrix {
    if m.ncols() == 0 {
        ComplexMatrix::zeros(dim)
    } else {
        let p = &m * m.adjoint();
        ComplexMatrix::wrap(p).hermitian_part()
    }
}

/// Rounds a near-PVM to pairwise-orthogonal projections summing to 1.
///
/// Stage `s` compresses `A_s` into the corner left over by the earlier
/// stages, cuts its spectrum at 1/2, and passes the complementary corner
/// on. The last projection is whatever corner remains.
pub fn round_to_pvm(
    ops: &[ComplexMatrix],
    tol: &Tolerance,
) -> Result<(Vec<ComplexMatrix>, RoundingReport)> {
    let dim = same_dims(ops)?;
    let k = ops.len();
    let mut defect = (&crate::matrix::sum(ops) - &ComplexMatrix::identity(dim)).norm();
    for (i, a) in ops.iter().enumerate() {
        let norm = a.norm();
        if norm > 2.0 {
            return Err(Error::hypothesis(format!("input {i}: ‖A‖ ≤ 2"), norm, 2.0));
        }
        defect = defect.max(projection_defect(a));
    }
    if defect > PVM_CAP {
        return Err(Error::hypothesis(
            "input stage: PVM defect",
            defect,
            PVM_CAP,
        ));
    }

    let mut corner: DMatrix<C64> = DMatrix::identity(dim, dim);
    let mut out = Vec::with_capacity(k);
    for (stage, a) in ops.iter().enumerate() {
        let r = corner.ncols();
        if stage + 1 == k {
            if r > 0 {
                let compressed = corner.adjoint() * a.as_matrix() * &corner;
                let c = ComplexMatrix::wrap(compressed);
                let miss = (&c - &ComplexMatrix::identity(r)).norm();
                if miss > PVM_STAGE_BUDGET {
                    return Err(Error::hypothesis(
                        format!("stage {stage}: remaining corner"),
                        miss,
                        PVM_STAGE_BUDGET,
                    ));
                }
            }
            out.push(wrap_or_zero(corner.clone(), dim));
            break;
        }
        if r == 0 {
            out.push(ComplexMatrix::zeros(dim));
            continue;
        }
        let c = ComplexMatrix::wrap(corner.adjoint() * a.as_matrix() * &corner);
        let stage_defect = projection_defect(&c);
        if stage_defect > PVM_STAGE_BUDGET {
            return Err(Error::hypothesis(
                format!("stage {stage}: compressed element"),
                stage_defect,
                PVM_STAGE_BUDGET,
            ));
        }
        let spec = eig_symmetrized(&c.hermitian_part());
        let (keep, rest): (Vec<usize>, Vec<usize>) =
            (0..r).partition(|&i| spec.eigenvalues[i] >= 0.5);
        let basis = spec.eigenvectors.as_matrix();
        let pick = |idx: &[usize]| -> DMatrix<C64> {
            let mut m = DMatrix::<C64>::zeros(dim, idx.len());
            for (dst, &src) in idx.iter().enumerate() {
                let col = &corner * basis.column(src);
                m.set_column(dst, &col);
            }
            m
        };
        out.push(wrap_or_zero(pick(&keep), dim));
        corner = pick(&rest);
    }

    let residual = pvm_residual(&out);
    check_residual(residual, tol)?;
    let distance = ops
        .iter()
        .zip(&out)
        .map(|(a, q)| (a - q).norm())
        .fold(0.0_f64, f64::max);
    Ok((
        out,
        RoundingReport {
            input_defect: defect,
            output_distance: distance,
            exactness_residual: residual,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn scalar(x: f64) -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&[x])
    }

    #[test]
    fn modulus_values() {
        // (1/2)^2 / 16 = 2^-6
        assert_eq!(
            stability_modulus(RoundingKind::Projection, 0.5)
                .unwrap()
                .exponent,
            6
        );
        assert!(
            stability_modulus(RoundingKind::Projection, 0.5)
                .unwrap()
                .value()
                < 0.25 / 8.0
        );
        assert_eq!(
            stability_modulus(RoundingKind::PartialIsometry, 1.0)
                .unwrap()
                .exponent,
            17
        );
        assert_eq!(
            stability_modulus(RoundingKind::Unitary, 0.25)
                .unwrap()
                .exponent,
            3
        );
        assert_eq!(
            stability_modulus(RoundingKind::Povm, 0.5).unwrap().exponent,
            8
        );
        assert_eq!(
            stability_modulus(RoundingKind::Pvm, 1.0).unwrap().exponent,
            8
        );
        for bad in [0.0, -0.5, 1.5, f64::NAN] {
            assert!(matches!(
                stability_modulus(RoundingKind::Unitary, bad),
                Err(Error::Input(_))
            ));
        }
    }

    #[test]
    fn modulus_strictly_inside_open_bounds() {
        for i in 1..200 {
            let eps = i as f64 / 200.0;
            let proj = stability_modulus(RoundingKind::Projection, eps)
                .unwrap()
                .value();
            assert!(proj < eps * eps / 8.0);
            let pi = stability_modulus(RoundingKind::PartialIsometry, eps)
                .unwrap()
                .value();
            assert!(pi < (-16.0f64).exp2() * eps.powi(8));
            let u = stability_modulus(RoundingKind::Unitary, eps)
                .unwrap()
                .value();
            assert!(u < eps);
        }
    }

    #[test]
    fn unitary_fixed_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = sampling::random_unitary(5, &mut rng);
        let (out, rep) = round_to_unitary(&u, 0.3, &tol()).unwrap();
        assert!((&out - &u).norm() < 1e-12);
        assert!(rep.output_distance < 1e-12);
    }

    #[test]
    fn unitary_scalar_multiple() {
        // ‖a*a − 1‖ = 0.1025: too large for ε = 0.1 (admissible 0.05), fine for ε = 1/4.
        let a = ComplexMatrix::identity(3).scale(1.05);
        assert!(matches!(
            round_to_unitary(&a, 0.1, &tol()),
            Err(Error::Hypothesis { .. })
        ));
        let (u, rep) = round_to_unitary(&a, 0.25, &tol()).unwrap();
        assert!((&u - &ComplexMatrix::identity(3)).norm() < 1e-14);
        assert!((rep.output_distance - 0.05).abs() < 1e-12);
        assert!((rep.input_defect - 0.1025).abs() < 1e-12);
    }

    #[test]
    fn unitary_random_near() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for i in 0..100 {
            let eps = 0.5;
            let delta = stability_modulus(RoundingKind::Unitary, eps)
                .unwrap()
                .value();
            let dim = 2 + i % 7;
            let u = sampling::random_unitary(dim, &mut rng);
            let h = sampling::random_hermitian(dim, delta / 4.0, &mut rng);
            let a = &u * &(&ComplexMatrix::identity(dim) + &h);
            let (_, rep) = round_to_unitary(&a, eps, &tol()).unwrap();
            assert!(rep.output_distance < eps);
            assert!(rep.output_distance <= 2.0 * rep.input_defect + 1e-12);
            assert!(rep.exactness_residual <= 1e-10);
        }
    }

    #[test]
    fn projection_examples() {
        let p = ComplexMatrix::from_diagonal(&[0.0, 1.0]);
        let (out, rep) = round_to_projection(&p, 0.5, &tol()).unwrap();
        assert!((&out - &p).norm() < 1e-14);
        assert_eq!(rep.input_defect, 0.0);

        let a = ComplexMatrix::from_diagonal(&[0.05, 0.95]);
        let (out, rep) = round_to_projection(&a, 0.9, &tol()).unwrap();
        assert!((&out - &p).norm() < 1e-14);
        assert!((rep.output_distance - 0.05).abs() < 1e-12);
        assert!((rep.input_defect - 0.0475).abs() < 1e-12);

        let big = ComplexMatrix::identity(2).scale(2.5);
        assert!(matches!(
            round_to_projection(&big, 0.5, &tol()),
            Err(Error::Hypothesis { .. })
        ));
    }

    #[test]
    fn projection_from_clustered_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        use rand::Rng;
        for _ in 0..50 {
            let eps = 0.25;
            let dim = rng.gen_range(2..10);
            let u = sampling::random_unitary(dim, &mut rng);
            let rank = rng.gen_range(0..=dim);
            // Spectrum within the projection hypothesis: |λ − λ²| ≤ ε²/16.
            let spread = eps * eps / 16.0;
            let diag: Vec<f64> = (0..dim)
                .map(|i| {
                    let t = rng.gen::<f64>() * spread;
                    if i < rank {
                        1.0 - t
                    } else {
                        t
                    }
                })
                .collect();
            let a = &(&u * &ComplexMatrix::from_diagonal(&diag)) * &u.adjoint();
            let (p, rep) = round_to_projection(&a, eps, &tol()).unwrap();
            assert!(rep.output_distance <= eps / 4.0);
            assert!((p.trace().re - rank as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn projection_degradation_on_diagonal_family() {
        // a = diag(t, 1 − t): defect t − t², distance t.
        let mut prev: Option<(f64, f64)> = None;
        for i in 1..12 {
            let t = 0.001 * i as f64;
            let a = ComplexMatrix::from_diagonal(&[t, 1.0 - t]);
            let (_, rep) = round_to_projection(&a, 0.9, &tol()).unwrap();
            if let Some((d0, dist0)) = prev {
                if rep.input_defect <= 2.0 * d0 {
                    assert!(rep.output_distance <= 2.0 * dist0 + 4.0 * rep.input_defect);
                }
            }
            prev = Some((rep.input_defect, rep.output_distance));
        }
    }

    #[test]
    fn partial_isometry_fixed_point() {
        let v = ComplexMatrix::matrix_unit(2, 0, 1);
        let p1 = ComplexMatrix::from_diagonal(&[0.0, 1.0]);
        let p2 = ComplexMatrix::from_diagonal(&[1.0, 0.0]);
        let (w, rep) = round_to_partial_isometry(&v, &p1, &p2, 0.5, &tol()).unwrap();
        assert!((&w - &v).norm() < 1e-14);
        assert_eq!(rep.output_distance, 0.0);
    }

    #[test]
    fn partial_isometry_scaled_matrix_unit() {
        let p1 = ComplexMatrix::from_diagonal(&[0.0, 1.0]);
        let p2 = ComplexMatrix::from_diagonal(&[1.0, 0.0]);
        let e12 = ComplexMatrix::matrix_unit(2, 0, 1);
        // 1 − 0.999² ≈ 2e-3 is far above 2^-17 ε^8 for every ε ≤ 1.
        let a = e12.scale(0.999);
        assert!(matches!(
            round_to_partial_isometry(&a, &p1, &p2, 1.0, &tol()),
            Err(Error::Hypothesis { .. })
        ));
        // 1 − (1 − 1e-6)² ≈ 2e-6 ≤ 2^-17 ≈ 7.6e-6.
        let a = e12.scale(1.0 - 1e-6);
        let (w, rep) = round_to_partial_isometry(&a, &p1, &p2, 1.0, &tol()).unwrap();
        assert!((&w - &e12).norm() < 1e-14);
        assert!((rep.output_distance - 1e-6).abs() < 1e-12);
    }

    #[test]
    fn partial_isometry_rejects_non_projection() {
        let p = ComplexMatrix::from_diagonal(&[0.5, 1.0]);
        let a = ComplexMatrix::identity(2);
        assert!(matches!(
            round_to_partial_isometry(&a, &p, &p, 0.5, &tol()),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn partial_isometry_random_near() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        use rand::Rng;
        for _ in 0..100 {
            let dim = rng.gen_range(2..9);
            let rank = rng.gen_range(1..=dim);
            let (v, p1, p2) = sampling::random_partial_isometry(dim, rank, &mut rng);
            let eps = 0.5;
            let delta = stability_modulus(RoundingKind::PartialIsometry, eps)
                .unwrap()
                .value();
            let a = &v + &sampling::random_perturbation(dim, delta / 4.0, &mut rng);
            let (_, rep) = round_to_partial_isometry(&a, &p1, &p2, eps, &tol()).unwrap();
            assert!(rep.exactness_residual <= 1e-10);
            assert!(rep.output_distance < eps);
        }
    }

    #[test]
    fn povm_defect_examples() {
        let exact = vec![
            ComplexMatrix::from_diagonal(&[0.3, 1.0]),
            ComplexMatrix::from_diagonal(&[0.7, 0.0]),
        ];
        assert!(povm_defect(&exact).unwrap() < 1e-15);
        assert!((povm_defect(&[scalar(0.55), scalar(0.55)]).unwrap() - 0.1).abs() < 1e-12);
        let a = ComplexMatrix::from_diagonal(&[-0.2, 0.5]);
        let rest = &ComplexMatrix::identity(2) - &a;
        assert!((povm_defect(&[a, rest]).unwrap() - 0.2).abs() < 1e-12);
        assert!(matches!(
            povm_defect(&[scalar(1.0), ComplexMatrix::identity(2)]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn povm_rounding_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let exact = sampling::random_povm(4, 3, &mut rng);
        let (out, rep) = round_to_povm(&exact, &tol()).unwrap();
        assert!(rep.output_distance < 1e-12);
        for (a, b) in exact.iter().zip(&out) {
            assert!((a - b).norm() < 1e-12);
        }

        let (out, rep) = round_to_povm(&[scalar(0.55), scalar(0.55)], &tol()).unwrap();
        assert!((out[0].get(0, 0).re - 0.5).abs() < 1e-15);
        assert!((out[1].get(0, 0).re - 0.5).abs() < 1e-15);
        assert!((rep.output_distance - 0.05).abs() < 1e-12);

        let (out, _) = round_to_povm(&[scalar(-0.1), scalar(1.05)], &tol()).unwrap();
        assert!(out[0].get(0, 0).norm() < 1e-15);
        assert!((out[1].get(0, 0).re - 1.0).abs() < 1e-15);

        assert!(matches!(
            round_to_povm(&[scalar(0.2), scalar(0.2)], &tol()),
            Err(Error::Hypothesis { .. })
        ));
    }

    #[test]
    fn pvm_examples() {
        let exact = vec![
            ComplexMatrix::from_diagonal(&[1.0, 0.0, 0.0]),
            ComplexMatrix::from_diagonal(&[0.0, 1.0, 1.0]),
        ];
        let (out, rep) = round_to_pvm(&exact, &tol()).unwrap();
        for (a, b) in exact.iter().zip(&out) {
            assert!((a - b).norm() < 1e-14);
        }
        assert!(rep.exactness_residual < 1e-14);

        let (out, _) = round_to_pvm(&[ComplexMatrix::identity(3)], &tol()).unwrap();
        assert!((&out[0] - &ComplexMatrix::identity(3)).norm() < 1e-15);
    }

    #[test]
    fn pvm_diagonal_blocks_perturbed() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let eta = 1e-4;
        for _ in 0..20 {
            let blocks = [
                ComplexMatrix::from_diagonal(&[1.0, 1.0, 0.0, 0.0, 0.0]),
                ComplexMatrix::from_diagonal(&[0.0, 0.0, 1.0, 0.0, 0.0]),
                ComplexMatrix::from_diagonal(&[0.0, 0.0, 0.0, 1.0, 1.0]),
            ];
            let noisy: Vec<ComplexMatrix> = blocks
                .iter()
                .map(|b| b + &sampling::random_hermitian(5, eta, &mut rng))
                .collect();
            let (out, rep) = round_to_pvm(&noisy, &tol()).unwrap();
            assert!(rep.output_distance <= 10.0 * eta);
            assert!(rep.exactness_residual <= 1e-10);
            for i in 0..3 {
                for j in 0..3 {
                    if i != j {
                        assert!((&out[i] * &out[j]).norm() <= 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn pvm_rejects_large_defect() {
        let ops = vec![scalar(0.3), scalar(0.7)];
        assert!(matches!(
            round_to_pvm(&ops, &tol()),
            Err(Error::Hypothesis { .. })
        ));
    }
}
