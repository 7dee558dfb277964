//! Seeded random matrices: unitaries, projections, POVMs and perturbations.
//!
//! Everything takes an explicit `Rng` so callers control determinism.

use nalgebra::DMatrix;
use rand::Rng;

use crate::matrix::{ComplexMatrix, C64};

/// Entries with independent standard-normal real and imaginary parts
/// (Box–Muller, so only `rand` is needed).
pub fn random_gaussian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, |_, _| C64::new(normal(rng), normal(rng)))
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Random Hermitian matrix scaled to operator norm `norm`.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, norm: f64, rng: &mut R) -> ComplexMatrix {
    let h = random_gaussian(dim, rng).hermitian_part();
    let n = h.norm();
    if n == 0.0 {
        return h;
    }
    h.scale(norm / n)
}

/// Random matrix (not Hermitian) scaled to operator norm `norm`.
pub fn random_perturbation<R: Rng + ?Sized>(dim: usize, norm: f64, rng: &mut R) -> ComplexMatrix {
    let g = random_gaussian(dim, rng);
    let n = g.norm();
    g.scale(norm / n)
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of
/// `R`'s diagonal pushed back into `Q`.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let g = random_gaussian(dim, rng).into_matrix();
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    ComplexMatrix::try_from_matrix(q).expect("QR of a finite matrix is finite")
}

/// Random orthogonal projection of the given rank.
pub fn random_projection<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> ComplexMatrix {
    let u = random_unitary(dim, rng);
    let diag: Vec<f64> = (0..dim).map(|i| if i < rank { 1.0 } else { 0.0 }).collect();
    (&(&u * &ComplexMatrix::from_diagonal(&diag)) * &u.adjoint()).hermitian_part()
}

/// Random projective measurement with `k` outcomes: the eigenbasis of a
/// random unitary is split into `k` consecutive blocks of random sizes.
/// Outcomes may be the zero projection.
pub fn random_pvm<R: Rng + ?Sized>(dim: usize, k: usize, rng: &mut R) -> Vec<ComplexMatrix> {
    let u = random_unitary(dim, rng);
    let labels: Vec<usize> = (0..dim).map(|_| rng.gen_range(0..k)).collect();
    (0..k)
        .map(|a| {
            let diag: Vec<f64> = labels
                .iter()
                .map(|&l| if l == a { 1.0 } else { 0.0 })
                .collect();
            (&(&u * &ComplexMatrix::from_diagonal(&diag)) * &u.adjoint()).hermitian_part()
        })
        .collect()
}

/// Random POVM with `k` outcomes: `S^{-1/2} G_a* G_a S^{-1/2}` with
/// `S = Σ G_a* G_a` for Ginibre `G_a`.
pub fn random_povm<R: Rng + ?Sized>(dim: usize, k: usize, rng: &mut R) -> Vec<ComplexMatrix> {
    let positives: Vec<ComplexMatrix> = (0..k)
        .map(|_| {
            let g = random_gaussian(dim, rng);
            (&g.adjoint() * &g).hermitian_part()
        })
        .collect();
    crate::perturbation::renormalize(&positives)
        .expect("sum of Ginibre Gram matrices is invertible")
}

/// Random partial isometry `v` of the given rank, with `v*v = p1` and
/// `vv* = p2` returned alongside.
pub fn random_partial_isometry<R: Rng + ?Sized>(
    dim: usize,
    rank: usize,
    rng: &mut R,
) -> (ComplexMatrix, ComplexMatrix, ComplexMatrix) {
    let u1 = random_unitary(dim, rng);
    let u2 = random_unitary(dim, rng);
    let mut core = DMatrix::<C64>::zeros(dim, dim);
    for i in 0..rank {
        core[(i, i)] = C64::new(1.0, 0.0);
    }
    let core = ComplexMatrix::try_from_matrix(core).expect("finite");
    let v = &(&u2 * &core) * &u1.adjoint();
    let p1 = (&v.adjoint() * &v).hermitian_part();
    let p2 = (&v * &v.adjoint()).hermitian_part();
    (v, p1, p2)
}
