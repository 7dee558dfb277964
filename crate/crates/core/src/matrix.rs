//! Dense complex matrices and the spectral toolkit built on them.
//!
//! Every element of a C*-algebra handled by this crate lives in a full
//! matrix algebra `M_d`, so a [`ComplexMatrix`] is always square. The
//! Hermitian eigensolver, continuous functional calculus, polar unitary and
//! operator norm defined here are the primitives all other modules use.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Thresholds used when a floating-point result must "exactly" satisfy an
/// algebraic identity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    /// Eigenvalue-level threshold: positivity, invertibility, reconstruction.
    pub spectral: f64,
    /// Identity-level threshold: `u*u = 1`, `p = p* = p^2`, `sum A_i = 1`.
    pub algebraic: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            spectral: 1e-10,
            algebraic: 1e-10,
        }
    }
}

impl Tolerance {
    pub fn new(spectral: f64, algebraic: f64) -> Result<Self> {
        for (name, v) in [("spectral", spectral), ("algebraic", algebraic)] {
            if !(v > 0.0 && v < 1e-4) {
                return Err(Error::input(format!(
                    "{name} tolerance must lie in (0, 1e-4), got {v}"
                )));
            }
        }
        Ok(Tolerance {
            spectral,
            algebraic,
        })
    }
}

/// A square complex matrix of dimension at least one.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix{}", self.0)
    }
}

impl ComplexMatrix {
    /// Wraps a nalgebra matrix after checking shape and finiteness.
    pub fn try_from_matrix(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::input(format!(
                "matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() == 0 {
            return Err(Error::input("matrix dimension must be at least 1"));
        }
        let out = ComplexMatrix(m);
        out.check_finite()?;
        Ok(out)
    }

    /// Wraps without validation; callers guarantee a square nonempty shape.
    pub(crate) fn wrap(m: DMatrix<C64>) -> Self {
        debug_assert!(m.nrows() == m.ncols() && m.nrows() > 0);
        ComplexMatrix(m)
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::input(
                "rows must all have length equal to the row count",
            ));
        }
        Self::try_from_matrix(DMatrix::from_fn(dim, dim, |i, j| rows[i][j]))
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        assert!(dim > 0, "matrix dimension must be at least 1");
        ComplexMatrix(DMatrix::from_fn(dim, dim, f))
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_fn(dim, |_, _| ZERO)
    }

    pub fn identity(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be at least 1");
        ComplexMatrix(DMatrix::identity(dim, dim))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self::from_fn(diag.len(), |i, j| {
            if i == j {
                C64::new(diag[i], 0.0)
            } else {
                ZERO
            }
        })
    }

    /// The matrix unit with a single 1 at `(row, col)`.
    pub fn matrix_unit(dim: usize, row: usize, col: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == row && j == col { ONE } else { ZERO })
    }

    /// Rank-one projector onto the span of `v` (normalized internally).
    pub fn projector(v: &[C64]) -> Self {
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        Self::from_fn(v.len(), |i, j| v[i] * v[j].conj() / (norm * norm))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        ComplexMatrix(self.0.adjoint())
    }

    /// `(m + m*) / 2`; exactly Hermitian in floating point.
    pub fn hermitian_part(&self) -> Self {
        let n = self.dim();
        ComplexMatrix(DMatrix::from_fn(n, n, |i, j| {
            (self.0[(i, j)] + self.0[(j, i)].conj()) * 0.5
        }))
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn scale(&self, s: f64) -> Self {
        ComplexMatrix(self.0.map(|c| c * s))
    }

    pub fn scale_complex(&self, s: C64) -> Self {
        ComplexMatrix(self.0.map(|c| c * s))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    fn check_finite(&self) -> Result<()> {
        let n = self.dim();
        for j in 0..n {
            for i in 0..n {
                let c = self.0[(i, j)];
                if !(c.re.is_finite() && c.im.is_finite()) {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(())
    }

    /// Operator norm (largest singular value). Returns NaN for non-finite
    /// input; see [`op_norm`] for the checked variant.
    pub fn norm(&self) -> f64 {
        if !self.is_finite() {
            return f64::NAN;
        }
        if self.dim() == 1 {
            return self.0[(0, 0)].norm();
        }
        self.0
            .singular_values()
            .iter()
            .fold(0.0_f64, |acc, &s| acc.max(s))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest absolute entry; a cheap proxy used for exact-zero checks.
    pub fn max_abs_entry(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |acc, c| acc.max(c.norm()))
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &ComplexMatrix) -> Self {
        ComplexMatrix(self.0.kronecker(&other.0))
    }

    /// Distance from Hermitian: `‖m − m*‖`.
    pub fn hermitian_defect(&self) -> f64 {
        (self - &self.adjoint()).norm()
    }

    pub(crate) fn same_dim(&self, other: &ComplexMatrix) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Add for ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(self.0 + rhs.0)
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        self.0 += &rhs.0;
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl Sub for ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(self.0 - rhs.0)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Mul for ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(self.0 * rhs.0)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues are ascending. Each eigenvector column is rephased so that
/// its first component of modulus above `1e-10` is real and positive.
#[derive(Clone, Debug)]
pub struct HermitianSpectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl HermitianSpectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// Column `i` of the eigenvector matrix.
    pub fn eigenvector(&self, i: usize) -> Vec<C64> {
        self.eigenvectors.0.column(i).iter().copied().collect()
    }

    /// `U · diag(f(λ)) · U*`, symmetrized.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let values: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        self.with_values(&values)
    }

    /// Rebuilds `U · diag(values) · U*` for caller-supplied values.
    pub fn with_values(&self, values: &[f64]) -> ComplexMatrix {
        let u = &self.eigenvectors.0;
        let mut scaled = u.clone();
        for (j, &v) in values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(v);
        }
        ComplexMatrix(scaled * u.adjoint()).hermitian_part()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.with_values(&self.eigenvalues)
    }
}

/// Operator norm with an explicit finiteness check.
pub fn op_norm(m: &ComplexMatrix) -> Result<f64> {
    m.check_finite()?;
    Ok(m.norm())
}

/// Hermitian eigendecomposition. The input is symmetrized as `(m + m*)/2`
/// after checking `‖m − m*‖ ≤ tol.algebraic`.
pub fn hermitian_eig(m: &ComplexMatrix, tol: &Tolerance) -> Result<HermitianSpectrum> {
    m.check_finite()?;
    let defect = m.hermitian_defect();
    if defect > tol.algebraic {
        return Err(Error::precondition(format!(
            "matrix is not Hermitian: ‖m − m*‖ = {defect:e}"
        )));
    }
    Ok(eig_symmetrized(&m.hermitian_part()))
}

/// Eigendecomposition of an exactly Hermitian matrix (no checks).
pub(crate) fn eig_symmetrized(h: &ComplexMatrix) -> HermitianSpectrum {
    let n = h.dim();
    if n == 1 {
        return HermitianSpectrum {
            eigenvalues: vec![h.0[(0, 0)].re],
            eigenvectors: ComplexMatrix::identity(1),
        };
    }
    let eig = SymmetricEigen::new(h.0.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::<C64>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col: DVector<C64> = eig.eigenvectors.column(src).into_owned();
        let norm = col.norm();
        col.unscale_mut(norm);
        if let Some(lead) = col.iter().copied().find(|c| c.norm() > 1e-10) {
            let phase = lead.conj() / lead.norm();
            col.iter_mut().for_each(|c| *c *= phase);
        }
        vectors.set_column(dst, &col);
    }
    HermitianSpectrum {
        eigenvalues,
        eigenvectors: ComplexMatrix(vectors),
    }
}

/// Continuous functional calculus on a Hermitian matrix; `f` is evaluated
/// at the computed eigenvalues only.
pub fn spectral_apply(
    m: &ComplexMatrix,
    f: impl Fn(f64) -> f64,
    tol: &Tolerance,
) -> Result<ComplexMatrix> {
    Ok(hermitian_eig(m, tol)?.apply(f))
}

/// The unitary factor `a (a* a)^{-1/2}` of the polar decomposition.
///
/// When the eigenvalue route leaves a unitarity residual above
/// `tol.algebraic` (ill-conditioned `a`), a few Newton polar steps
/// `u ← (u + u^{-*}) / 2` polish the result.
pub fn polar_unitary(a: &ComplexMatrix, tol: &Tolerance) -> Result<ComplexMatrix> {
    a.check_finite()?;
    let gram = (&a.adjoint() * a).hermitian_part();
    let spec = eig_symmetrized(&gram);
    if spec.min() <= tol.spectral {
        return Err(Error::precondition(format!(
            "a*a is not invertible: smallest eigenvalue {:e}",
            spec.min()
        )));
    }
    let inv_sqrt = spec.apply(|t| 1.0 / t.sqrt());
    let mut u = a * &inv_sqrt;
    let identity = ComplexMatrix::identity(a.dim());
    for _ in 0..8 {
        if (&(&u.adjoint() * &u) - &identity).norm() <= tol.algebraic * 0.1 {
            break;
        }
        let inv = match u.0.clone().try_inverse() {
            Some(inv) => ComplexMatrix(inv),
            None => break,
        };
        u = (&u + &inv.adjoint()).scale(0.5);
    }
    let residual = (&(&u.adjoint() * &u) - &identity).norm();
    if residual > tol.algebraic {
        return Err(Error::precondition(format!(
            "polar factor failed to reach unitarity: residual {residual:e}"
        )));
    }
    Ok(u)
}

/// `ab − ba`.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.same_dim(b)?;
    Ok(&(a * b) - &(b * a))
}

/// Positive part of the Hermitian part of `m`.
pub fn positive_part(m: &ComplexMatrix) -> ComplexMatrix {
    eig_symmetrized(&m.hermitian_part()).apply(|t| t.max(0.0))
}

/// Largest eigenvalue of the Hermitian part.
pub fn max_eigenvalue(m: &ComplexMatrix) -> f64 {
    eig_symmetrized(&m.hermitian_part()).max()
}

/// Smallest eigenvalue of the Hermitian part.
pub fn min_eigenvalue(m: &ComplexMatrix) -> f64 {
    eig_symmetrized(&m.hermitian_part()).min()
}

/// Sum of a nonempty slice of equally sized matrices.
pub(crate) fn sum(ms: &[ComplexMatrix]) -> ComplexMatrix {
    let mut acc = ms[0].clone();
    for m in &ms[1..] {
        acc += m;
    }
    acc
}
