//! Nonlocal games played with (possibly non-commuting) measurement families.
//!
//! Questions and answers are 0-indexed. Correlations use the symmetrized
//! product `A • B = ½(A^{1/2} B A^{1/2} + B^{1/2} A B^{1/2})`, which reduces
//! to `AB` when the two operators commute.

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{commutator, eig_symmetrized, ComplexMatrix, Tolerance, C64};

/// A two-player game with `n` questions and `k` answers per player.
#[derive(Clone, Debug, PartialEq)]
pub struct NonlocalGame {
    n: usize,
    k: usize,
    pi: Vec<BigRational>,
    pi_f64: Vec<f64>,
    win: Vec<bool>,
}

impl NonlocalGame {
    /// Builds a game from an exact question distribution (row-major `n×n`)
    /// and a row-major predicate table indexed `[x][y][a][b]`.
    pub fn new(n: usize, k: usize, pi: Vec<BigRational>, win: Vec<bool>) -> Result<Self> {
        if n == 0 || k == 0 {
            return Err(Error::input("game needs n ≥ 1 and k ≥ 1"));
        }
        if pi.len() != n * n {
            return Err(Error::input(format!(
                "pi must have {} entries, got {}",
                n * n,
                pi.len()
            )));
        }
        if win.len() != n * n * k * k {
            return Err(Error::input(format!(
                "decision table must have {} entries, got {}",
                n * n * k * k,
                win.len()
            )));
        }
        if let Some(i) = pi.iter().position(|p| *p < BigRational::zero()) {
            return Err(Error::input(format!(
                "pi[{}][{}] is negative",
                i / n,
                i % n
            )));
        }
        let pi_f64: Vec<f64> = pi.iter().map(|p| p.to_f64().unwrap_or(f64::NAN)).collect();
        let total: f64 = pi_f64.iter().sum();
        if (total - 1.0).abs().is_nan() || (total - 1.0).abs() > 1e-12 {
            return Err(Error::input(format!("pi sums to {total}, expected 1")));
        }
        Ok(NonlocalGame {
            n,
            k,
            pi,
            pi_f64,
            win,
        })
    }

    /// Builds a game from a floating-point distribution (each entry is taken
    /// as the exact dyadic rational it represents) and a predicate.
    pub fn from_fn(
        n: usize,
        k: usize,
        pi: &[f64],
        predicate: impl Fn(usize, usize, usize, usize) -> bool,
    ) -> Result<Self> {
        let exact = pi
            .iter()
            .map(|&p| {
                BigRational::from_float(p).ok_or_else(|| Error::input("pi entries must be finite"))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut win = Vec::with_capacity(n * n * k * k);
        for x in 0..n {
            for y in 0..n {
                for a in 0..k {
                    for b in 0..k {
                        win.push(predicate(x, y, a, b));
                    }
                }
            }
        }
        Self::new(n, k, exact, win)
    }

    /// CHSH: uniform questions in {0,1}², win iff `a ⊕ b = x ∧ y`.
    pub fn chsh() -> Self {
        Self::from_fn(2, 2, &[0.25; 4], |x, y, a, b| (a ^ b) == (x & y)).expect("valid game")
    }

    /// Uniform questions and a constant predicate.
    pub fn constant(n: usize, k: usize, value: bool) -> Self {
        let exact = BigRational::new(1.into(), ((n * n) as u64).into());
        Self::new(n, k, vec![exact; n * n], vec![value; n * n * k * k]).expect("valid game")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn pi(&self, x: usize, y: usize) -> f64 {
        self.pi_f64[x * self.n + y]
    }

    pub fn pi_exact(&self, x: usize, y: usize) -> &BigRational {
        &self.pi[x * self.n + y]
    }

    pub fn wins(&self, x: usize, y: usize, a: usize, b: usize) -> bool {
        self.win[((x * self.n + y) * self.k + a) * self.k + b]
    }

    /// Number of `(x, y, a, b)` with `D = 1`.
    pub fn winning_tuples(&self) -> usize {
        self.win.iter().filter(|&&w| w).count()
    }

    /// The same game with answers relabelled: `D'(x,y,a,b) = D(x,y,σ(a),τ(b))`.
    pub fn relabel_answers(&self, alice: &[usize], bob: &[usize]) -> Self {
        let mut win = self.win.clone();
        for x in 0..self.n {
            for y in 0..self.n {
                for a in 0..self.k {
                    for b in 0..self.k {
                        win[((x * self.n + y) * self.k + a) * self.k + b] =
                            self.wins(x, y, alice[a], bob[b]);
                    }
                }
            }
        }
        NonlocalGame {
            win,
            ..self.clone()
        }
    }
}

/// One POVM with `k` outcomes per question, all acting on `C^dim`.
#[derive(Clone, Debug)]
pub struct Measurement {
    n: usize,
    k: usize,
    dim: usize,
    ops: Vec<ComplexMatrix>,
}

impl Measurement {
    /// Validates positivity and `Σ_a A^x_a = 1` for every question.
    pub fn new(rows: Vec<Vec<ComplexMatrix>>, tol: &Tolerance) -> Result<Self> {
        let m = Self::from_rows_unchecked(rows)?;
        for x in 0..m.n {
            let residual = crate::perturbation::povm_residual(m.row(x));
            let herm = m
                .row(x)
                .iter()
                .map(ComplexMatrix::hermitian_defect)
                .fold(0.0_f64, f64::max);
            if herm > tol.algebraic || residual > tol.algebraic.max(tol.spectral) {
                return Err(Error::input(format!(
                    "question {x} is not a POVM (residual {:e})",
                    residual.max(herm)
                )));
            }
        }
        Ok(m)
    }

    pub(crate) fn from_rows_unchecked(rows: Vec<Vec<ComplexMatrix>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::input("measurement needs at least one question"));
        }
        let k = rows[0].len();
        if k == 0 || rows.iter().any(|r| r.len() != k) {
            return Err(Error::input(
                "every question needs the same number (≥ 1) of outcomes",
            ));
        }
        let dim = rows[0][0].dim();
        for row in &rows {
            for op in row {
                rows[0][0].same_dim(op)?;
            }
        }
        Ok(Measurement {
            n,
            k,
            dim,
            ops: rows.into_iter().flatten().collect(),
        })
    }

    /// `A^x_a = 1/k` for all `x`, `a`.
    pub fn trivial(n: usize, k: usize, dim: usize) -> Self {
        let op = ComplexMatrix::identity(dim).scale(1.0 / k as f64);
        Measurement {
            n,
            k,
            dim,
            ops: vec![op; n * k],
        }
    }

    /// Dimension-one deterministic measurement answering `answers[x]`.
    pub fn deterministic(answers: &[usize], k: usize) -> Self {
        let ops = answers
            .iter()
            .flat_map(|&ans| {
                (0..k)
                    .map(move |a| ComplexMatrix::from_diagonal(&[if a == ans { 1.0 } else { 0.0 }]))
            })
            .collect();
        Measurement {
            n: answers.len(),
            k,
            dim: 1,
            ops,
        }
    }

    /// Two-outcome projective measurements `(1 ± O_x)/2` from ±1 observables.
    pub fn from_observables(observables: &[ComplexMatrix], tol: &Tolerance) -> Result<Self> {
        let rows = observables
            .iter()
            .map(|o| {
                let id = ComplexMatrix::identity(o.dim());
                vec![(&id + o).scale(0.5), (&id - o).scale(0.5)]
            })
            .collect();
        Self::new(rows, tol)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn op(&self, x: usize, a: usize) -> &ComplexMatrix {
        &self.ops[x * self.k + a]
    }

    pub fn row(&self, x: usize) -> &[ComplexMatrix] {
        &self.ops[x * self.k..(x + 1) * self.k]
    }

    pub fn rows(&self) -> Vec<Vec<ComplexMatrix>> {
        (0..self.n).map(|x| self.row(x).to_vec()).collect()
    }

    /// `A ⊗ 1_{other_dim}`.
    pub fn tensor_left(&self, other_dim: usize) -> Self {
        let id = ComplexMatrix::identity(other_dim);
        self.map_ops(|op| op.kron(&id))
    }

    /// `1_{other_dim} ⊗ A`.
    pub fn tensor_right(&self, other_dim: usize) -> Self {
        let id = ComplexMatrix::identity(other_dim);
        self.map_ops(|op| id.kron(op))
    }

    /// Reorders outcomes: new outcome `a` is old outcome `perm[a]`.
    pub fn permute_answers(&self, perm: &[usize]) -> Self {
        let ops = (0..self.n)
            .flat_map(|x| perm.iter().map(move |&p| (x, p)))
            .map(|(x, p)| self.op(x, p).clone())
            .collect();
        Measurement {
            ops,
            ..self.clone()
        }
    }

    fn map_ops(&self, f: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> Self {
        let ops: Vec<ComplexMatrix> = self.ops.iter().map(f).collect();
        Measurement {
            dim: ops[0].dim(),
            ops,
            ..*self
        }
    }
}

impl Measurement {
    fn sqrt_ops(&self, tol: &Tolerance) -> Result<Vec<ComplexMatrix>> {
        self.ops.iter().map(|op| psd_sqrt(op, tol)).collect()
    }
}

/// A density matrix `ρ`; the state is `T ↦ tr(ρ T)`.
#[derive(Clone, Debug)]
pub struct State {
    rho: ComplexMatrix,
}

impl State {
    pub fn new(rho: ComplexMatrix, tol: &Tolerance) -> Result<Self> {
        if rho.hermitian_defect() > tol.algebraic {
            return Err(Error::input("density matrix is not Hermitian"));
        }
        let rho = rho.hermitian_part();
        let min = crate::matrix::min_eigenvalue(&rho);
        if min < -tol.spectral {
            return Err(Error::input(format!(
                "density matrix has eigenvalue {min:e}"
            )));
        }
        let tr = rho.trace().re;
        if (tr - 1.0).abs() > 1e-12 {
            return Err(Error::input(format!("density matrix has trace {tr}")));
        }
        Ok(State { rho })
    }

    /// `|v⟩⟨v|` for a (normalized internally) nonzero vector.
    pub fn pure(v: &[C64]) -> Self {
        State {
            rho: ComplexMatrix::projector(v),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        State {
            rho: ComplexMatrix::identity(dim).scale(1.0 / dim as f64),
        }
    }

    /// `(1/√d) Σ_i |i⟩|i⟩` on `C^d ⊗ C^d`.
    pub fn maximally_entangled(d: usize) -> Self {
        let mut v = vec![C64::new(0.0, 0.0); d * d];
        for i in 0..d {
            v[i * d + i] = C64::new(1.0, 0.0);
        }
        State::pure(&v)
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    pub fn rho(&self) -> &ComplexMatrix {
        &self.rho
    }

    /// `tr(ρ T)`, real part.
    pub fn expectation(&self, t: &ComplexMatrix) -> f64 {
        let n = self.dim();
        let (r, m) = (self.rho.as_matrix(), t.as_matrix());
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += r[(i, j)] * m[(j, i)];
            }
        }
        acc.re
    }
}

#[derive(Clone, Debug)]
pub struct Strategy {
    pub alice: Measurement,
    pub bob: Measurement,
    pub state: State,
}

impl Strategy {
    pub fn new(alice: Measurement, bob: Measurement, state: State) -> Result<Self> {
        if alice.dim() != bob.dim() || alice.dim() != state.dim() {
            return Err(Error::DimensionMismatch {
                expected: alice.dim(),
                found: if alice.dim() != bob.dim() {
                    bob.dim()
                } else {
                    state.dim()
                },
            });
        }
        if alice.n() != bob.n() || alice.k() != bob.k() {
            return Err(Error::input("players' measurements have different (n, k)"));
        }
        Ok(Strategy { alice, bob, state })
    }

    pub fn dim(&self) -> usize {
        self.state.dim()
    }
}

/// Square root of a positive semidefinite matrix; eigenvalues down to
/// `−tol.spectral` are clipped to zero, anything more negative is an error.
pub fn psd_sqrt(a: &ComplexMatrix, tol: &Tolerance) -> Result<ComplexMatrix> {
    if a.hermitian_defect() > tol.algebraic {
        return Err(Error::input("operator is not Hermitian"));
    }
    let spec = eig_symmetrized(&a.hermitian_part());
    if spec.min() < -tol.spectral {
        return Err(Error::input(format!(
            "operator is not positive: eigenvalue {:e}",
            spec.min()
        )));
    }
    Ok(spec.apply(|t| t.max(0.0).sqrt()))
}

fn bullet_from_roots(
    a: &ComplexMatrix,
    root_a: &ComplexMatrix,
    b: &ComplexMatrix,
    root_b: &ComplexMatrix,
) -> ComplexMatrix {
    let left = &(root_a * b) * root_a;
    let right = &(root_b * a) * root_b;
    (&left + &right).scale(0.5).hermitian_part()
}

/// `A • B = ½(A^{1/2} B A^{1/2} + B^{1/2} A B^{1/2})`.
pub fn bullet(a: &ComplexMatrix, b: &ComplexMatrix, tol: &Tolerance) -> Result<ComplexMatrix> {
    a.same_dim(b)?;
    let ra = psd_sqrt(a, tol)?;
    let rb = psd_sqrt(b, tol)?;
    Ok(bullet_from_roots(a, &ra, b, &rb))
}

fn check_game_shapes(g: &NonlocalGame, alice: &Measurement, bob: &Measurement) -> Result<()> {
    for (who, m) in [("alice", alice), ("bob", bob)] {
        if m.n() != g.n() || m.k() != g.k() {
            return Err(Error::input(format!(
                "{who}'s measurement has (n, k) = ({}, {}), game has ({}, {})",
                m.n(),
                m.k(),
                g.n(),
                g.k()
            )));
        }
    }
    if alice.dim() != bob.dim() {
        return Err(Error::DimensionMismatch {
            expected: alice.dim(),
            found: bob.dim(),
        });
    }
    Ok(())
}

fn check_index(what: &str, i: usize, bound: usize) -> Result<()> {
    if i >= bound {
        return Err(Error::input(format!(
            "{what} index {i} out of range 0..{bound}"
        )));
    }
    Ok(())
}

/// `p_σ(a, b | x, y) = φ(A^x_a • B^y_b)`.
pub fn correlation(
    sigma: &Strategy,
    x: usize,
    y: usize,
    a: usize,
    b: usize,
    tol: &Tolerance,
) -> Result<f64> {
    check_index("question x", x, sigma.alice.n())?;
    check_index("question y", y, sigma.bob.n())?;
    check_index("answer a", a, sigma.alice.k())?;
    check_index("answer b", b, sigma.bob.k())?;
    let p = sigma
        .state
        .expectation(&bullet(sigma.alice.op(x, a), sigma.bob.op(y, b), tol)?);
    if !(-1e-9..=1.0 + 1e-9).contains(&p) {
        return Err(Error::precondition(format!(
            "correlation p({a},{b}|{x},{y}) = {p} lies outside [0, 1]"
        )));
    }
    Ok(p)
}

/// `𝔊(A, B) = Σ_{x,y} π(x,y) Σ_{a,b} D(x,y,a,b) A^x_a • B^y_b`.
///
/// Question pairs are evaluated in parallel and summed in a fixed order, so
/// the result does not depend on the thread count.
pub fn game_element(
    g: &NonlocalGame,
    alice: &Measurement,
    bob: &Measurement,
    tol: &Tolerance,
) -> Result<ComplexMatrix> {
    check_game_shapes(g, alice, bob)?;
    let roots_a = alice.sqrt_ops(tol)?;
    let roots_b = bob.sqrt_ops(tol)?;
    let (n, k) = (g.n(), g.k());
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|x| (0..n).map(move |y| (x, y)))
        .filter(|&(x, y)| g.pi(x, y) != 0.0)
        .collect();
    let terms: Vec<Option<ComplexMatrix>> = pairs
        .par_iter()
        .map(|&(x, y)| {
            let mut acc: Option<ComplexMatrix> = None;
            for a in 0..k {
                for b in 0..k {
                    if !g.wins(x, y, a, b) {
                        continue;
                    }
                    let term = bullet_from_roots(
                        alice.op(x, a),
                        &roots_a[x * k + a],
                        bob.op(y, b),
                        &roots_b[y * k + b],
                    );
                    acc = Some(match acc {
                        Some(s) => &s + &term,
                        None => term,
                    });
                }
            }
            acc.map(|s| s.scale(g.pi(x, y)))
        })
        .collect();
    let mut total = ComplexMatrix::zeros(alice.dim());
    for t in terms.iter().flatten() {
        total += t;
    }
    Ok(total.hermitian_part())
}

fn check_strategy(g: &NonlocalGame, sigma: &Strategy) -> Result<()> {
    check_game_shapes(g, &sigma.alice, &sigma.bob)?;
    if sigma.state.dim() != sigma.alice.dim() {
        return Err(Error::DimensionMismatch {
            expected: sigma.alice.dim(),
            found: sigma.state.dim(),
        });
    }
    Ok(())
}

/// `val(𝔊, σ) = φ(𝔊(A, B))`.
pub fn game_value(g: &NonlocalGame, sigma: &Strategy, tol: &Tolerance) -> Result<f64> {
    check_strategy(g, sigma)?;
    Ok(sigma
        .state
        .expectation(&game_element(g, &sigma.alice, &sigma.bob, tol)?))
}

/// The double-sum form `Σ π Σ D p_σ`, evaluated correlation by correlation.
pub fn game_value_by_correlations(
    g: &NonlocalGame,
    sigma: &Strategy,
    tol: &Tolerance,
) -> Result<f64> {
    check_strategy(g, sigma)?;
    let mut total = 0.0;
    for x in 0..g.n() {
        for y in 0..g.n() {
            let mut inner = 0.0;
            for a in 0..g.k() {
                for b in 0..g.k() {
                    if g.wins(x, y, a, b) {
                        inner += correlation(sigma, x, y, a, b, tol)?;
                    }
                }
            }
            total += g.pi(x, y) * inner;
        }
    }
    Ok(total)
}

/// Optimal value over states for fixed measurements, with the maximizing
/// state.
#[derive(Clone, Debug)]
pub struct BestValue {
    /// Largest eigenvalue of `𝔊(A, B)`.
    pub value: f64,
    /// Rank-one density matrix of the top eigenvector.
    pub state: State,
    /// `‖𝔊 v − λ v‖` for the returned eigenpair.
    pub residual: f64,
}

pub fn best_value(
    g: &NonlocalGame,
    alice: &Measurement,
    bob: &Measurement,
    tol: &Tolerance,
) -> Result<BestValue> {
    let element = game_element(g, alice, bob, tol)?;
    Ok(top_eigenpair(&element))
}

pub(crate) fn top_eigenpair(element: &ComplexMatrix) -> BestValue {
    let spec = eig_symmetrized(element);
    let top = spec.dim() - 1;
    let v = spec.eigenvector(top);
    let value = spec.eigenvalues[top];
    let m = element.as_matrix();
    let n = v.len();
    let mut residual = 0.0;
    for i in 0..n {
        let mut row = C64::new(0.0, 0.0);
        for j in 0..n {
            row += m[(i, j)] * v[j];
        }
        residual += (row - v[i] * value).norm_sqr();
    }
    BestValue {
        value,
        state: State::pure(&v),
        residual: residual.sqrt(),
    }
}

/// `Σ_{a,b} ‖[A^x_a, B^y_b]‖`.
pub fn commutator_defect(
    alice: &Measurement,
    bob: &Measurement,
    x: usize,
    y: usize,
) -> Result<f64> {
    check_index("question x", x, alice.n())?;
    check_index("question y", y, bob.n())?;
    let mut total = 0.0;
    for a in 0..alice.k() {
        for b in 0..bob.k() {
            total += commutator(alice.op(x, a), bob.op(y, b))?.norm();
        }
    }
    Ok(total)
}

/// Outcome of [`is_delta_op_commuting`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CommutingCheck {
    pub holds: bool,
    /// The question pair with the largest commutator defect.
    pub worst: (usize, usize),
    pub defect: f64,
}

/// Whether `Σ_{a,b} ‖[A^x_a, B^y_b]‖ < δ` for every question pair.
pub fn is_delta_op_commuting(
    alice: &Measurement,
    bob: &Measurement,
    delta: f64,
) -> Result<CommutingCheck> {
    if alice.dim() != bob.dim() {
        return Err(Error::DimensionMismatch {
            expected: alice.dim(),
            found: bob.dim(),
        });
    }
    let mut worst = (0, 0);
    let mut defect = f64::NEG_INFINITY;
    for x in 0..alice.n() {
        for y in 0..bob.n() {
            let d = commutator_defect(alice, bob, x, y)?;
            if d > defect {
                defect = d;
                worst = (x, y);
            }
        }
    }
    Ok(CommutingCheck {
        holds: defect < delta,
        worst,
        defect,
    })
}

/// The optimal CHSH strategy in the tensor model on `C² ⊗ C²`: Alice
/// measures `Z` and `X`, Bob measures `(Z ± X)/√2`, shared state `|Φ⁺⟩`.
pub fn chsh_tensor_strategy() -> Strategy {
    chsh_tensor_strategy_with_angles(
        [0.0, std::f64::consts::FRAC_PI_2],
        [std::f64::consts::FRAC_PI_4, -std::f64::consts::FRAC_PI_4],
    )
}

/// CHSH-type strategy with observables `cos θ Z + sin θ X` for the given
/// Bloch angles, in the tensor model with `|Φ⁺⟩`.
pub fn chsh_tensor_strategy_with_angles(alice: [f64; 2], bob: [f64; 2]) -> Strategy {
    let tol = Tolerance::default();
    let obs = |theta: f64| {
        ComplexMatrix::from_real_rows(&[&[theta.cos(), theta.sin()], &[theta.sin(), -theta.cos()]])
            .expect("finite")
    };
    let a = Measurement::from_observables(&[obs(alice[0]), obs(alice[1])], &tol)
        .expect("reflections give projective measurements");
    let b = Measurement::from_observables(&[obs(bob[0]), obs(bob[1])], &tol)
        .expect("reflections give projective measurements");
    Strategy::new(
        a.tensor_left(2),
        b.tensor_right(2),
        State::maximally_entangled(2),
    )
    .expect("dimensions agree")
}
