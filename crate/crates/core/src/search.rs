//! Semidecision over finite-dimensional strategies, a see-saw optimizer, and
//! exact classical values.

use std::time::Instant;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::games::{
    best_value, commutator_defect, game_element, game_value, is_delta_op_commuting, psd_sqrt,
    top_eigenpair, Measurement, NonlocalGame, State, Strategy,
};
use crate::matrix::{eig_symmetrized, ComplexMatrix, Tolerance, C64};
use crate::perturbation::{povm_residual, renormalize, round_to_povm};

/// Certified bound on the eigenvalue error of [`semidecide_membership`].
pub const EIGEN_ERROR: f64 = 1.0 / 128.0;

const CLASSICAL_LIMIT: u128 = 1 << 24;
const CHUNK: usize = 64;

/// Optimal deterministic strategy and its exact winning probability.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalValue {
    pub value: BigRational,
    /// Alice's answer to each question.
    pub alice: Vec<usize>,
    /// Bob's answer to each question.
    pub bob: Vec<usize>,
}

/// Exact classical value: the maximum of `Σ π(x,y) D(x,y,f(x),g(y))` over
/// deterministic answer functions.
///
/// Alice's `kⁿ` functions are enumerated; for each, Bob's best response is
/// chosen question by question.
pub fn classical_value(g: &NonlocalGame) -> Result<ClassicalValue> {
    let (n, k) = (g.n(), g.k());
    let required = (k as u128).checked_pow(2 * n as u32).unwrap_or(u128::MAX);
    if required > CLASSICAL_LIMIT {
        return Err(Error::precondition(format!(
            "classical enumeration needs k^(2n) = {required} strategy pairs, limit is 2^24"
        )));
    }
    let denom = (0..n)
        .flat_map(|x| (0..n).map(move |y| (x, y)))
        .fold(BigInt::one(), |acc, (x, y)| {
            acc.lcm(g.pi_exact(x, y).denom())
        });
    let weight: Vec<BigInt> = (0..n * n)
        .map(|i| {
            let p = g.pi_exact(i / n, i % n);
            p.numer() * (&denom / p.denom())
        })
        .collect();

    let mut best: Option<(BigInt, Vec<usize>, Vec<usize>)> = None;
    let mut alice = vec![0usize; n];
    for _ in 0..k.pow(n as u32) {
        let mut total = BigInt::zero();
        let mut bob = vec![0usize; n];
        for y in 0..n {
            let mut best_b: Option<(BigInt, usize)> = None;
            for b in 0..k {
                let mut s = BigInt::zero();
                for x in 0..n {
                    if g.wins(x, y, alice[x], b) {
                        s += &weight[x * n + y];
                    }
                }
                if best_b.as_ref().is_none_or(|(v, _)| s > *v) {
                    best_b = Some((s, b));
                }
            }
            let (s, b) = best_b.expect("k ≥ 1");
            total += s;
            bob[y] = b;
        }
        if best.as_ref().is_none_or(|(v, _, _)| total > *v) {
            best = Some((total, alice.clone(), bob));
        }
        // Next function in lexicographic order, last question fastest.
        for x in (0..n).rev() {
            alice[x] += 1;
            if alice[x] < k {
                break;
            }
            alice[x] = 0;
        }
    }
    let (num, alice, bob) = best.expect("at least one strategy");
    Ok(ClassicalValue {
        value: BigRational::new(num, denom),
        alice,
        bob,
    })
}

/// The dimension-one strategy playing fixed answers.
pub fn deterministic_strategy(alice: &[usize], bob: &[usize], k: usize) -> Strategy {
    Strategy::new(
        Measurement::deterministic(alice, k),
        Measurement::deterministic(bob, k),
        State::maximally_mixed(1),
    )
    .expect("dimension one throughout")
}

type Encoder = dyn Fn(&[bool]) -> NonlocalGame + Send + Sync;
type DeltaFn = dyn Fn(usize) -> f64 + Send + Sync;

/// A map from bit strings to games together with the commutation tolerance
/// `δ(|z|)`.
pub struct GameFamily {
    encode: Box<Encoder>,
    delta: Box<DeltaFn>,
}

impl GameFamily {
    pub fn new(
        encode: impl Fn(&[bool]) -> NonlocalGame + Send + Sync + 'static,
        delta: impl Fn(usize) -> f64 + Send + Sync + 'static,
    ) -> Self {
        GameFamily {
            encode: Box::new(encode),
            delta: Box::new(delta),
        }
    }

    /// Every input maps to the same game with the same tolerance.
    pub fn constant(game: NonlocalGame, delta: f64) -> Self {
        Self::new(move |_| game.clone(), move |_| delta)
    }

    pub fn game(&self, z: &[bool]) -> NonlocalGame {
        (self.encode)(z)
    }

    pub fn delta(&self, len: usize) -> Result<f64> {
        let d = (self.delta)(len);
        if !(0.0..=1.0).contains(&d) {
            return Err(Error::input(format!("δ({len}) = {d} is outside [0, 1]")));
        }
        Ok(d)
    }
}

impl std::fmt::Debug for GameFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GameFamily").finish_non_exhaustive()
    }
}

/// Parses a string of `0`/`1` characters.
pub fn parse_bits(s: &str) -> Result<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(Error::input(format!("'{c}' is not a bit"))),
        })
        .collect()
}

/// Source of candidate measurement pairs.
///
/// Raw candidates are numbered. When `dims` contains 1, the first `k^{2n}`
/// are the deterministic dimension-one strategies; the planted pairs come
/// next; everything after is seeded random, sweeping `dims` round-robin with
/// entries on the grid `ℤ[i]/grid_denominator`. Candidate `i` depends only on
/// `(seed, i)`.
#[derive(Clone, Debug)]
pub struct CandidateStream {
    pub dims: Vec<usize>,
    pub grid_denominator: u32,
    pub seed: u64,
    pub budget: usize,
    pub planted: Vec<(Measurement, Measurement)>,
}

impl CandidateStream {
    pub fn new(dims: Vec<usize>, grid_denominator: u32, seed: u64, budget: usize) -> Result<Self> {
        let s = CandidateStream {
            dims,
            grid_denominator,
            seed,
            budget,
            planted: Vec::new(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_planted(mut self, alice: Measurement, bob: Measurement) -> Self {
        self.planted.push((alice, bob));
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(Error::input(
                "dims must be a nonempty list of positive dimensions",
            ));
        }
        if self.grid_denominator < 2 || !self.grid_denominator.is_power_of_two() {
            return Err(Error::input("grid denominator must be a power of two ≥ 2"));
        }
        if self.budget == 0 {
            return Err(Error::input("budget must be at least 1"));
        }
        Ok(())
    }

    fn prefix_len(&self, g: &NonlocalGame) -> usize {
        if !self.dims.contains(&1) {
            return 0;
        }
        (g.k() as u128)
            .checked_pow(2 * g.n() as u32)
            .map_or(usize::MAX, |v| v.min(usize::MAX as u128) as usize)
    }

    /// Raw candidate `i`, before filtering. `None` when generation degenerates.
    pub fn raw(&self, g: &NonlocalGame, i: usize) -> Option<(Measurement, Measurement)> {
        let prefix = self.prefix_len(g);
        if i < prefix {
            let (n, k) = (g.n(), g.k());
            let mut code = i;
            let mut answers = vec![0usize; 2 * n];
            for slot in answers.iter_mut().rev() {
                *slot = code % k;
                code /= k;
            }
            return Some((
                Measurement::deterministic(&answers[..n], k),
                Measurement::deterministic(&answers[n..], k),
            ));
        }
        let j = i - prefix;
        if j < self.planted.len() {
            return Some(self.planted[j].clone());
        }
        let j = j - self.planted.len();
        let dim = self.dims[j % self.dims.len()];
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(i as u64);
        self.random_pair(g, dim, &mut rng)
    }

    fn random_pair(
        &self,
        g: &NonlocalGame,
        dim: usize,
        rng: &mut ChaCha8Rng,
    ) -> Option<(Measurement, Measurement)> {
        let (n, k) = (g.n(), g.k());
        let split = (2..dim).find(|d| dim.is_multiple_of(*d) && dim / d >= 2);
        let tensor = split.is_some() && rng.gen_bool(0.5);
        let player = |d: usize, rng: &mut ChaCha8Rng| -> Option<Measurement> {
            let projective = rng.gen_bool(0.5);
            let rows = (0..n)
                .map(|_| {
                    if projective {
                        Some(self.dyadic_pvm(d, k, rng))
                    } else {
                        self.dyadic_povm(d, k, rng)
                    }
                })
                .collect::<Option<Vec<_>>>()?;
            Measurement::from_rows_unchecked(rows).ok()
        };
        if tensor {
            let d1 = split.expect("checked");
            let d2 = dim / d1;
            let a = player(d1, rng)?.tensor_left(d2);
            let b = player(d2, rng)?.tensor_right(d1);
            Some((a, b))
        } else {
            let a = player(dim, rng)?;
            let b = player(dim, rng)?;
            Some((a, b))
        }
    }

    fn dyadic_matrix(&self, dim: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
        let den = self.grid_denominator as i64;
        ComplexMatrix::from_fn(dim, |_, _| {
            C64::new(
                rng.gen_range(-den..=den) as f64 / den as f64,
                rng.gen_range(-den..=den) as f64 / den as f64,
            )
        })
    }

    fn dyadic_povm(
        &self,
        dim: usize,
        k: usize,
        rng: &mut ChaCha8Rng,
    ) -> Option<Vec<ComplexMatrix>> {
        let positives: Vec<ComplexMatrix> = (0..k)
            .map(|_| {
                let m = self.dyadic_matrix(dim, rng);
                (&m.adjoint() * &m).hermitian_part()
            })
            .collect();
        renormalize(&positives)
    }

    fn dyadic_pvm(&self, dim: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<ComplexMatrix> {
        let spec = eig_symmetrized(&self.dyadic_matrix(dim, rng).hermitian_part());
        let labels: Vec<usize> = (0..dim).map(|_| rng.gen_range(0..k)).collect();
        (0..k)
            .map(|a| {
                let mask: Vec<f64> = labels
                    .iter()
                    .map(|&l| if l == a { 1.0 } else { 0.0 })
                    .collect();
                spec.with_values(&mask)
            })
            .collect()
    }
}

/// A candidate that passed the filters, with its raw index.
#[derive(Clone, Debug)]
pub struct Candidate {
    pub index: usize,
    pub alice: Measurement,
    pub bob: Measurement,
}

fn passes_filters(
    alice: &Measurement,
    bob: &Measurement,
    delta: f64,
    tol: &Tolerance,
) -> Result<bool> {
    let exact = (0..alice.n()).all(|x| {
        povm_residual(alice.row(x)) <= tol.algebraic && povm_residual(bob.row(x)) <= tol.algebraic
    });
    Ok(exact && is_delta_op_commuting(alice, bob, delta)?.holds)
}

fn filtered(
    g: &NonlocalGame,
    stream: &CandidateStream,
    delta: f64,
    tol: &Tolerance,
    i: usize,
) -> Option<Candidate> {
    let (alice, bob) = stream.raw(g, i)?;
    if alice.n() != g.n() || alice.k() != g.k() || bob.n() != g.n() || bob.k() != g.k() {
        return None;
    }
    match passes_filters(&alice, &bob, delta, tol) {
        Ok(true) => Some(Candidate {
            index: i,
            alice,
            bob,
        }),
        _ => None,
    }
}

/// Exact, `δ`-op-almost commuting candidate pairs, in raw-index order,
/// among the first `stream.budget` raw candidates.
pub fn enumerate_candidates<'a>(
    g: &'a NonlocalGame,
    stream: &'a CandidateStream,
    delta: f64,
    tol: &'a Tolerance,
) -> Result<impl Iterator<Item = Candidate> + 'a> {
    stream.validate()?;
    Ok((0..stream.budget).filter_map(move |i| filtered(g, stream, delta, tol, i)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Accepted,
    BudgetExhausted,
}

impl Outcome {
    pub fn name(self) -> &'static str {
        match self {
            Outcome::Accepted => "accepted",
            Outcome::BudgetExhausted => "budget_exhausted",
        }
    }
}

/// An accepted strategy together with its certificate.
#[derive(Clone, Debug)]
pub struct Witness {
    pub strategy: Strategy,
    /// `λ_max(𝔊(A, B)) − η`, strictly above 1/2.
    pub certified_value: f64,
    /// Largest per-question-pair commutator defect.
    pub defect: f64,
    pub candidate_index: usize,
}

#[derive(Clone, Debug)]
pub struct SearchVerdict {
    pub outcome: Outcome,
    pub witness: Option<Witness>,
    /// Raw candidates consumed, including the accepting one.
    pub candidates_tried: usize,
    pub delta: f64,
    pub wall_time: f64,
}

fn evaluate(g: &NonlocalGame, c: Candidate, tol: &Tolerance) -> Option<Witness> {
    let best = best_value(g, &c.alice, &c.bob, tol).ok()?;
    if best.residual > EIGEN_ERROR {
        return None;
    }
    let certified_value = best.value - EIGEN_ERROR;
    if certified_value <= 0.5 {
        return None;
    }
    let defect = is_delta_op_commuting(&c.alice, &c.bob, f64::INFINITY)
        .ok()?
        .defect;
    let strategy = Strategy::new(c.alice, c.bob, best.state).ok()?;
    Some(Witness {
        strategy,
        certified_value,
        defect,
        candidate_index: c.index,
    })
}

/// Searches the stream for a `δ(|z|)`-op-almost commuting strategy whose
/// optimal value, less the certified eigenvalue error, exceeds 1/2.
///
/// Candidates are evaluated in parallel chunks; the verdict is the first
/// accepting raw index, so it does not depend on the worker count.
pub fn semidecide_membership(
    family: &GameFamily,
    z: &[bool],
    stream: &CandidateStream,
    tol: &Tolerance,
) -> Result<SearchVerdict> {
    let start = Instant::now();
    stream.validate()?;
    let delta = family.delta(z.len())?;
    let g = family.game(z);
    let mut next = 0;
    while next < stream.budget {
        let end = (next + CHUNK).min(stream.budget);
        let hits: Vec<Option<Witness>> = (next..end)
            .into_par_iter()
            .map(|i| filtered(&g, stream, delta, tol, i).and_then(|c| evaluate(&g, c, tol)))
            .collect();
        if let Some(w) = hits.into_iter().flatten().next() {
            return Ok(SearchVerdict {
                outcome: Outcome::Accepted,
                candidates_tried: w.candidate_index + 1,
                witness: Some(w),
                delta,
                wall_time: start.elapsed().as_secs_f64(),
            });
        }
        next = end;
    }
    Ok(SearchVerdict {
        outcome: Outcome::BudgetExhausted,
        witness: None,
        candidates_tried: stream.budget,
        delta,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Independent re-check of an accepted witness: exact POVMs within `1e−10`,
/// positivity, `δ`-op-almost commutation, and `game_value > 1/2` under the
/// witness state.
pub fn reverify_witness(
    g: &NonlocalGame,
    delta: f64,
    witness: &Witness,
    tol: &Tolerance,
) -> Result<bool> {
    let s = &witness.strategy;
    for m in [&s.alice, &s.bob] {
        for x in 0..m.n() {
            if povm_residual(m.row(x)) > 1e-10 {
                return Ok(false);
            }
            if m.row(x)
                .iter()
                .any(|op| crate::matrix::min_eigenvalue(op) < -1e-10)
            {
                return Ok(false);
            }
        }
    }
    if !is_delta_op_commuting(&s.alice, &s.bob, delta)?.holds {
        return Ok(false);
    }
    Ok(game_value(g, s, tol)? > 0.5)
}

/// Settings for [`seesaw_optimize`].
#[derive(Clone, Debug)]
pub struct SeesawConfig {
    pub dim: usize,
    pub delta: f64,
    /// Weight of the commutator penalty.
    pub mu: f64,
    pub iters: usize,
    pub seed: u64,
    /// Starting measurements; random POVMs when absent.
    pub init: Option<(Measurement, Measurement)>,
}

impl SeesawConfig {
    pub fn new(dim: usize, delta: f64, iters: usize, seed: u64) -> Self {
        SeesawConfig {
            dim,
            delta,
            mu: 10.0,
            iters,
            seed,
            init: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SeesawResult {
    /// Best strategy found, with its optimal state.
    pub strategy: Strategy,
    /// Objective after each iteration, starting with the initial point.
    pub trace: Vec<f64>,
    pub objective: f64,
    /// `game_value` of `strategy`.
    pub value: f64,
    /// Largest per-question-pair commutator defect of `strategy`.
    pub defect: f64,
}

struct Point {
    alice: Measurement,
    bob: Measurement,
    objective: f64,
    state: State,
}

fn penalty(alice: &Measurement, bob: &Measurement, delta: f64) -> Result<f64> {
    let mut total = 0.0;
    for x in 0..alice.n() {
        for y in 0..bob.n() {
            total += (commutator_defect(alice, bob, x, y)? - delta).max(0.0);
        }
    }
    Ok(total)
}

fn evaluate_point(
    g: &NonlocalGame,
    alice: Measurement,
    bob: Measurement,
    cfg: &SeesawConfig,
    tol: &Tolerance,
) -> Result<Point> {
    let best = best_value(g, &alice, &bob, tol)?;
    let objective = best.value - cfg.mu * penalty(&alice, &bob, cfg.delta)?;
    Ok(Point {
        alice,
        bob,
        objective,
        state: best.state,
    })
}

/// Gradient of `tr(ρ 𝔊(A, B))` with respect to each of `mine`'s operators,
/// where `mine` plays against `theirs` (`mine_is_alice` fixes which index of
/// the game is `mine`'s question).
fn gradient(
    g: &NonlocalGame,
    mine: &Measurement,
    theirs: &Measurement,
    mine_is_alice: bool,
    rho: &ComplexMatrix,
    tol: &Tolerance,
) -> Result<Vec<Vec<ComplexMatrix>>> {
    let (n, k) = (g.n(), g.k());
    let dim = mine.dim();
    let their_roots: Vec<ComplexMatrix> = (0..n)
        .flat_map(|y| (0..k).map(move |b| (y, b)))
        .map(|(y, b)| psd_sqrt(theirs.op(y, b), tol))
        .collect::<Result<_>>()?;
    let mut grads = Vec::with_capacity(n);
    for x in 0..n {
        let mut row = Vec::with_capacity(k);
        for a in 0..k {
            let op = mine.op(x, a);
            let spec = eig_symmetrized(op);
            let roots: Vec<f64> = spec.eigenvalues.iter().map(|l| l.max(0.0).sqrt()).collect();
            let s = spec.apply(|t| t.max(0.0).sqrt());
            // Gradient with respect to √A, and the linear part in A.
            let mut m_sqrt = ComplexMatrix::zeros(dim);
            let mut linear = ComplexMatrix::zeros(dim);
            for y in 0..n {
                for b in 0..k {
                    let (qx, qy, aa, bb) = if mine_is_alice {
                        (x, y, a, b)
                    } else {
                        (y, x, b, a)
                    };
                    if !g.wins(qx, qy, aa, bb) || g.pi(qx, qy) == 0.0 {
                        continue;
                    }
                    let w = 0.5 * g.pi(qx, qy);
                    let other = theirs.op(y, b);
                    let root = &their_roots[y * k + b];
                    let bs_rho = &(other * &s) * rho;
                    let rho_sb = &(rho * &s) * other;
                    m_sqrt += &(&bs_rho + &rho_sb).scale(w);
                    linear += &(&(root * rho) * root).scale(w);
                }
            }
            // Chain rule through the square root (Daleckii–Krein).
            let u = spec.eigenvectors.as_matrix();
            let inner = u.adjoint() * m_sqrt.hermitian_part().as_matrix() * u;
            let kernel = nalgebra::DMatrix::from_fn(dim, dim, |i, j| {
                inner[(i, j)] / (roots[i] + roots[j]).max(1e-3)
            });
            let back = ComplexMatrix::wrap(u * kernel * u.adjoint());
            row.push((&back + &linear).hermitian_part());
        }
        // Keep Σ_a A^x_a = 1 to first order.
        let mean = crate::matrix::sum(&row).scale(1.0 / k as f64);
        grads.push(row.iter().map(|gr| gr - &mean).collect());
    }
    Ok(grads)
}

fn step(
    mine: &Measurement,
    grads: &[Vec<ComplexMatrix>],
    t: f64,
    tol: &Tolerance,
) -> Option<Measurement> {
    let rows = (0..mine.n())
        .map(|x| {
            let moved: Vec<ComplexMatrix> = mine
                .row(x)
                .iter()
                .zip(&grads[x])
                .map(|(op, gr)| op + &gr.scale(t))
                .collect();
            round_to_povm(&moved, tol).ok().map(|(ops, _)| ops)
        })
        .collect::<Option<Vec<_>>>()?;
    Measurement::from_rows_unchecked(rows).ok()
}

fn improve(
    g: &NonlocalGame,
    current: Point,
    alice_turn: bool,
    cfg: &SeesawConfig,
    tol: &Tolerance,
) -> Result<Point> {
    let (mine, theirs) = if alice_turn {
        (&current.alice, &current.bob)
    } else {
        (&current.bob, &current.alice)
    };
    let grads = gradient(g, mine, theirs, alice_turn, current.state.rho(), tol)?;
    let scale = grads
        .iter()
        .flatten()
        .map(ComplexMatrix::norm)
        .fold(0.0_f64, f64::max);
    if scale.is_nan() || scale <= 1e-14 {
        return Ok(current);
    }
    let mut t = 0.5 / scale;
    for _ in 0..16 {
        if let Some(moved) = step(mine, &grads, t, tol) {
            let (a, b) = if alice_turn {
                (moved, current.bob.clone())
            } else {
                (current.alice.clone(), moved)
            };
            let candidate = evaluate_point(g, a, b, cfg, tol)?;
            if candidate.objective >= current.objective {
                return Ok(candidate);
            }
        }
        t *= 0.5;
    }
    Ok(current)
}

/// Alternating ascent on `value − μ·Σ_{x,y} max(0, defect(x,y) − δ)`.
///
/// Each iteration takes the optimal state for the current measurements, then
/// a line-searched gradient step for Alice and then for Bob, retracted onto
/// POVMs by [`round_to_povm`]. Steps that lower the objective are rejected,
/// so the trace never decreases.
pub fn seesaw_optimize(
    g: &NonlocalGame,
    cfg: &SeesawConfig,
    tol: &Tolerance,
) -> Result<SeesawResult> {
    if cfg.dim == 0
        || cfg.iters == 0
        || cfg.mu.is_nan()
        || cfg.mu < 0.0
        || cfg.delta.is_nan()
        || cfg.delta < 0.0
    {
        return Err(Error::input(
            "see-saw needs dim ≥ 1, iters ≥ 1, μ ≥ 0 and δ ≥ 0",
        ));
    }
    let (alice, bob) = match &cfg.init {
        Some((a, b)) => {
            if a.dim() != cfg.dim || b.dim() != cfg.dim {
                return Err(Error::DimensionMismatch {
                    expected: cfg.dim,
                    found: a.dim().max(b.dim()),
                });
            }
            (a.clone(), b.clone())
        }
        None => {
            // Composite dimensions start from a commuting tensor split.
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let left = (2..=cfg.dim)
                .take_while(|f| f * f <= cfg.dim)
                .filter(|f| cfg.dim.is_multiple_of(*f))
                .last()
                .unwrap_or(cfg.dim);
            let right = cfg.dim / left;
            let mut player = |d: usize| {
                let rows = (0..g.n())
                    .map(|_| crate::sampling::random_povm(d, g.k(), &mut rng))
                    .collect();
                Measurement::from_rows_unchecked(rows)
            };
            let a = player(left)?;
            let b = player(right)?;
            if right == 1 {
                (a, player(cfg.dim)?)
            } else {
                (a.tensor_left(right), b.tensor_right(left))
            }
        }
    };
    let mut point = evaluate_point(g, alice, bob, cfg, tol)?;
    let mut trace = vec![point.objective];
    for _ in 0..cfg.iters {
        point = improve(g, point, true, cfg, tol)?;
        point = improve(g, point, false, cfg, tol)?;
        trace.push(point.objective);
    }
    let element = game_element(g, &point.alice, &point.bob, tol)?;
    let state = top_eigenpair(&element).state;
    let strategy = Strategy::new(point.alice, point.bob, state)?;
    let value = game_value(g, &strategy, tol)?;
    let defect = is_delta_op_commuting(&strategy.alice, &strategy.bob, f64::INFINITY)?.defect;
    Ok(SeesawResult {
        strategy,
        objective: point.objective,
        trace,
        value,
        defect,
    })
}
