//! Seeded randomized checks of the rounding operations.
//!
//! Every instance is an exact object plus noise, shrunk until its measured
//! defect is within the stability modulus for the target `ε`. A trial passes
//! when the rounding succeeds with residual at most `1e−10` and moves the
//! input by less than `ε`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::matrix::{ComplexMatrix, Tolerance};
use crate::perturbation::{
    partial_isometry_defect, povm_defect, projection_defect, round_to_partial_isometry,
    round_to_povm, round_to_projection, round_to_pvm, round_to_unitary, stability_modulus,
    RoundingKind, RoundingReport,
};
use crate::sampling;

/// Residual bound a passing trial must meet.
pub const RESIDUAL_BOUND: f64 = 1e-10;

/// A rounding problem that satisfies its hypothesis.
#[derive(Clone, Debug)]
pub enum Instance {
    Single(ComplexMatrix),
    PartialIsometry {
        a: ComplexMatrix,
        p1: ComplexMatrix,
        p2: ComplexMatrix,
    },
    Family(Vec<ComplexMatrix>),
}

impl Instance {
    pub fn dim(&self) -> usize {
        match self {
            Instance::Single(a) | Instance::PartialIsometry { a, .. } => a.dim(),
            Instance::Family(ops) => ops[0].dim(),
        }
    }
}

/// The defect that `kind`'s hypothesis bounds.
pub fn instance_defect(kind: RoundingKind, inst: &Instance) -> Result<f64> {
    Ok(match (kind, inst) {
        (RoundingKind::Unitary, Instance::Single(a)) => {
            let id = ComplexMatrix::identity(a.dim());
            let l = (&(&a.adjoint() * a) - &id).norm();
            let r = (&(a * &a.adjoint()) - &id).norm();
            l.max(r)
        }
        (RoundingKind::Projection, Instance::Single(a)) => projection_defect(a),
        (RoundingKind::PartialIsometry, Instance::PartialIsometry { a, p1, p2 }) => {
            partial_isometry_defect(a, p1, p2)
        }
        (RoundingKind::Povm, Instance::Family(ops)) => povm_defect(ops)?,
        (RoundingKind::Pvm, Instance::Family(ops)) => {
            let sum = (&crate::matrix::sum(ops) - &ComplexMatrix::identity(ops[0].dim())).norm();
            ops.iter().map(projection_defect).fold(sum, f64::max)
        }
        _ => f64::INFINITY,
    })
}

fn noisy(exact: &ComplexMatrix, size: f64, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    exact + &sampling::random_perturbation(exact.dim(), size, rng)
}

/// Draws an instance of `kind` in dimension `2..=16` whose defect is within
/// `stability_modulus(kind, eps)`.
pub fn generate_instance(kind: RoundingKind, eps: f64, rng: &mut ChaCha8Rng) -> Result<Instance> {
    let delta = stability_modulus(kind, eps)?.value();
    let dim = rng.gen_range(2..=16);
    let k = rng.gen_range(2..=4);
    let exact = match kind {
        RoundingKind::Unitary => Instance::Single(sampling::random_unitary(dim, rng)),
        RoundingKind::Projection => {
            let rank = rng.gen_range(0..=dim);
            Instance::Single(sampling::random_projection(dim, rank, rng))
        }
        RoundingKind::PartialIsometry => {
            let rank = rng.gen_range(0..=dim);
            let (a, p1, p2) = sampling::random_partial_isometry(dim, rank, rng);
            Instance::PartialIsometry { a, p1, p2 }
        }
        RoundingKind::Povm => Instance::Family(sampling::random_povm(dim, k, rng)),
        RoundingKind::Pvm => Instance::Family(sampling::random_pvm(dim, k, rng)),
    };
    // Noise up to the full modulus, halved until the hypothesis holds.
    let mut size = delta * rng.gen_range(0.05..=1.0);
    let noise_seed: u64 = rng.gen();
    loop {
        let mut noise_rng = ChaCha8Rng::seed_from_u64(noise_seed);
        let inst = match &exact {
            Instance::Single(a) => Instance::Single(noisy(a, size, &mut noise_rng)),
            Instance::PartialIsometry { a, p1, p2 } => Instance::PartialIsometry {
                a: noisy(a, size, &mut noise_rng),
                p1: p1.clone(),
                p2: p2.clone(),
            },
            Instance::Family(ops) => Instance::Family(
                ops.iter()
                    .map(|op| noisy(op, size / ops.len() as f64, &mut noise_rng))
                    .collect(),
            ),
        };
        if instance_defect(kind, &inst)? <= delta {
            return Ok(inst);
        }
        size /= 2.0;
    }
}

/// Runs the rounding for `kind` on `inst`.
pub fn round_instance(
    kind: RoundingKind,
    inst: &Instance,
    eps: f64,
    tol: &Tolerance,
) -> Result<RoundingReport> {
    Ok(match (kind, inst) {
        (RoundingKind::Unitary, Instance::Single(a)) => round_to_unitary(a, eps, tol)?.1,
        (RoundingKind::Projection, Instance::Single(a)) => round_to_projection(a, eps, tol)?.1,
        (RoundingKind::PartialIsometry, Instance::PartialIsometry { a, p1, p2 }) => {
            round_to_partial_isometry(a, p1, p2, eps, tol)?.1
        }
        (RoundingKind::Povm, Instance::Family(ops)) => round_to_povm(ops, tol)?.1,
        (RoundingKind::Pvm, Instance::Family(ops)) => round_to_pvm(ops, tol)?.1,
        _ => {
            return Err(crate::error::Error::input(format!(
                "instance shape does not match kind {kind}"
            )))
        }
    })
}

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub kinds: Vec<RoundingKind>,
    pub eps: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            kinds: RoundingKind::ALL.to_vec(),
            eps: vec![0.5, 0.25, 0.125],
            trials: 1000,
            seed: 0,
        }
    }
}

/// Aggregate over the trials of one `(kind, ε)` cell.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteCell {
    pub kind: RoundingKind,
    pub eps: f64,
    pub modulus: f64,
    pub trials: usize,
    pub passed: usize,
    pub max_defect: f64,
    pub max_distance: f64,
    pub max_residual: f64,
    /// First failing trial and its error, if any.
    pub first_failure: Option<(usize, String)>,
}

impl SuiteCell {
    pub fn ok(&self) -> bool {
        self.passed == self.trials
    }
}

/// Runs every `(kind, ε)` cell; trial `t` of cell `c` draws from its own
/// stream of the seeded generator, so results do not depend on scheduling.
pub fn run_suite(cfg: &SuiteConfig, tol: &Tolerance) -> Result<Vec<SuiteCell>> {
    let mut cells = Vec::new();
    for (ki, &kind) in cfg.kinds.iter().enumerate() {
        for (ei, &eps) in cfg.eps.iter().enumerate() {
            let modulus = stability_modulus(kind, eps)?.value();
            let stream_base = ((ki * cfg.eps.len() + ei) as u64) << 32;
            let outcomes: Vec<std::result::Result<(f64, RoundingReport), String>> = (0..cfg.trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                    rng.set_stream(stream_base + t as u64);
                    let inst = generate_instance(kind, eps, &mut rng).map_err(|e| e.to_string())?;
                    let defect = instance_defect(kind, &inst).map_err(|e| e.to_string())?;
                    let report =
                        round_instance(kind, &inst, eps, tol).map_err(|e| e.to_string())?;
                    if report.exactness_residual > RESIDUAL_BOUND {
                        return Err(format!("residual {:e}", report.exactness_residual));
                    }
                    if report.output_distance >= eps {
                        return Err(format!("distance {:e} ≥ ε", report.output_distance));
                    }
                    Ok((defect, report))
                })
                .collect();
            let mut cell = SuiteCell {
                kind,
                eps,
                modulus,
                trials: cfg.trials,
                passed: 0,
                max_defect: 0.0,
                max_distance: 0.0,
                max_residual: 0.0,
                first_failure: None,
            };
            for (t, o) in outcomes.into_iter().enumerate() {
                match o {
                    Ok((defect, r)) => {
                        cell.passed += 1;
                        cell.max_defect = cell.max_defect.max(defect);
                        cell.max_distance = cell.max_distance.max(r.output_distance);
                        cell.max_residual = cell.max_residual.max(r.exactness_residual);
                    }
                    Err(msg) => {
                        if cell.first_failure.is_none() {
                            cell.first_failure = Some((t, msg));
                        }
                    }
                }
            }
            cells.push(cell);
        }
    }
    Ok(cells)
}
