//! Local optimization of a CHSH strategy from a perturbed start.

use opstab::games::{chsh_tensor_strategy, Measurement, NonlocalGame};
use opstab::matrix::Tolerance;
use opstab::perturbation::round_to_povm;
use opstab::sampling;
use opstab::search::{seesaw_optimize, SeesawConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn jitter(
    m: &Measurement,
    rng: &mut ChaCha8Rng,
    tol: &Tolerance,
) -> opstab::error::Result<Measurement> {
    let mut rows = Vec::new();
    for row in m.rows() {
        let noisy: Vec<_> = row
            .iter()
            .map(|op| op + &sampling::random_hermitian(op.dim(), 0.1, rng))
            .collect();
        rows.push(round_to_povm(&noisy, tol)?.0);
    }
    Measurement::new(rows, tol)
}

fn main() -> opstab::error::Result<()> {
    let tol = Tolerance::default();
    let g = NonlocalGame::chsh();
    let start = chsh_tensor_strategy();
    let mut rng = ChaCha8Rng::seed_from_u64(3);

    let mut cfg = SeesawConfig::new(4, 0.5, 200, 0);
    cfg.init = Some((
        jitter(&start.alice, &mut rng, &tol)?,
        jitter(&start.bob, &mut rng, &tol)?,
    ));
    let r = seesaw_optimize(&g, &cfg, &tol)?;
    for (i, v) in r.trace.iter().enumerate().step_by(25) {
        println!("iter {i:>3}: objective {v:.6}");
    }
    println!(
        "final value {:.6}, commutator defect {:.2e}",
        r.value, r.defect
    );
    Ok(())
}
