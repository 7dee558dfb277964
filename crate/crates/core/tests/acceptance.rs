//! End-to-end acceptance run. Prints one `[PASS]`/`[FAIL]` line per
//! criterion on stdout (uncaptured) and fails if any criterion fails.

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use num_rational::BigRational;
use opstab::cli::{self, Command, RunConfig};
use opstab::games::{
    chsh_tensor_strategy, correlation, game_element, game_value, Measurement, NonlocalGame, State,
    Strategy,
};
use opstab::matrix::{max_eigenvalue, min_eigenvalue, Tolerance};
use opstab::perturbation::{admissible_defect, round_to_povm, RoundingKind};
use opstab::presentations::{
    default_modulus, norm_ceiling, norm_lower_enumerate, Presentation, PresentationId,
    SeededCatalog,
};
use opstab::sampling;
use opstab::search::{
    classical_value, reverify_witness, seesaw_optimize, semidecide_membership, CandidateStream,
    GameFamily, Outcome, SeesawConfig,
};
use opstab::suite::{run_suite, SuiteConfig, RESIDUAL_BOUND};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn timed(limit: Duration, f: impl FnOnce() -> Check) -> Check {
    let start = Instant::now();
    let detail = f()?;
    let elapsed = start.elapsed();
    ensure(elapsed < limit, || {
        format!("took {elapsed:.2?}, limit {limit:?}")
    })?;
    Ok(format!("{detail} in {elapsed:.2?}"))
}

fn tol() -> Tolerance {
    Tolerance::default()
}

fn perturbation_suite() -> Check {
    // The admissible defects sit strictly inside the open bounds ε²/8 and 2⁻¹⁶ε⁸.
    for eps in [0.5, 0.25, 0.125] {
        let p = admissible_defect(RoundingKind::Projection, eps).map_err(|e| e.to_string())?;
        ensure(p > 0.0 && p < eps * eps / 8.0, || {
            format!("projection modulus {p} at ε={eps}")
        })?;
        let q = admissible_defect(RoundingKind::PartialIsometry, eps).map_err(|e| e.to_string())?;
        ensure(q > 0.0 && q < (-16.0f64).exp2() * eps.powi(8), || {
            format!("partial isometry modulus {q} at ε={eps}")
        })?;
    }
    timed(Duration::from_secs(120), || {
        let cells = run_suite(&SuiteConfig::default(), &tol()).map_err(|e| e.to_string())?;
        ensure(cells.len() == 15, || format!("{} cells", cells.len()))?;
        let mut worst = 0.0f64;
        for c in &cells {
            ensure(c.trials == 1000 && c.ok(), || {
                format!("{} ε={}: {:?}", c.kind, c.eps, c.first_failure)
            })?;
            ensure(
                c.max_residual <= RESIDUAL_BOUND && c.max_distance < c.eps,
                || format!("{c:?}"),
            )?;
            worst = worst.max(c.max_residual);
        }
        Ok(format!("15 000 trials, worst residual {worst:.1e}"))
    })
}

fn chsh_classical() -> Check {
    timed(Duration::from_secs(1), || {
        let v = classical_value(&NonlocalGame::chsh())
            .map_err(|e| e.to_string())?
            .value;
        ensure(v == BigRational::new(3.into(), 4.into()), || {
            format!("got {v}")
        })?;
        Ok(format!("value {v}"))
    })
}

fn jitter(
    m: &Measurement,
    size: f64,
    rng: &mut ChaCha8Rng,
) -> std::result::Result<Measurement, String> {
    let mut rows = Vec::new();
    for row in m.rows() {
        let noisy: Vec<_> = row
            .iter()
            .map(|op| op + &sampling::random_hermitian(op.dim(), size, rng))
            .collect();
        rows.push(round_to_povm(&noisy, &tol()).map_err(|e| e.to_string())?.0);
    }
    Measurement::new(rows, &tol()).map_err(|e| e.to_string())
}

fn chsh_quantum() -> Check {
    timed(Duration::from_secs(30), || {
        let g = NonlocalGame::chsh();
        let sigma = chsh_tensor_strategy();
        let target = (std::f64::consts::PI / 8.0).cos().powi(2);
        let v = game_value(&g, &sigma, &tol()).map_err(|e| e.to_string())?;
        ensure((v - target).abs() <= 1e-9, || {
            format!("tensor strategy {v}")
        })?;

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut cfg = SeesawConfig::new(4, 0.5, 200, 0);
        cfg.init = Some((
            jitter(&sigma.alice, 0.1, &mut rng)?,
            jitter(&sigma.bob, 0.1, &mut rng)?,
        ));
        let out = seesaw_optimize(&g, &cfg, &tol()).map_err(|e| e.to_string())?;
        ensure(out.value >= 0.8525, || {
            format!("see-saw reached {}", out.value)
        })?;
        Ok(format!(
            "tensor {v:.12}, see-saw {:.6} from {:.6}",
            out.value, out.trace[0]
        ))
    })
}

fn normalization() -> Check {
    timed(Duration::from_secs(60), || {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut worst_sum = 0.0f64;
        let mut spectrum = (f64::INFINITY, f64::NEG_INFINITY);
        for trial in 0..500 {
            let dim = rng.gen_range(1..=4);
            let n = rng.gen_range(1..=3);
            let k = rng.gen_range(2..=3);
            let player = |rng: &mut ChaCha8Rng| {
                let rows = (0..n).map(|_| sampling::random_povm(dim, k, rng)).collect();
                Measurement::new(rows, &tol()).map_err(|e| e.to_string())
            };
            let alice = player(&mut rng)?;
            let bob = player(&mut rng)?;
            let h = sampling::random_gaussian(dim, &mut rng);
            let rho = &h * &h.adjoint();
            let rho = rho.scale(1.0 / rho.trace().re);
            let state = State::new(rho, &tol()).map_err(|e| e.to_string())?;
            let sigma = Strategy::new(alice, bob, state).map_err(|e| e.to_string())?;
            for x in 0..n {
                for y in 0..n {
                    let mut total = 0.0;
                    for a in 0..k {
                        for b in 0..k {
                            total += correlation(&sigma, x, y, a, b, &tol())
                                .map_err(|e| e.to_string())?;
                        }
                    }
                    worst_sum = worst_sum.max((total - 1.0).abs());
                }
            }
            let weights: Vec<f64> = (0..n * n).map(|_| rng.gen_range(1..=3) as f64).collect();
            let total: f64 = weights.iter().sum();
            let pi: Vec<f64> = weights.iter().map(|w| w / total).collect();
            let table: Vec<bool> = (0..n * n * k * k).map(|_| rng.gen_bool(0.5)).collect();
            let g =
                NonlocalGame::from_fn(n, k, &pi, |x, y, a, b| table[((x * n + y) * k + a) * k + b])
                    .map_err(|e| format!("trial {trial}: {e}"))?;
            let element =
                game_element(&g, &sigma.alice, &sigma.bob, &tol()).map_err(|e| e.to_string())?;
            spectrum = (
                spectrum.0.min(min_eigenvalue(&element)),
                spectrum.1.max(max_eigenvalue(&element)),
            );
        }
        ensure(worst_sum <= 1e-10, || {
            format!("correlation sums off by {worst_sum:e}")
        })?;
        ensure(spectrum.0 >= -1e-10 && spectrum.1 <= 1.0 + 1e-10, || {
            format!("spectrum {spectrum:?}")
        })?;
        Ok(format!(
            "500 strategies, max |sum-1| {worst_sum:.1e}, spectra in [{:.1e}, {:.6}]",
            spectrum.0, spectrum.1
        ))
    })
}

fn semidecision() -> Check {
    timed(Duration::from_secs(60), || {
        let stream =
            CandidateStream::new(vec![1, 2, 3, 4], 8, 0, 10_000).map_err(|e| e.to_string())?;
        let one = NonlocalGame::constant(2, 2, true);
        let v = semidecide_membership(
            &GameFamily::constant(one.clone(), 1.0),
            &[],
            &stream,
            &tol(),
        )
        .map_err(|e| e.to_string())?;
        ensure(
            v.outcome == Outcome::Accepted && v.candidates_tried <= 10,
            || format!("D=1: {:?} after {}", v.outcome, v.candidates_tried),
        )?;

        let zero = NonlocalGame::constant(2, 2, false);
        let z = semidecide_membership(&GameFamily::constant(zero, 1.0), &[], &stream, &tol())
            .map_err(|e| e.to_string())?;
        ensure(
            z.outcome == Outcome::BudgetExhausted
                && z.witness.is_none()
                && z.candidates_tried == 10_000,
            || format!("D=0: {:?} after {}", z.outcome, z.candidates_tried),
        )?;

        let chsh = NonlocalGame::chsh();
        let c = semidecide_membership(
            &GameFamily::constant(chsh.clone(), 0.5),
            &[],
            &stream,
            &tol(),
        )
        .map_err(|e| e.to_string())?;
        for (g, delta, verdict) in [(&one, 1.0, &v), (&chsh, 0.5, &c)] {
            let w = verdict
                .witness
                .as_ref()
                .ok_or("accepted without a witness")?;
            ensure(
                reverify_witness(g, delta, w, &tol()).map_err(|e| e.to_string())?,
                || "witness failed re-verification".into(),
            )?;
            let value = game_value(g, &w.strategy, &tol()).map_err(|e| e.to_string())?;
            ensure(value > 0.5, || format!("witness value {value}"))?;
        }
        Ok(format!(
            "D=1 accepted after {}, D=0 exhausted {} candidates, witnesses re-verified",
            v.candidates_tried, z.candidates_tried
        ))
    })
}

fn norm_enumeration() -> Check {
    timed(Duration::from_secs(60), || {
        let id = PresentationId::FreeUnitaries(1);
        let pres = Presentation::registered(id);
        let q = pres.parse_poly("g + g*").map_err(|e| e.to_string())?;
        let catalog = SeededCatalog::new(&pres, 0, 256).map_err(|e| e.to_string())?;
        let table = default_modulus(id).map_err(|e| e.to_string())?;
        let out = norm_lower_enumerate(&pres, &q, &catalog, &table, 12, &tol())
            .map_err(|e| e.to_string())?;
        let values: Vec<f64> = out.iter().map(|e| e.bound.value()).collect();
        let ceiling = norm_ceiling(&pres, &q);
        ensure((ceiling - 2.0).abs() < 1e-12, || {
            format!("ceiling {ceiling}")
        })?;
        ensure(values.windows(2).all(|w| w[0] < w[1]), || {
            format!("not increasing: {values:?}")
        })?;
        ensure(values.iter().all(|&v| v <= 2.0 + 1e-9), || {
            format!("exceeds ceiling: {values:?}")
        })?;
        let best = values.last().copied().unwrap_or(0.0);
        ensure(best >= 2.0 - (-10.0f64).exp2(), || format!("best {best}"))?;
        Ok(format!("{} bounds, best {best}", values.len()))
    })
}

fn determinism() -> Check {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let mut configs = Vec::new();
    let game = |c: Command| RunConfig::new(c).with_input(data.join("chsh.toml"));
    configs.push(game(Command::ClassicalValue));
    let mut gv = game(Command::GameValue);
    gv.strategy = Some(data.join("chsh_optimal_strategy.toml"));
    configs.push(gv);
    let mut ss = game(Command::Seesaw);
    ss.dims = Some(vec![4]);
    ss.iters = Some(30);
    ss.seed = 7;
    configs.push(ss);
    let mut sd = RunConfig::new(Command::Semidecide).with_input(data.join("constant_zero.toml"));
    sd.budget = Some(500);
    sd.seed = 3;
    configs.push(sd);
    let mut ps = RunConfig::new(Command::PerturbSuite);
    ps.trials = Some(60);
    ps.seed = 11;
    configs.push(ps);
    let mut ne =
        RunConfig::new(Command::NormEnumerate).with_input(data.join("single_unitary.toml"));
    ne.budget = Some(128);
    configs.push(ne);
    let mut mu =
        RunConfig::new(Command::NormEnumerate).with_input(data.join("matrix_units_2.toml"));
    mu.rounds = Some(5);
    configs.push(mu);

    for cfg in configs {
        let mut reports = Vec::new();
        for threads in [Some(1), Some(4), None] {
            let mut c = cfg.clone();
            c.threads = threads;
            reports.push(cli::run(&c));
        }
        ensure(reports.windows(2).all(|w| w[0] == w[1]), || {
            format!("{} differs across thread counts", cfg.command)
        })?;
        ensure(
            reports[0].exit_code == 0 || reports[0].exit_code == 4,
            || {
                format!(
                    "{} exited {}: {}",
                    cfg.command, reports[0].exit_code, reports[0].summary
                )
            },
        )?;
    }
    Ok("7 configurations byte-identical across 1, 4 and default threads".into())
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 7] = [
        ("1 perturbation suite", perturbation_suite),
        ("2 CHSH classical value", chsh_classical),
        ("3 CHSH quantum value", chsh_quantum),
        ("4 normalization and positivity", normalization),
        ("5 semidecision harness", semidecision),
        ("6 norm lower enumeration", norm_enumeration),
        ("7 determinism", determinism),
    ];
    let mut failed = Vec::new();
    let mut out = std::io::stdout();
    for (name, check) in criteria {
        let result =
            catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let line = match &result {
            Ok(detail) => format!("[PASS] {name}: {detail}"),
            Err(why) => {
                failed.push(name);
                format!("[FAIL] {name}: {why}")
            }
        };
        writeln!(out, "{line}").unwrap();
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
