//! Batch runner behind the `opstab` binary.
//!
//! [`run`] executes one command and produces a line-delimited JSON report:
//! a header (format, crate version, resolved configuration, seed and the
//! SHA-256 of every input file), one or more result records, and a closing
//! summary with the exit code. Floating-point fields carry 17 significant
//! digits. Reports contain no timings or thread counts, so identical
//! configurations give byte-identical reports.
//!
//! Exit codes: 0 success, 2 parse or configuration error, 3 hypothesis or
//! precondition failure (including a failing perturbation suite), 4 budget
//! exhausted without acceptance (`semidecide` only).

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_traits::ToPrimitive;
use serde_json::{json, Map, Number, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::formats::{parse_game, parse_presentation, parse_strategy};
use crate::games;
use crate::matrix::Tolerance;
use crate::presentations::{default_modulus, norm_ceiling, norm_lower_enumerate, SeededCatalog};
use crate::search::{self, CandidateStream, GameFamily, Outcome, SeesawConfig};
use crate::suite::{run_suite, SuiteConfig};

pub const REPORT_FORMAT: &str = "opstab-report/1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_HYPOTHESIS: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    GameValue,
    Seesaw,
    Semidecide,
    PerturbSuite,
    NormEnumerate,
    ClassicalValue,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::GameValue,
        Command::Seesaw,
        Command::Semidecide,
        Command::PerturbSuite,
        Command::NormEnumerate,
        Command::ClassicalValue,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::GameValue => "game-value",
            Command::Seesaw => "seesaw",
            Command::Semidecide => "semidecide",
            Command::PerturbSuite => "perturb-suite",
            Command::NormEnumerate => "norm-enumerate",
            Command::ClassicalValue => "classical-value",
        }
    }

    fn inputs(self) -> usize {
        match self {
            Command::PerturbSuite => 0,
            _ => 1,
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::input(format!("unknown command '{s}'")))
    }
}

/// Everything one run needs. Unset options fall back to per-command
/// defaults, which are echoed in the report header.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: Command,
    /// The game file, or the presentation file for `norm-enumerate`.
    pub inputs: Vec<PathBuf>,
    /// Strategy file: evaluated by `game-value`, planted by `semidecide`,
    /// used as the starting point by `seesaw`.
    pub strategy: Option<PathBuf>,
    pub seed: u64,
    pub budget: Option<usize>,
    pub dims: Option<Vec<usize>>,
    pub delta: Option<f64>,
    pub grid_denominator: Option<u32>,
    pub iters: Option<usize>,
    pub mu: Option<f64>,
    pub rounds: Option<u32>,
    pub trials: Option<usize>,
    pub eps: Option<Vec<f64>>,
    /// Query polynomial for `norm-enumerate`, overriding the file's.
    pub query: Option<String>,
    /// Bit string `z` for `semidecide`.
    pub word: Option<String>,
    pub tolerance: Tolerance,
    pub out: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            inputs: Vec::new(),
            strategy: None,
            seed: 0,
            budget: None,
            dims: None,
            delta: None,
            grid_denominator: None,
            iters: None,
            mu: None,
            rounds: None,
            trials: None,
            eps: None,
            query: None,
            word: None,
            tolerance: Tolerance::default(),
            out: None,
            threads: None,
        }
    }

    pub fn with_input(mut self, path: impl Into<PathBuf>) -> Self {
        self.inputs.push(path.into());
        self
    }
}

/// Exit code and report text of one run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub report: String,
    /// One-line human-readable summary.
    pub summary: String,
}

/// A JSON number with 17 significant digits; `null` when not finite.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    Number::from_str(&format!("{x:.16e}")).map_or(Value::Null, Value::Number)
}

fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Parse { .. }
        | Error::Input(_)
        | Error::DimensionMismatch { .. }
        | Error::NonFinite { .. }
        | Error::Io(_) => EXIT_PARSE,
        Error::Precondition(_) | Error::Hypothesis { .. } | Error::Unsupported(_) => {
            EXIT_HYPOTHESIS
        }
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Parse { .. } => "parse",
        Error::Input(_) | Error::DimensionMismatch { .. } | Error::NonFinite { .. } => "input",
        Error::Io(_) => "io",
        Error::Precondition(_) => "precondition",
        Error::Hypothesis { .. } => "hypothesis",
        Error::Unsupported(_) => "unsupported",
    }
}

struct Report {
    lines: Vec<String>,
}

impl Report {
    fn push(&mut self, record: &str, fields: Value) {
        let mut map = Map::new();
        map.insert("record".into(), Value::String(record.into()));
        if let Value::Object(f) = fields {
            map.extend(f);
        }
        self.lines.push(Value::Object(map).to_string());
    }
}

struct Loaded {
    path: PathBuf,
    text: String,
}

fn load(path: &Path) -> Result<Loaded> {
    let text = std::fs::read_to_string(path)?;
    Ok(Loaded {
        path: path.to_path_buf(),
        text,
    })
}

fn digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Executes the configured command. The report is also written to
/// `config.out` when set.
pub fn run(config: &RunConfig) -> RunOutcome {
    let outcome = match config.threads {
        Some(t) if t > 0 => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| run_inner(config)),
            Err(e) => fail_early(config, Error::input(format!("thread pool: {e}"))),
        },
        _ => run_inner(config),
    };
    if let Some(out) = &config.out {
        if let Err(e) = std::fs::write(out, &outcome.report) {
            return RunOutcome {
                exit_code: EXIT_PARSE,
                summary: format!("could not write {}: {e}", out.display()),
                report: outcome.report,
            };
        }
    }
    outcome
}

fn fail_early(config: &RunConfig, e: Error) -> RunOutcome {
    let mut report = Report { lines: Vec::new() };
    header(&mut report, config, &[], json!({}));
    finish(report, Err(e))
}

fn header(report: &mut Report, config: &RunConfig, inputs: &[(PathBuf, String)], resolved: Value) {
    let mut cfg = Map::new();
    cfg.insert("command".into(), json!(config.command.name()));
    cfg.insert("tolerance_spectral".into(), num(config.tolerance.spectral));
    cfg.insert(
        "tolerance_algebraic".into(),
        num(config.tolerance.algebraic),
    );
    if let Value::Object(r) = resolved {
        cfg.extend(r);
    }
    let inputs: Vec<Value> = inputs
        .iter()
        .map(|(p, d)| json!({"path": p.display().to_string(), "sha256": d}))
        .collect();
    report.push(
        "header",
        json!({
            "format": REPORT_FORMAT,
            "version": env!("CARGO_PKG_VERSION"),
            "seed": config.seed,
            "config": Value::Object(cfg),
            "inputs": inputs,
        }),
    );
}

fn finish(mut report: Report, result: Result<(i32, String)>) -> RunOutcome {
    let (exit_code, summary) = match result {
        Ok((code, summary)) => (code, summary),
        Err(e) => {
            let code = exit_code_for(&e);
            let mut fields = json!({"kind": error_kind(&e), "message": e.to_string()});
            if let Error::Parse { line, column, .. } = &e {
                fields["line"] = json!(line);
                fields["column"] = json!(column);
            }
            report.push("error", fields);
            (code, format!("error: {e}"))
        }
    };
    report.push("summary", json!({"exit_code": exit_code, "text": summary}));
    let mut text = report.lines.join("\n");
    text.push('\n');
    RunOutcome {
        exit_code,
        report: text,
        summary,
    }
}

fn run_inner(config: &RunConfig) -> RunOutcome {
    let mut report = Report { lines: Vec::new() };
    if config.inputs.len() != config.command.inputs() {
        let e = Error::input(format!(
            "{} takes {} input file(s), got {}",
            config.command,
            config.command.inputs(),
            config.inputs.len()
        ));
        header(&mut report, config, &[], json!({}));
        return finish(report, Err(e));
    }
    let mut files = Vec::new();
    for p in config.inputs.iter().chain(config.strategy.iter()) {
        match load(p) {
            Ok(f) => files.push(f),
            Err(e) => {
                header(&mut report, config, &[], json!({}));
                return finish(report, Err(e));
            }
        }
    }
    let digests: Vec<(PathBuf, String)> = files
        .iter()
        .map(|f| (f.path.clone(), digest(&f.text)))
        .collect();
    let strategy_text = config
        .strategy
        .as_ref()
        .map(|_| files.last().expect("loaded").text.as_str());
    let main_text = files
        .first()
        .filter(|_| config.command.inputs() == 1)
        .map(|f| f.text.as_str());

    let resolved = resolve(config);
    header(&mut report, config, &digests, resolved);
    let result = match config.command {
        Command::ClassicalValue => classical(&mut report, main_text.expect("one input")),
        Command::GameValue => game_value(
            &mut report,
            config,
            main_text.expect("one input"),
            strategy_text,
        ),
        Command::Seesaw => seesaw(
            &mut report,
            config,
            main_text.expect("one input"),
            strategy_text,
        ),
        Command::Semidecide => semidecide(
            &mut report,
            config,
            main_text.expect("one input"),
            strategy_text,
        ),
        Command::PerturbSuite => perturb_suite(&mut report, config),
        Command::NormEnumerate => {
            norm_enumerate(&mut report, config, main_text.expect("one input"))
        }
    };
    finish(report, result)
}

const DEFAULT_DIMS: [usize; 4] = [1, 2, 3, 4];
const DEFAULT_GRID: u32 = 8;
const DEFAULT_SEMIDECIDE_BUDGET: usize = 10_000;
const DEFAULT_CATALOG: usize = 256;
const DEFAULT_ROUNDS: u32 = 12;
const DEFAULT_ITERS: usize = 100;
const DEFAULT_SEESAW_DIM: usize = 2;

fn resolve(config: &RunConfig) -> Value {
    let dims = config.dims.clone();
    match config.command {
        Command::ClassicalValue | Command::GameValue => json!({}),
        Command::Seesaw => json!({
            "dim": dims.as_ref().and_then(|d| d.first().copied()).unwrap_or(DEFAULT_SEESAW_DIM),
            "delta": num(config.delta.unwrap_or(1.0)),
            "mu": num(config.mu.unwrap_or(10.0)),
            "iters": config.iters.unwrap_or(DEFAULT_ITERS),
        }),
        Command::Semidecide => json!({
            "dims": dims.unwrap_or_else(|| DEFAULT_DIMS.to_vec()),
            "delta": num(config.delta.unwrap_or(1.0)),
            "grid_denominator": config.grid_denominator.unwrap_or(DEFAULT_GRID),
            "budget": config.budget.unwrap_or(DEFAULT_SEMIDECIDE_BUDGET),
            "word": config.word.clone().unwrap_or_default(),
        }),
        Command::PerturbSuite => json!({
            "trials": config.trials.unwrap_or(1000),
            "eps": nums(config.eps.as_deref().unwrap_or(&[0.5, 0.25, 0.125])),
        }),
        Command::NormEnumerate => json!({
            "budget": config.budget.unwrap_or(DEFAULT_CATALOG),
            "rounds": config.rounds.unwrap_or(DEFAULT_ROUNDS),
            "query": config.query,
        }),
    }
}

fn rational_string(r: &num_rational::BigRational) -> String {
    if r.denom() == &num_bigint::BigInt::from(1) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn classical(report: &mut Report, game_text: &str) -> Result<(i32, String)> {
    let g = parse_game(game_text)?;
    let cv = search::classical_value(&g)?;
    let value = rational_string(&cv.value);
    report.push(
        "classical_value",
        json!({
            "value": value,
            "value_f64": num(cv.value.to_f64().unwrap_or(f64::NAN)),
            "alice": cv.alice,
            "bob": cv.bob,
        }),
    );
    Ok((EXIT_OK, format!("classical value {value}")))
}

fn game_value(
    report: &mut Report,
    config: &RunConfig,
    game_text: &str,
    strategy_text: Option<&str>,
) -> Result<(i32, String)> {
    let g = parse_game(game_text)?;
    let text = strategy_text.ok_or_else(|| Error::input("game-value needs --strategy"))?;
    let tol = &config.tolerance;
    let sigma = parse_strategy(text, tol)?;
    let value = games::game_value(&g, &sigma, tol)?;
    let best = games::best_value(&g, &sigma.alice, &sigma.bob, tol)?;
    let commuting = games::is_delta_op_commuting(&sigma.alice, &sigma.bob, f64::INFINITY)?;
    let mut table = Vec::new();
    for x in 0..g.n() {
        for y in 0..g.n() {
            let mut row = Vec::new();
            for a in 0..g.k() {
                for b in 0..g.k() {
                    row.push(games::correlation(&sigma, x, y, a, b, tol)?);
                }
            }
            table.push(json!({"x": x, "y": y, "p": nums(&row)}));
        }
    }
    report.push(
        "game_value",
        json!({
            "dim": sigma.dim(),
            "value": num(value),
            "best_value": num(best.value),
            "max_commutator_defect": num(commuting.defect),
            "worst_pair": [commuting.worst.0, commuting.worst.1],
        }),
    );
    report.push("correlations", json!({"table": table}));
    Ok((EXIT_OK, format!("game value {value:.12}")))
}

fn seesaw(
    report: &mut Report,
    config: &RunConfig,
    game_text: &str,
    strategy_text: Option<&str>,
) -> Result<(i32, String)> {
    let g = parse_game(game_text)?;
    let tol = &config.tolerance;
    let dim = config
        .dims
        .as_ref()
        .and_then(|d| d.first().copied())
        .unwrap_or(DEFAULT_SEESAW_DIM);
    let mut cfg = SeesawConfig::new(
        dim,
        config.delta.unwrap_or(1.0),
        config.iters.unwrap_or(DEFAULT_ITERS),
        config.seed,
    );
    cfg.mu = config.mu.unwrap_or(10.0);
    if let Some(text) = strategy_text {
        let s = parse_strategy(text, tol)?;
        cfg.dim = s.dim();
        cfg.init = Some((s.alice, s.bob));
    }
    let r = search::seesaw_optimize(&g, &cfg, tol)?;
    report.push("seesaw_trace", json!({"objective": nums(&r.trace)}));
    report.push(
        "seesaw_result",
        json!({
            "dim": cfg.dim,
            "objective": num(r.objective),
            "value": num(r.value),
            "max_commutator_defect": num(r.defect),
        }),
    );
    Ok((EXIT_OK, format!("see-saw value {:.12}", r.value)))
}

fn semidecide(
    report: &mut Report,
    config: &RunConfig,
    game_text: &str,
    strategy_text: Option<&str>,
) -> Result<(i32, String)> {
    let g = parse_game(game_text)?;
    let tol = &config.tolerance;
    let delta = config.delta.unwrap_or(1.0);
    let z = search::parse_bits(config.word.as_deref().unwrap_or(""))?;
    let mut stream = CandidateStream::new(
        config.dims.clone().unwrap_or_else(|| DEFAULT_DIMS.to_vec()),
        config.grid_denominator.unwrap_or(DEFAULT_GRID),
        config.seed,
        config.budget.unwrap_or(DEFAULT_SEMIDECIDE_BUDGET),
    )?;
    if let Some(text) = strategy_text {
        let s = parse_strategy(text, tol)?;
        stream = stream.with_planted(s.alice, s.bob);
    }
    let family = GameFamily::constant(g.clone(), delta);
    let verdict = search::semidecide_membership(&family, &z, &stream, tol)?;
    let mut fields = json!({
        "outcome": verdict.outcome.name(),
        "candidates_tried": verdict.candidates_tried,
        "delta": num(verdict.delta),
        "eigen_error": num(search::EIGEN_ERROR),
    });
    if let Some(w) = &verdict.witness {
        let value = games::game_value(&g, &w.strategy, tol)?;
        let reverified = search::reverify_witness(&g, delta, w, tol)?;
        fields["witness"] = json!({
            "candidate_index": w.candidate_index,
            "dim": w.strategy.dim(),
            "certified_value": num(w.certified_value),
            "game_value": num(value),
            "max_commutator_defect": num(w.defect),
            "reverified": reverified,
        });
    }
    report.push("verdict", fields);
    Ok(match verdict.outcome {
        Outcome::Accepted => (
            EXIT_OK,
            format!("accepted after {} candidates", verdict.candidates_tried),
        ),
        Outcome::BudgetExhausted => (
            EXIT_BUDGET,
            format!(
                "budget of {} candidates exhausted",
                verdict.candidates_tried
            ),
        ),
    })
}

fn perturb_suite(report: &mut Report, config: &RunConfig) -> Result<(i32, String)> {
    let cfg = SuiteConfig {
        trials: config.trials.unwrap_or(1000),
        eps: config.eps.clone().unwrap_or_else(|| vec![0.5, 0.25, 0.125]),
        seed: config.seed,
        ..SuiteConfig::default()
    };
    if cfg.trials == 0 || cfg.eps.is_empty() {
        return Err(Error::input(
            "perturb-suite needs trials ≥ 1 and at least one ε",
        ));
    }
    let cells = run_suite(&cfg, &config.tolerance)?;
    let mut failed = 0;
    for c in &cells {
        if !c.ok() {
            failed += 1;
        }
        let mut fields = json!({
            "kind": c.kind.name(),
            "eps": num(c.eps),
            "modulus": num(c.modulus),
            "trials": c.trials,
            "passed": c.passed,
            "max_defect": num(c.max_defect),
            "max_distance": num(c.max_distance),
            "max_residual": num(c.max_residual),
        });
        if let Some((t, msg)) = &c.first_failure {
            fields["first_failure"] = json!({"trial": t, "message": msg});
        }
        report.push("suite_cell", fields);
    }
    Ok(if failed == 0 {
        (EXIT_OK, format!("all {} cells passed", cells.len()))
    } else {
        (
            EXIT_HYPOTHESIS,
            format!("{failed} of {} cells failed", cells.len()),
        )
    })
}

fn norm_enumerate(
    report: &mut Report,
    config: &RunConfig,
    pres_text: &str,
) -> Result<(i32, String)> {
    let file = parse_presentation(pres_text)?;
    let pres = file.presentation;
    let q = match &config.query {
        Some(text) => pres.parse_poly(text)?,
        None => file
            .query
            .ok_or_else(|| Error::input("no query: set it in the file or pass --query"))?,
    };
    let id = pres.id().ok_or_else(|| {
        Error::Unsupported("norm-enumerate needs a registered presentation id".into())
    })?;
    let table = default_modulus(id)?;
    let catalog = SeededCatalog::new(&pres, config.seed, config.budget.unwrap_or(DEFAULT_CATALOG))?;
    let rounds = config.rounds.unwrap_or(DEFAULT_ROUNDS);
    let emissions = norm_lower_enumerate(&pres, &q, &catalog, &table, rounds, &config.tolerance)?;
    for e in &emissions {
        report.push(
            "lower_bound",
            json!({
                "round": e.round,
                "n": e.n,
                "m": e.m,
                "bound": e.bound.to_string(),
                "bound_f64": num(e.bound.value()),
                "observed": num(e.observed),
                "witnessed": num(e.witnessed),
                "rep_index": e.rep_index,
                "dim": e.dim,
            }),
        );
    }
    let last = emissions.last().map_or(0.0, |e| e.bound.value());
    report.push(
        "norm_enumeration",
        json!({
            "presentation": id.to_string(),
            "query": q.to_string(),
            "emissions": emissions.len(),
            "best_lower_bound": num(last),
            "triangle_ceiling": num(norm_ceiling(&pres, &q)),
            "modulus": table.rule.to_string(),
        }),
    );
    Ok((
        EXIT_OK,
        format!("{} lower bounds, best {last}", emissions.len()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_keep_seventeen_digits() {
        assert_eq!(num(0.75).to_string(), "7.5000000000000000e-1");
        assert_eq!(num(f64::NAN), Value::Null);
        let v = std::f64::consts::FRAC_PI_8.cos().powi(2);
        let s = num(v).to_string();
        assert_eq!(s.parse::<f64>().unwrap(), v);
    }

    #[test]
    fn command_names_round_trip() {
        for c in Command::ALL {
            assert_eq!(c.name().parse::<Command>().unwrap(), c);
        }
        assert!("nope".parse::<Command>().is_err());
    }

    #[test]
    fn missing_input_is_a_config_error() {
        let out = run(&RunConfig::new(Command::ClassicalValue));
        assert_eq!(out.exit_code, EXIT_PARSE);
        let out =
            run(&RunConfig::new(Command::ClassicalValue).with_input("/nonexistent/game.toml"));
        assert_eq!(out.exit_code, EXIT_PARSE);
        assert!(out.report.contains("\"record\":\"error\""));
    }
}
