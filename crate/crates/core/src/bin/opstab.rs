use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use opstab::cli::{run, Command, RunConfig};
use opstab::matrix::Tolerance;

#[derive(Parser)]
#[command(
    name = "opstab",
    version,
    about = "Operator stability, nonlocal games and presentation search"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Evaluate a strategy on a game
    GameValue(Opts),
    /// Locally optimize a strategy for a game
    Seesaw(Opts),
    /// Search for a certified δ-commuting strategy beating 1/2
    Semidecide(Opts),
    /// Run the randomized rounding suite
    PerturbSuite(Opts),
    /// Enumerate dyadic lower bounds on a universal norm
    NormEnumerate(Opts),
    /// Exact classical value of a game
    ClassicalValue(Opts),
}

#[derive(Args)]
struct Opts {
    /// Game or presentation file
    inputs: Vec<PathBuf>,
    #[arg(long)]
    strategy: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    budget: Option<usize>,
    /// Comma-separated dimensions
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    grid_denominator: Option<u32>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    rounds: Option<u32>,
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated ε values
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    #[arg(long)]
    query: Option<String>,
    /// Input bit string for semidecide
    #[arg(long)]
    word: Option<String>,
    #[arg(long, default_value_t = 1e-10)]
    tolerance: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, o) = match cli.command {
        Sub::GameValue(o) => (Command::GameValue, o),
        Sub::Seesaw(o) => (Command::Seesaw, o),
        Sub::Semidecide(o) => (Command::Semidecide, o),
        Sub::PerturbSuite(o) => (Command::PerturbSuite, o),
        Sub::NormEnumerate(o) => (Command::NormEnumerate, o),
        Sub::ClassicalValue(o) => (Command::ClassicalValue, o),
    };
    let config = RunConfig {
        inputs: o.inputs,
        strategy: o.strategy,
        seed: o.seed,
        budget: o.budget,
        dims: o.dims,
        delta: o.delta,
        grid_denominator: o.grid_denominator,
        iters: o.iters,
        mu: o.mu,
        rounds: o.rounds,
        trials: o.trials,
        eps: o.eps,
        query: o.query,
        word: o.word,
        tolerance: Tolerance {
            spectral: o.tolerance,
            algebraic: o.tolerance,
        },
        out: o.out,
        threads: o.threads,
        ..RunConfig::new(command)
    };
    let outcome = run(&config);
    if config.out.is_none() {
        print!("{}", outcome.report);
    }
    eprintln!("opstab {}: {}", command, outcome.summary);
    ExitCode::from(outcome.exit_code as u8)
}
