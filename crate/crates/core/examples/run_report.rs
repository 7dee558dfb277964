//! Drives the batch runner in-process and prints its report.

use std::path::Path;

use opstab::cli::{run, Command, RunConfig};

fn main() {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let mut cfg = RunConfig::new(Command::Semidecide).with_input(data.join("chsh.toml"));
    cfg.budget = Some(100);
    let out = run(&cfg);
    print!("{}", out.report);
    println!("exit code {}: {}", out.exit_code, out.summary);
}
