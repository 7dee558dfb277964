use std::path::{Path, PathBuf};
use std::process::Command;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
}

fn opstab(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_opstab"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().expect("exit code"),
        String::from_utf8(out.stdout).expect("utf-8"),
    )
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn classical_value_of_bundled_chsh_is_three_quarters() {
    let (code, report) = opstab(&["classical-value", path(&data("chsh.toml"))]);
    assert_eq!(code, 0);
    assert!(report.contains("\"value\":\"3/4\""), "{report}");
    let header: serde_json::Value = serde_json::from_str(report.lines().next().unwrap()).unwrap();
    assert_eq!(header["format"], "opstab-report/1");
    assert_eq!(header["seed"], 0);
    assert_eq!(header["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn every_record_is_json() {
    let (code, report) = opstab(&[
        "game-value",
        path(&data("chsh.toml")),
        "--strategy",
        path(&data("chsh_optimal_strategy.toml")),
    ]);
    assert_eq!(code, 0);
    let records: Vec<serde_json::Value> = report
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(records.first().unwrap()["record"], "header");
    assert_eq!(records.last().unwrap()["record"], "summary");
    let value = records
        .iter()
        .find(|r| r["record"] == "game_value")
        .unwrap()["value"]
        .as_f64()
        .unwrap();
    assert!((value - (std::f64::consts::PI / 8.0).cos().powi(2)).abs() < 1e-9);
}

#[test]
fn semidecide_exit_codes() {
    let (code, report) = opstab(&["semidecide", path(&data("constant_one.toml"))]);
    assert_eq!(code, 0);
    assert!(report.contains("\"outcome\":\"accepted\""));
    let (code, report) = opstab(&[
        "semidecide",
        path(&data("constant_zero.toml")),
        "--budget",
        "200",
    ]);
    assert_eq!(code, 4);
    assert!(report.contains("\"outcome\":\"budget_exhausted\""));
}

#[test]
fn parse_errors_exit_two_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "n = 1\nk = 1\npi = [[0.99]]\nwin = []\n").unwrap();
    let (code, report) = opstab(&["classical-value", path(&bad)]);
    assert_eq!(code, 2);
    assert!(report.contains("\"line\":3"), "{report}");

    let (code, _) = opstab(&["classical-value", "/nonexistent.toml"]);
    assert_eq!(code, 2);
}

#[test]
fn precondition_failures_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    // No registered id, so no stability modulus is known.
    let free = dir.path().join("free.toml");
    std::fs::write(
        &free,
        "query = \"a + a*\"\nrelations = []\n[[generators]]\nname = \"a\"\nbound = \"1\"\n",
    )
    .unwrap();
    let (code, report) = opstab(&["norm-enumerate", path(&free)]);
    assert_eq!(code, 3, "{report}");

    // 4^13 Alice strategies is past the enumeration guard.
    let n = 13;
    let row = format!("[{}]", vec!["\"1/169\""; n].join(", "));
    let big = dir.path().join("big.toml");
    std::fs::write(
        &big,
        format!(
            "n = {n}\nk = 4\npi = [{}]\nwin = []\n",
            vec![row; n].join(", ")
        ),
    )
    .unwrap();
    let (code, report) = opstab(&["classical-value", path(&big)]);
    assert_eq!(code, 3, "{report}");
}

#[test]
fn bad_configuration_exits_two() {
    let (code, _) = opstab(&["perturb-suite", "--trials", "2", "--eps", "2"]);
    assert_eq!(code, 2);
    let (code, _) = opstab(&["seesaw", path(&data("chsh.toml")), "--iters", "0"]);
    assert_eq!(code, 2);
}

#[test]
fn out_flag_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.jsonl");
    let (code, stdout) = opstab(&[
        "classical-value",
        path(&data("chsh.toml")),
        "--out",
        path(&out),
    ]);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    assert!(std::fs::read_to_string(&out).unwrap().contains("3/4"));
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    for args in [
        vec!["perturb-suite", "--trials", "40", "--seed", "5"],
        vec!["norm-enumerate", "--budget", "64"],
    ] {
        let mut with_input = args.clone();
        let unitary = data("single_unitary.toml");
        if args[0] == "norm-enumerate" {
            with_input.push(path(&unitary));
        }
        let mut one = with_input.clone();
        one.extend(["--threads", "1"]);
        let mut four = with_input.clone();
        four.extend(["--threads", "4"]);
        let a = opstab(&one);
        let b = opstab(&four);
        assert_eq!(a.0, 0);
        assert_eq!(a, b, "{args:?}");
    }
}
