//! End-to-end tests driving the compiled binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hadamaq"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .parent()
        .and_then(Path::parent)
        .expect("crates/hadamaq-cli sits two levels below the root")
        .to_path_buf()
}

#[test]
fn analyze_fourier_six_writes_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let json_path = dir.path().join("r.json");
    let out = run(&[
        "analyze",
        "fourier:6",
        "--json",
        json_path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(report["schema"], "hadamaq-report/1");
    assert_eq!(
        report["decomposition"]["factor_sizes"],
        serde_json::json!([6])
    );
    assert_eq!(report["group"]["label"], "cyclic(6)");
    assert_eq!(report["butson_level"], 6);
}

#[test]
fn analyze_rejects_invalid_matrix_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.chm");
    std::fs::write(&path, "chm v1 n=2 mode=exact order=1\n0 0\n0 0\n").unwrap();
    let out = run(&["analyze", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_two() {
    let out = run(&["analyze", "petrescu:7"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["mq", "--q", "i"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn catalogue_list_and_emit() {
    let out = run(&["catalogue", "list"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("fourier:<n>"));

    let out = run(&["catalogue", "emit", "tao"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("chm v1 n=6 mode=exact order=3"));
}

#[test]
fn tensor_writes_parsable_chm() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.chm");
    let out = run(&[
        "tensor",
        "fourier:2",
        "fourier:3",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("chm v1 n=6 mode=exact order=6"));

    // The emitted file analyzes as cyclic of order 6.
    let out = run(&["decompose", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("factors [6]"));
}

#[test]
fn decompose_reports_noncommutative_with_exit_one() {
    let out = run(&["decompose", "haagerup"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("not closed"), "stderr: {err}");
}

#[test]
fn scramble_is_seed_deterministic_and_preserves_invariants() {
    let a = run(&["scramble", "fourier:5", "--seed", "11"]);
    let b = run(&["scramble", "fourier:5", "--seed", "11"]);
    let c = run(&["scramble", "fourier:5", "--seed", "12"]);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));
    assert_ne!(stdout(&a), stdout(&c));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.chm");
    std::fs::write(&path, stdout(&a)).unwrap();
    let out = run(&["decompose", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("factors [5]"));
}

#[test]
fn mq_family_command() {
    let out = run(&["mq", "--q", "1/6", "--check-all"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("predicted group Z6:Z2 (order 12)"));
    assert!(text.contains("realized order 12"));
    assert!(text.contains("factorization checks pass"));

    // Exact parameters of any order classify as finite: n = 97, order 4n.
    let out = run(&["mq", "--q", "1/97"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("realized order 388"));
}

#[test]
fn square_group_of_shipped_example() {
    let path = workspace_root().join("data/five_by_five.msq");
    let out = run(&["square", "group", path.to_str().unwrap()]);
    assert!(out.status.success(), "missing {}", path.display());
    let text = stdout(&out);
    assert!(text.contains("order 120"));
    assert!(text.contains("symmetric(5)"));
}

#[test]
fn json_output_is_deterministic() {
    let a = run(&["analyze", "mq:1/4", "--json", "-"]);
    let b = run(&["analyze", "mq:1/4", "--json", "-"]);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));
}
