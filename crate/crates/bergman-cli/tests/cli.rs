//! End-to-end runs of the `bergman` binary: exit codes, report shape,
//! CSV headers, and byte determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bergman"))
}

fn asset(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("assets").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary should spawn")
}

/// Writes a scenario into a per-test temp file and returns its path.
fn temp_scenario(stem: &str, body: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("bergman-cli-{}-{stem}.toml", std::process::id()));
    std::fs::write(&path, body).unwrap();
    path
}

const MINIMAL: &str = r#"
name = "cli-test"

[symbols]
u = "1"
phi = "z + i"

[exponents]
p = 2.0
q = 2.0
alpha = 0.0
"#;

#[test]
fn selftest_exits_zero() {
    let out = run(&["selftest"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("[PASS]"));
    assert!(!text.contains("[FAIL]"), "{text}");
}

#[test]
fn check_bounded_emits_versioned_report() {
    let shift = asset("shift.toml");
    let out = run(&["check-bounded", "--scenario", shift.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["schema"], "bergman-report/v1");
    assert_eq!(report["command"], "check-bounded");
    assert_eq!(report["payload"]["certificate"]["verdict"], "bounded");
    assert_eq!(report["scenario"]["phi"], "z + i");
}

#[test]
fn unbounded_verdict_is_still_conclusive() {
    let out = run(&["check-bounded", "--scenario", asset("identity-upgrade.toml").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["payload"]["certificate"]["verdict"], "unbounded");
}

#[test]
fn malformed_symbol_is_rejected_with_offset() {
    let path = temp_scenario("parse", &MINIMAL.replace("z + i", "z + "));
    let out = run(&["check-bounded", "--scenario", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("byte"), "{err}");
}

#[test]
fn missing_scenario_file_exits_one() {
    let out = run(&["check-bounded", "--scenario", "/nonexistent/nowhere.toml"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn unknown_scenario_key_is_rejected() {
    let path = temp_scenario("unknown", &format!("{MINIMAL}\n[exponents.extra]\nvalue = 1\n"));
    let out = run(&["check-bounded", "--scenario", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn csv_sweep_has_stable_header() {
    let out = run(&[
        "check-bounded",
        "--scenario",
        asset("shift.toml").to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("sweep,x,y,value,error_bound,converged"));
}

#[test]
fn reports_are_byte_identical_across_runs_and_threads() {
    let scenario = asset("borderline.toml");
    let base = run(&["weight-class", "--scenario", scenario.to_str().unwrap()]);
    let again = run(&["weight-class", "--scenario", scenario.to_str().unwrap()]);
    let threaded = run(&[
        "weight-class",
        "--scenario",
        scenario.to_str().unwrap(),
        "--threads",
        "2",
    ]);
    assert_eq!(base.stdout, again.stdout);
    assert_eq!(base.stdout, threaded.stdout);
}

#[test]
fn starved_quadrature_exits_two() {
    let path = temp_scenario("starved", &format!("{MINIMAL}\n[quadrature]\nmax_cells = 8\n"));
    let out = run(&["check-bounded", "--scenario", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["payload"]["certificate"]["verdict"], "inconclusive");
}

#[test]
fn out_flag_writes_the_report_to_disk() {
    let target =
        std::env::temp_dir().join(format!("bergman-cli-{}-out.json", std::process::id()));
    let out = run(&[
        "check-bounded",
        "--scenario",
        asset("shift.toml").to_str().unwrap(),
        "--out",
        target.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(&target).unwrap()).unwrap();
    assert_eq!(report["schema"], "bergman-report/v1");
    std::fs::remove_file(&target).ok();
}
