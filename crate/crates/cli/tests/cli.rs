use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ckmorita"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn matrix(rows: &[&[i64]]) -> Value {
    json!({ "rows": rows.len(), "cols": rows[0].len(), "entries": rows })
}

fn write(dir: &Path, name: &str, v: &Value) {
    fs::write(dir.join(name), v.to_string()).unwrap();
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn standard_files() -> TempDir {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "A.json", &matrix(&[&[2]]));
    write(dir.path(), "B.json", &matrix(&[&[1, 1], &[1, 1]]));
    write(dir.path(), "C.json", &matrix(&[&[1, 1]]));
    write(dir.path(), "D.json", &matrix(&[&[1], &[1]]));
    write(dir.path(), "G.json", &matrix(&[&[1, 1], &[1, 0]]));
    dir
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn solve_finds_the_standard_witness() {
    let dir = standard_files();
    let out = run(dir.path(), &["elemeq", "solve", "A.json", "B.json"]);
    assert_eq!(code(&out), 0);
    let w = stdout_json(&out);
    assert_eq!(w["C"], matrix(&[&[1, 1]]));
    assert_eq!(w["D"], matrix(&[&[1], &[1]]));
}

#[test]
fn solve_reports_infeasible_and_budget() {
    let dir = standard_files();
    let out = run(dir.path(), &["elemeq", "solve", "A.json", "G.json"]);
    assert_eq!(code(&out), 1);
    assert_eq!(stdout_json(&out)["status"], "infeasible");

    write(dir.path(), "X.json", &matrix(&[&[2, 1], &[1, 1]]));
    write(dir.path(), "Y.json", &matrix(&[&[1, 1], &[1, 2]]));
    let out = run(dir.path(), &["elemeq", "solve", "X.json", "Y.json", "--node-budget", "1"]);
    assert_eq!(code(&out), 2);
    assert_eq!(stdout_json(&out)["status"], "budget_exhausted");
}

#[test]
fn solve_lists_several_witnesses() {
    let dir = standard_files();
    let out = run(dir.path(), &["elemeq", "solve", "B.json", "B.json", "--limit", "3"]);
    assert_eq!(code(&out), 0);
    assert!(!stdout_json(&out).as_array().unwrap().is_empty());
}

#[test]
fn verify_elementary_exit_codes() {
    let dir = standard_files();
    assert_eq!(code(&run(dir.path(), &["elemeq", "verify", "A.json", "B.json", "C.json", "D.json"])), 0);
    write(dir.path(), "D2.json", &matrix(&[&[2], &[0]]));
    assert_eq!(code(&run(dir.path(), &["elemeq", "verify", "A.json", "B.json", "C.json", "D2.json"])), 1);
}

#[test]
fn morita_pipeline() {
    let dir = standard_files();
    let out = run(dir.path(), &["morita", "build", "A.json", "B.json", "C.json", "D.json", "-o", "cert.json"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(dir.path(), &["morita", "verify", "cert.json", "--report", "report.json"]);
    assert_eq!(code(&out), 0);
    let report = read_json(&dir.path().join("report.json"));
    assert_eq!(report["passed"], true);
    let checks = report["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 13);
    assert!(checks.iter().all(|c| c["status"] == "pass"));

    let out = run(dir.path(), &["morita", "reconstruct", "cert.json"]);
    assert_eq!(code(&out), 0);
    let rec = stdout_json(&out);
    assert_eq!(rec["C"], matrix(&[&[1, 1]]));
    assert_eq!(rec["D"], matrix(&[&[1], &[1]]));
}

#[test]
fn tampered_certificate_fails_and_still_reports() {
    let dir = standard_files();
    run(dir.path(), &["morita", "build", "A.json", "B.json", "C.json", "D.json", "-o", "cert.json"]);
    let mut cert = read_json(&dir.path().join("cert.json"));
    cert["phi_A"]["a1"] = json!(["c1", "d2"]);
    write(dir.path(), "bad.json", &cert);
    let out = run(dir.path(), &["morita", "verify", "bad.json", "--report", "report.json"]);
    assert_eq!(code(&out), 1);
    let report = read_json(&dir.path().join("report.json"));
    assert_eq!(report["passed"], false);
    assert_eq!(report["checks"][4]["status"], "fail");
}

#[test]
fn ck_equality_and_normal_form() {
    let dir = standard_files();
    write(dir.path(), "O2.json", &matrix(&[&[1, 1], &[1, 1]]));
    for m in ["O2.json", "A.json"] {
        let out = run(dir.path(), &["ck", "eq", "--matrix", m, "--lhs", "S(a1)* S(a1)", "--rhs", "1"]);
        assert_eq!(code(&out), 0, "{m}");
    }
    let out = run(dir.path(), &["ck", "eq", "--matrix", "G.json", "--lhs", "S(a2)* S(a2)", "--rhs", "1"]);
    assert_eq!(code(&out), 1);
    let out = run(dir.path(), &["ck", "normalize", "--matrix", "G.json", "--expr", "S(a2)* S(a2)"]);
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "S(a1) S(a1)*");
    let out = run(dir.path(), &["ck", "normalize", "--matrix", "G.json", "--expr", "S(a1"]);
    assert_eq!(code(&out), 64);
}

#[test]
fn invariants_json() {
    let dir = standard_files();
    let out = run(dir.path(), &["invariants", "G.json", "--traces", "4", "--entropy-tol", "1/1000"]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["traces"], json!([1, 3, 4, 7]));
    assert_eq!(v["det_i_minus_a"], json!(-1));
}

#[test]
fn chain_search_and_verify() {
    let dir = standard_files();
    let out = run(dir.path(), &["sse", "search", "A.json", "B.json", "--max-steps", "2"]);
    assert_eq!(code(&out), 0);
    fs::write(dir.path().join("chain.json"), &out.stdout).unwrap();
    assert_eq!(code(&run(dir.path(), &["sse", "verify", "chain.json"])), 0);

    let out = run(dir.path(), &["sse", "search", "A.json", "G.json", "--max-steps", "2"]);
    assert_eq!(code(&out), 1);
    assert!(stdout_json(&out)["separating_invariant"].is_string());
}

#[test]
fn error_exit_codes() {
    let dir = standard_files();
    assert_eq!(code(&run(dir.path(), &["invariants", "missing.json"])), 64);
    fs::write(dir.path().join("junk.json"), "[1,").unwrap();
    assert_eq!(code(&run(dir.path(), &["invariants", "junk.json"])), 64);
    assert_eq!(code(&run(dir.path(), &["elemeq", "solve", "A.json", "B.json", "--bogus"])), 64);
    write(dir.path(), "R.json", &matrix(&[&[1, 1], &[0, 1]]));
    let out = run(dir.path(), &["elemeq", "solve", "R.json", "R.json"]);
    assert_eq!(code(&out), 65);
    assert!(String::from_utf8_lossy(&out.stderr).contains("irreducible"));
    write(dir.path(), "P.json", &matrix(&[&[0, 1], &[1, 0]]));
    assert_eq!(code(&run(dir.path(), &["elemeq", "solve", "P.json", "P.json"])), 65);
}
