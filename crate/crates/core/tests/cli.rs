mod common;

use std::process::{Command, Output};

use common::data;
use serde_json::Value;

fn tsirelson(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tsirelson")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn path(name: &str) -> String {
    data(name).to_string_lossy().into_owned()
}

#[test]
fn elliptope_bound_from_file() {
    let out = tsirelson(&["bound", "--method", "elliptope", &path("chsh.json")]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert!((v["bound"].as_f64().unwrap() - 0.41421356).abs() < 1e-3);
    assert_eq!(v["method"], "elliptope");
    assert!(v["witness"].is_array());
}

#[test]
fn npa_bound_levels() {
    for level in ["1", "1ab", "2"] {
        let out = tsirelson(&["bound", "--method", "npa", "--level", level, "--builtin", "chsh"]);
        assert_eq!(out.status.code(), Some(0));
        let b = stdout_json(&out)["bound"].as_f64().unwrap();
        assert!((b - 0.41421356).abs() < 1e-3, "level {level}: {b}");
    }
}

#[test]
fn npa_bound_from_coefficient_table() {
    let dir = tempfile::tempdir().unwrap();
    // Agreement on three pairs, disagreement on the last: classical 3, quantum 2 + √2.
    let table = r#"{"outcomes_a":[2,2],"outcomes_b":[2,2],"V":{"ab|ij":[
        [[[1,0],[0,1]],[[1,0],[0,1]]],
        [[[1,0],[0,1]],[[0,1],[1,0]]]]}}"#;
    let file = dir.path().join("table.json");
    std::fs::write(&file, table).unwrap();
    let out = tsirelson(&["bound", "--method", "npa", "--level", "1", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let b = stdout_json(&out)["bound"].as_f64().unwrap();
    assert!((b - (2.0 + 2f64.sqrt())).abs() < 1e-3, "{b}");
}

#[test]
fn rmet_counterexample_exits_one() {
    let out = tsirelson(&["check", "nosignalling", &path("rmet_violation.json")]);
    assert_eq!(out.status.code(), Some(1));
    let v = stdout_json(&out);
    assert_eq!(v["violations"][0]["inequality"], "sum_at_most_two");
}

#[test]
fn bell_polytope_and_elliptope_checks() {
    let out = tsirelson(&["check", "bellpolytope", &path("rmet_violation.json")]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out)["verdict"], "outside");
    let out = tsirelson(&["check", "elliptope", &path("rmet_violation.json")]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["verdict"], "inside");
}

#[test]
fn realize_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let out_file = dir.path().join("realization.json");
    let out = tsirelson(&["realize", &path("chsh_gram.json"), "--out", out_file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["nu"], 1);
    let out = tsirelson(&["verify", out_file.to_str().unwrap(), &path("chsh_gram.json")]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout_json(&out)["max_deviation"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn reduce_is_seeded() {
    let a = tsirelson(&["reduce", "--epsilon", "0.5", "--seed", "3", &path("chsh_gram.json")]);
    let b = tsirelson(&["reduce", "--epsilon", "0.5", "--seed", "3", &path("chsh_gram.json")]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout_json(&a)["report"]["target_met"].as_bool().unwrap());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = ["bound", "--method", "elliptope_rmet", "--builtin", "chsh-pm"];
    assert_eq!(tsirelson(&args).stdout, tsirelson(&args).stdout);
}

#[test]
fn stabilizer_dumps_match_golden_files() {
    for nu in 1..=3 {
        let out = tsirelson(&["stabilizer", "--nu", &nu.to_string(), "--dump"]);
        assert_eq!(out.status.code(), Some(0));
        let golden = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("tests/golden/stabilizer_nu{nu}.txt"));
        assert_eq!(String::from_utf8(out.stdout).unwrap(), std::fs::read_to_string(golden).unwrap(), "ν = {nu}");
    }
}

#[test]
fn table_reproduces_both_columns() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(data("chsh.json"), dir.path().join("chsh.json")).unwrap();
    let out = tsirelson(&["table", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let row = &stdout_json(&out)["rows"][0];
    assert_eq!(row["name"], "chsh");
    for col in ["bound_i", "bound_ii"] {
        assert!((row[col].as_f64().unwrap() - 0.414).abs() < 1e-3, "{row}");
    }
    let only_ii = stdout_json(&tsirelson(&["table", "--method", "ii", dir.path().to_str().unwrap()]));
    assert!(only_ii["rows"][0].get("bound_i").is_none());
}

#[test]
fn malformed_json_reports_path() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.json");
    std::fs::write(&file, r#"{"m":1,"n":1,"convention":"zero_one","marginals_a":[0.5],"marginals_b":[0.5],"joint":[[true]]}"#)
        .unwrap();
    let out = tsirelson(&["check", "nosignalling", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("joint[0][0]"), "{err}");
}

#[test]
fn missing_file_and_bad_flags_exit_two() {
    assert_eq!(tsirelson(&["classical-max", "/nonexistent/f.json"]).status.code(), Some(2));
    assert_eq!(tsirelson(&["bound", "--method", "simplex", "--builtin", "chsh"]).status.code(), Some(2));
    assert_eq!(tsirelson(&["stabilizer", "--nu", "0"]).status.code(), Some(2));
}

#[test]
fn exhausted_iterations_exit_three() {
    let out = tsirelson(&["bound", "--method", "elliptope", "--builtin", "chsh", "--max-iter", "3"]);
    assert_eq!(out.status.code(), Some(3));
}
