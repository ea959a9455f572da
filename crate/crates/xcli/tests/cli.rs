use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn xcli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xcli")).args(args).output().expect("xcli runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn verdict(r: &Value, name: &str) -> bool {
    r["verdicts"].as_array().unwrap().iter().find(|v| v["name"] == name).unwrap()["pass"].as_bool().unwrap()
}

fn column<'a>(r: &'a Value, table: &str, col: &str) -> Vec<&'a str> {
    let t = r["tables"].as_array().unwrap().iter().find(|t| t["name"] == table).unwrap();
    let i = t["header"].as_array().unwrap().iter().position(|h| h == col).unwrap();
    t["rows"].as_array().unwrap().iter().map(|row| row[i].as_str().unwrap()).collect()
}

#[test]
fn passing_verdicts_exit_zero() {
    let out = xcli(&["--psi", "q^(-2*t)", "approx", "witness", "--point", "X^-1", "--shell", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(verdict(&json(&out), "witness_found"));
}

#[test]
fn failed_verdict_exits_two() {
    let out = xcli(&["--psi", "q^(-20*t)", "approx", "witness", "--point", "X^-1+2*X^-3+X^-5", "--shell", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!verdict(&json(&out), "witness_found"));
}

#[test]
fn errors_exit_one() {
    let out = xcli(&["khintchine"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("psi"));
}

#[test]
fn cell_budget_is_enforced() {
    let out = xcli(&["--max-cells", "5", "biggrad"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
}

#[test]
fn tuple_budget_is_enforced() {
    let out = xcli(&["--psi", "q^(-2*t)", "--max-tuples", "3", "approx", "witness", "--point", "X^-1", "--shell", "2"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn delta_at_least_one_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "delta_exps = [\"0\"]\ngrid = 3\n").unwrap();
    let out = xcli(&["--config", cfg.to_str().unwrap(), "biggrad"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn eps_above_rho_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "domain_center = [\"1\"]\ndomain_radius = 6\n[qn]\neps_exps = [-1]\nmax_depth = 8\n").unwrap();
    let out = xcli(&["--config", cfg.to_str().unwrap(), "qn"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("exceeds"));
}

#[test]
fn zero_psi_gives_zero_measures() {
    let out = xcli(&["--psi", "0", "--grid", "3", "--shells", "1:2", "khintchine"]);
    let r = json(&out);
    for col in ["shell_sum", "shell_measure", "tail_measure", "tail_sum", "hit_measure", "hit_fraction"] {
        assert!(column(&r, "shells", col).iter().all(|v| *v == "0"), "{col}");
    }
}

#[test]
fn inverted_shell_range_is_rejected() {
    let out = xcli(&["--psi", "q^(-2*t)", "--grid", "3", "--shells", "2:1", "khintchine"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn reruns_are_byte_identical() {
    let cfg = configs().join("khintchine_convergent.toml");
    let a = xcli(&["--config", cfg.to_str().unwrap(), "--grid", "4", "khintchine"]);
    let b = xcli(&["--config", cfg.to_str().unwrap(), "--grid", "4", "khintchine"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn out_dir_gets_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("khintchine_convergent.toml");
    let out = xcli(&["--config", cfg.to_str().unwrap(), "--grid", "4", "--out", dir.path().to_str().unwrap(), "khintchine"]);
    assert_eq!(out.status.code(), Some(0));
    let js: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("khintchine.json")).unwrap()).unwrap();
    assert_eq!(js["tables"][0], "khintchine_shells.csv");
    let csv = std::fs::read_to_string(dir.path().join("khintchine_shells.csv")).unwrap();
    assert!(csv.starts_with("t,shell_sum,shell_measure,tail_measure,tail_sum,hit_measure,hit_fraction\n"));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn convergent_tails_decrease() {
    let cfg = configs().join("khintchine_convergent.toml");
    let r = json(&xcli(&["--config", cfg.to_str().unwrap(), "khintchine"]));
    assert_eq!(column(&r, "shells", "tail_measure"), ["73/243", "43/243", "47/729"]);
    assert!(verdict(&r, "tail_measure_nonincreasing_in_T0"));
    assert!(verdict(&r, "tail_bounded_by_constant_times_tail_sum"));
}

#[test]
fn lattice_minima_satisfy_minkowski() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.json");
    std::fs::write(&m, r#"[["X","1"],["0","X^-2"]]"#).unwrap();
    let r = json(&xcli(&["lattice", "minima", "--matrix", m.to_str().unwrap()]));
    assert_eq!(r["summary"]["minima"], serde_json::json!([-1, 0]));
    assert!(verdict(&r, "minkowski_equality"));
}

#[test]
fn monomial_is_good() {
    let r = json(&xcli(&["measure", "good", "--g", "x^2", "--eps-exps=-3,-4"]));
    assert!(verdict(&r, "good_bound_holds"));
}

#[test]
fn eval_reports_form_value() {
    let r = json(&xcli(&["approx", "eval", "--point", "X^-1", "--coeffs", "X,0"]));
    assert_eq!(r["summary"]["f"][1].as_str().unwrap().split_whitespace().next(), Some("X^-2"));
    // a₀ + X·X⁻¹ vanishes for a₀ = -1 = 2 in F_3.
    assert_eq!(r["summary"]["best_a0"].as_str().unwrap().split_whitespace().next(), Some("2"));
}
