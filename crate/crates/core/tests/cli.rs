use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn moduli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_moduli")).args(args).env("MODULI_THREADS", "1").output().unwrap()
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn verlinde_reports_count_and_agreement() {
    let out = moduli(&["verlinde", "--genus", "2", "--level", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["count"], json!(10));
    assert_eq!(v["agree"], json!(true));
}

#[test]
fn dimension_entries_are_all_six() {
    let out = moduli(&["dimension", "--g", "2", "--n", "2", "--trials", "5", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    let dims: Vec<u64> = v["entries"].as_array().unwrap().iter().map(|e| e["dimension"].as_u64().unwrap()).collect();
    assert_eq!(dims, vec![6; 5]);
    assert_eq!(v["all_match"], json!(true));
}

#[test]
fn output_is_deterministic() {
    for args in [
        &["solve", "--g", "2", "--n", "3", "--alpha", "0.4,0.05,-0.45", "--seed", "3"][..],
        &["holonomy", "--n", "3", "--alpha", "0.4,0.05,-0.45", "--t", "0.1", "--steps", "512"][..],
        &["betas", "--n", "4", "--pattern", "1,3,4", "--seed", "5", "--format", "csv"][..],
    ] {
        let a = moduli(args);
        let b = moduli(args);
        assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn floats_carry_seventeen_significant_digits() {
    let out = moduli(&["holonomy", "--n", "2", "--alpha", "0.3,-0.3", "--steps", "256"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"alpha\":[2.9999999999999999e-1,-2.9999999999999999e-1]"), "{text}");
}

#[test]
fn usage_errors_exit_one_with_usage() {
    let out = moduli(&["dimension", "--g", "two"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    let out = moduli(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn numerical_failure_exits_two() {
    let out = moduli(&["solve", "--g", "2", "--n", "2", "--alpha", "0.3,-0.3", "--starts", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json_of(&out)["status"], json!("numerical_failure"));
}

#[test]
fn config_supplies_flags_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    std::fs::write(&config, r#"{"command": "verlinde", "genus": 3, "level": 1}"#).unwrap();
    let cfg = config.to_str().unwrap();
    let v = json_of(&moduli(&["--config", cfg]));
    assert_eq!(v["count"], json!(8));
    let v = json_of(&moduli(&["--config", cfg, "verlinde", "--level", "2"]));
    assert_eq!(v["count"], json!(36));
}

#[test]
fn out_file_is_written_whole() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("strata.json");
    let out = moduli(&["strata", "--n", "3", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["count"], json!(8));
    let leftovers: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(leftovers.len(), 1);
}

fn solve_to(dir: &Path, name: &str, seed: &str, t: &str) -> String {
    let path = dir.join(name);
    let out = moduli(&[
        "solve", "--g", "2", "--n", "3", "--alpha", "0.4,0.05,-0.45", "--t", t, "--seed", seed, "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    path.to_str().unwrap().to_string()
}

#[test]
fn implode_check_reads_solve_reports() {
    let dir = tempfile::tempdir().unwrap();
    let p = solve_to(dir.path(), "p.json", "1", "0.1");
    let out = moduli(&["implode-check", "--in", &p, "--in", &p, "--budget", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["report"]["equivalent"], json!(true));
    assert_eq!(v["report"]["confidence"], json!("certified"));
}

#[test]
fn residues_and_betas_round_trip_through_files() {
    let out = moduli(&["residues", "--n", "2", "--alpha", "0.3,-0.3"]);
    assert_eq!(out.status.code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("betas.json");
    let first = moduli(&["betas", "--n", "4", "--pattern", "2,4", "--seed", "2"]);
    let v = json_of(&first);
    assert_eq!(v["stratum"], json!({"I": [2, 4], "k": 0}));
    std::fs::write(&path, serde_json::to_string(&v["betas"]).unwrap()).unwrap();
    let second = moduli(&["betas", "--in", path.to_str().unwrap()]);
    assert_eq!(json_of(&second)["stratum"], v["stratum"]);
    let values = |v: &Value| -> Vec<f64> {
        v["pairings"].as_array().unwrap().iter().flat_map(|p| p["value"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap())).collect()
    };
    let (a, b) = (values(&v), values(&json_of(&second)));
    assert_eq!(a.len(), b.len());
    assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-12));
}
