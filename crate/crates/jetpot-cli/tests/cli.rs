use std::process::{Command, Output};

use jetpot::VerificationReport;
use serde_json::Value;

fn jetpot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jetpot"))
        .args(args)
        .env_remove("JETPOT_SEED")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json output")
}

fn tmp(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("jetpot-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn canonical_of_p_is_lambda_min() {
    let out = jetpot(&["canonical", "--set", "P", "--J0", "0,0,I", "--jet", r#"{"r":0,"p":[0,0],"A":[[2,0],[0,5]]}"#]);
    let v = json(&out);
    assert!((v["value"].as_f64().unwrap() - 2.0).abs() < 1e-8);
    assert_eq!(v["seed"], 42);
    // the dual operator is λ_max
    let out = jetpot(&["canonical", "--set", "P", "--dual", "--jet", "0,0,diag(2,5)"]);
    assert!((json(&out)["value"].as_f64().unwrap() - 5.0).abs() < 1e-8);
}

#[test]
fn canonical_of_a_catalog_zero_set() {
    let out = jetpot(&["canonical", "--set", "truncated_laplacian", "--k", "2", "--J0", "0,0,0.5I", "--jet", "0,0,diag(-3,1,5)"]);
    assert!((json(&out)["value"].as_f64().unwrap() + 2.0).abs() < 1e-8);
}

#[test]
fn zmp_scenario() {
    let out = jetpot(&["scenario", "zmp-failure", "--R", "1", "--Rprime", "1.5", "--n", "2", "--h", "0.01"]);
    let v = json(&out);
    assert_eq!(v["verdict"], "zmp_failure_exhibited");
    assert!((v["details"]["max_value"].as_f64().unwrap() - 0.5).abs() <= 0.01);
    assert!((v["details"]["argmax_radius"].as_f64().unwrap() - 1.0).abs() <= 0.02);
    assert!(v["anchor"].as_str().is_some_and(|a| !a.is_empty()));
}

#[test]
fn every_scenario_carries_its_anchor() {
    let v = json(&jetpot(&["scenario", "list"]));
    for s in v["scenarios"].as_array().unwrap() {
        assert!(!s["anchor"].as_str().unwrap().is_empty());
    }
    let v = json(&jetpot(&["scenario", "subaffine-plus", "--samples", "200"]));
    assert_eq!(v["verdict"], "counterexample_reproduced");
    assert!(v["anchor"].is_string());
}

#[test]
fn garding_eigs_of_det() {
    let v = json(&jetpot(&["garding", "eigs", "--poly", "det", "--A", "[[1,0],[0,-3]]"]));
    let lam: Vec<f64> = serde_json::from_value(v["eigenvalues"].clone()).unwrap();
    assert_eq!(lam.len(), 2);
    assert!((lam[0] + 3.0).abs() < 1e-10 && (lam[1] - 1.0).abs() < 1e-10);
}

#[test]
fn cone_queries() {
    let v = json(&jetpot(&["cone", "member", "--cone", "gamma:1", "--jet", "-0.5,[1,0],I"]));
    assert_eq!(v["result"], false);
    let v = json(&jetpot(&["cone", "polar", "--cone", "P", "--n", "2", "--jet", "0,0,I"]));
    assert_eq!(v["result"], true);
}

#[test]
fn output_is_deterministic() {
    let args = ["check", "compatibility", "--op", "det_MA", "--samples", "300", "--seed", "9"];
    let a = jetpot(&args);
    let b = jetpot(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let path = tmp("det.json");
    let p = path.to_str().unwrap();
    let c = jetpot(&[&args[..], &["--out", p]].concat());
    assert!(c.status.success() && c.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), a.stdout);
}

#[test]
fn reports_round_trip_through_the_schema() {
    let out = jetpot(&["check", "duality", "--n", "3", "--k", "2", "--R", "1", "--samples", "200"]);
    assert!(out.status.success());
    let r: VerificationReport = serde_json::from_slice(&out.stdout).unwrap();
    assert!(r.pass);
    assert_eq!(r.seed, 42);
    assert_eq!(r.to_json().as_bytes(), &out.stdout[..]);
}

#[test]
fn seed_comes_from_the_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_jetpot"))
        .args(["check", "tameness", "--op", "det_MA", "--samples", "50"])
        .env("JETPOT_SEED", "1234")
        .output()
        .unwrap();
    assert_eq!(json(&out)["seed"], 1234);
}

#[test]
fn csv_tables() {
    let out = jetpot(&["scenario", "zmp-failure", "--h", "0.1", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("x1,x2,margin,verdict\n"));
    let out = jetpot(&["ops", "list", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("description,name\n"));
    assert_eq!(text.lines().count(), 1 + 20);
}

#[test]
fn exit_codes() {
    assert_eq!(jetpot(&["ops", "show", "no_such_operator"]).status.code(), Some(2));
    assert_eq!(jetpot(&["canonical", "--set", "P", "--jet", "{not json"]).status.code(), Some(2));
    assert_eq!(jetpot(&["frobnicate"]).status.code(), Some(2));
    // a genuine violation from a check
    let out = jetpot(&["check", "monotonicity", "--op", "F_plus_kR", "--n", "2", "--k", "1", "--R", "1", "--cone", "R:1.01"]);
    assert_eq!(out.status.code(), Some(1));
    // a constrained operator refuses jets outside its constraint
    assert_eq!(jetpot(&["ops", "eval", "det_MA", "--jet", "0,0,diag(-1,1)"]).status.code(), Some(2));
}

#[test]
fn config_files() {
    let good = tmp("good.json");
    std::fs::write(
        &good,
        r#"{"command":["garding","eigs"],"args":{"poly":"det","A":"diag(1,-3)"},"seed":5}"#,
    )
    .unwrap();
    let v = json(&jetpot(&["--config", good.to_str().unwrap()]));
    assert_eq!(v["seed"], 5);
    assert_eq!(v["eigenvalues"][0], -3);

    let bad = tmp("bad.json");
    std::fs::write(&bad, r#"{"command":["scenario","list"],"colour":"red"}"#).unwrap();
    assert_eq!(jetpot(&["--config", bad.to_str().unwrap()]).status.code(), Some(2));
    let bad_flag = tmp("bad_flag.json");
    std::fs::write(&bad_flag, r#"{"command":["scenario","zmp-failure"],"args":{"Rprim":2}}"#).unwrap();
    assert_eq!(jetpot(&["--config", bad_flag.to_str().unwrap()]).status.code(), Some(2));
}
