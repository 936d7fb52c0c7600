use std::process::{Command, Output};

use serde_json::Value;

fn anderson(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_anderson"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_ok(args: &[&str]) -> Value {
    let out = anderson(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn json_err(args: &[&str]) -> Value {
    let out = anderson(args);
    assert!(!out.status.success(), "{args:?} should fail");
    serde_json::from_slice(&out.stderr).expect("stderr is JSON")
}

#[test]
fn eig_free_box() {
    let v = json_ok(&["eig", "--spec", "pointmass:0", "--d", "1", "--n", "10"]);
    let expected = 2.0 - 2.0 * (std::f64::consts::PI / 22.0).cos();
    assert!((v["lambda"].as_f64().unwrap() - expected).abs() < 1e-12);
    assert!(v["residual"].as_f64().unwrap() >= 0.0);
    assert!(v["iterations"].is_u64());
}

#[test]
fn landscape_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("l.csv");
    let v = json_ok(&[
        "landscape", "--spec", "bernoulli:0.3", "--d", "2", "--n", "4", "--seed", "3",
        "--csv", csv.to_str().unwrap(),
    ]);
    let sup = v["sup_norm"].as_f64().unwrap();
    let product = v["product"].as_f64().unwrap();
    assert!((product - sup * v["lambda"].as_f64().unwrap()).abs() < 1e-12 * product);
    assert!(product >= 1.0 - 1e-9);
    assert_eq!(v["argmax"].as_array().unwrap().len(), 2);
    let text = std::fs::read_to_string(csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x_1,x_2,value"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 81);
    assert!(rows[0].starts_with("-4,-4,"));
    let max = rows
        .iter()
        .map(|r| r.rsplit(',').next().unwrap().parse::<f64>().unwrap())
        .fold(0.0, f64::max);
    assert_eq!(max, sup);
}

#[test]
fn yn_record() {
    let v = json_ok(&["yn", "--spec", "bernoulli:0.3", "--d", "1", "--n", "100", "--seed", "2"]);
    for key in ["n", "epsilon", "Y", "center", "y_n", "ratio"] {
        assert!(!v[key].is_null(), "{key}");
    }
    assert_eq!(v["epsilon"].as_f64(), Some(0.0));
    let ratio = v["Y"].as_f64().unwrap() / v["y_n"].as_f64().unwrap();
    assert_eq!(v["ratio"].as_f64(), Some(ratio));
}

#[test]
fn experiment_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let v = json_ok(&[
        "experiment", "--kind", "fig2", "--spec", "bernoulli:0.3", "--d", "1", "--n", "50,100",
        "--trials", "40", "--seed", "5", "--bins", "10", "--out", out,
    ]);
    let summaries = v["summaries"].as_array().unwrap();
    assert_eq!(summaries.len(), 2);
    for s in summaries {
        assert_eq!(s["count"], 40);
        for key in ["n", "mean", "std", "min", "max", "histogram"] {
            assert!(!s[key].is_null(), "{key}");
        }
        assert_eq!(s["histogram"]["counts"].as_array().unwrap().len(), 10);
    }
    let csv = std::fs::read_to_string(dir.path().join("fig2_n50.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("trial,n,lambda,sup_l,statistic"));
    assert_eq!(csv.lines().count(), 41);
    assert!(dir.path().join("fig2_n100_summary.json").exists());

    let v = json_ok(&[
        "experiment", "--kind", "ids", "--spec", "uniform01", "--n", "30", "--trials", "2",
        "--t-grid", "0,1,2,9", "--out", out,
    ]);
    let ids = v["curves"][0]["ids"].as_array().unwrap();
    assert_eq!(ids.first().unwrap().as_f64(), Some(0.0));
    assert_eq!(ids.last().unwrap().as_f64(), Some(1.0));
}

#[test]
fn constants_report() {
    let v = json_ok(&["constants", "--spec", "bernoulli:0.3", "--d", "1", "--n", "100"]);
    assert!((v["conjecture_constant"].as_f64().unwrap() - 1.2337005501361697).abs() < 1e-15);
    assert!((v["y_n"].as_f64().unwrap() - 6.456).abs() < 1e-3);
    assert!((v["eig_normalizer"].as_f64().unwrap() - 0.02399).abs() < 1e-5);
}

#[test]
fn verify_suite() {
    let v = json_ok(&["verify", "--suite", "detpath", "--seed", "1"]);
    assert_eq!(v["pass"], true);
    assert_eq!(v["extremes"]["free_mismatches"].as_f64(), Some(0.0));
}

#[test]
fn floats_have_seventeen_digits() {
    let out = anderson(&["constants", "--spec", "uniform01", "--d", "2", "--n", "50"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"omega\": 3.1415926535897931e0"), "{text}");
}

#[test]
fn errors_are_json() {
    let e = json_err(&["eig", "--spec", "bernoulli:1.5", "--n", "3"]);
    assert_eq!(e["error"], "usage");
    let e = json_err(&["constants", "--spec", "bernoulli:0.3", "--n", "1"]);
    assert_eq!(e["error"], "invalid_argument");
    let e = json_err(&["eig", "--spec", "uniform01", "--d", "3", "--n", "200"]);
    assert_eq!(e["error"], "size_cap");
    let e = json_err(&["verify", "--suite", "nope"]);
    assert!(e["message"].as_str().unwrap().contains("nope"));
    let out = anderson(&["--help"]);
    assert!(out.status.success());
}
