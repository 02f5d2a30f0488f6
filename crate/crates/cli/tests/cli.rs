use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_deltamass"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("deltamass-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn membership_min_certifies_two() {
    let out = run(&["membership", "--kernel", "min", "--points", "1,2,3,...,50", "--target", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v[0]["verdict"]["kind"], "certified_bounded");
    assert!((v[0]["estimate"].as_f64().unwrap() - 2.0).abs() < 1e-9);
}

#[test]
fn membership_binomial_diverges() {
    let out = run(&["membership", "--kernel", "binomial", "--points", "0..20", "--target", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)[0]["verdict"]["kind"], "diverging");
}

#[test]
fn membership_sparse_generator_and_traces() {
    let dir = scratch("traces");
    let out = run(&[
        "membership",
        "--kernel",
        "min",
        "--points",
        "sparse:i*(i-1)/2",
        "--max-n",
        "30",
        "--target",
        "3,6",
        "--trace-dir",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    // x_i = i(i−1)/2 gives (2i−1)/((i−1)i); x_3 = 3, x_4 = 6
    assert!((v[0]["estimate"].as_f64().unwrap() - 5.0 / 6.0).abs() < 1e-10);
    assert!((v[1]["estimate"].as_f64().unwrap() - 7.0 / 12.0).abs() < 1e-10);
    let trace = std::fs::read_to_string(v[0]["trace_file"].as_str().unwrap()).unwrap();
    assert!(trace.starts_with("n,zeta,verdict_so_far\n"));
}

#[test]
fn membership_input_errors_exit_two() {
    assert_eq!(run(&["membership", "--kernel", "min", "--points", "/no/such/points.csv"]).status.code(), Some(2));
    assert_eq!(run(&["membership", "--kernel", "gauss", "--points", "1,2"]).status.code(), Some(2));
    assert_eq!(run(&["membership", "--kernel", "min", "--points", "1,2", "--target", "5"]).status.code(), Some(2));
    assert_eq!(run(&["membership", "--kernel", "min", "--points", "1,2", "--window", "0"]).status.code(), Some(2));
}

#[test]
fn membership_from_spec_file() {
    let spec = scratch("spec.json");
    std::fs::write(&spec, r#"{"kernel": "matrix", "matrix": [[2, 1, 0], [1, 2, 1], [0, 1, 2]]}"#).unwrap();
    let out = run(&["membership", "--kernel", spec.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().nth(1).unwrap().starts_with("#0,"));
}

#[test]
fn network_path_and_star() {
    let path = scratch("path.txt");
    std::fs::write(&path, "# unit path\n0 1 1\n1 2 1\n2 3 1\n3 4 1\n").unwrap();
    let out = run(&["network", "--edges", path.to_str().unwrap(), "--base", "0", "--target", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = &json(&out)[0];
    let got: Vec<f64> = ["degree", "m1", "m2", "covariance"].iter().map(|k| v[k].as_f64().unwrap()).collect();
    assert_eq!(got, vec![2.0, 2.0, 6.0, 2.0]);
    assert_eq!(v["bound_holds"], true);

    let star = scratch("star.txt");
    std::fs::write(&star, "c a 1\nc b 1\nc d 1\nc o 1\n").unwrap();
    let kernel_csv = scratch("green.csv");
    let out = run(&[
        "network",
        "--edges",
        star.to_str().unwrap(),
        "--base",
        "o",
        "--target",
        "c",
        "--export-kernel",
        kernel_csv.to_str().unwrap(),
    ]);
    let v = &json(&out)[0];
    let got: Vec<f64> = ["degree", "m1", "m2", "covariance"].iter().map(|k| v[k].as_f64().unwrap()).collect();
    assert_eq!(got, vec![4.0, 4.0, 20.0, 4.0]);
    assert!(std::fs::read_to_string(kernel_csv).unwrap().lines().count() == 5);
}

#[test]
fn network_disconnected_exits_two() {
    let path = scratch("broken.txt");
    std::fs::write(&path, "a b 1\nc d 1\n").unwrap();
    assert_eq!(run(&["network", "--edges", path.to_str().unwrap(), "--base", "a"]).status.code(), Some(2));
}

#[test]
fn moments_identity_on_min() {
    let out = run(&["moments", "--kernel", "min", "--points", "1..30", "--target", "1,10"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    for row in v.as_array().unwrap() {
        assert_eq!(row["mu_a"]["m0"], 1.0);
        assert_eq!(row["identity"]["pass"], true);
    }
    assert!((v[0]["mu_a"]["m1"].as_f64().unwrap() - 2.0).abs() < 1e-9);
}

#[test]
fn moments_binomial_reports_null() {
    let out = run(&["moments", "--kernel", "binomial", "--points", "0..20", "--target", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out)[0]["mu_a"]["m1"].is_null());
}

#[test]
fn interpolate_shannon_and_grid() {
    let input = scratch("interp.json");
    let pts: Vec<i32> = (-20..=20).collect();
    let samples: Vec<usize> = (0..pts.len()).collect();
    let pairings: Vec<f64> = pts.iter().map(|&n| if n == 0 { 1.0 } else { 0.0 }).collect();
    let body = serde_json::json!({
        "kernel": {"kernel": "sinc", "points": pts, "ordered": true},
        "samples": samples,
        "pairings": pairings,
        "grid": [0.5, 1.25, -3.7],
    });
    std::fs::write(&input, body.to_string()).unwrap();
    let grid = scratch("grid.csv");
    let out = run(&["interpolate", "--input", input.to_str().unwrap(), "--grid-out", grid.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert!((v["norm_sq"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((v["frame_bound"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let text = std::fs::read_to_string(grid).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let want = (std::f64::consts::PI * 0.5).sin() / (std::f64::consts::PI * 0.5);
    assert!((row[1].parse::<f64>().unwrap() - want).abs() < 1e-12);
}

#[test]
fn oracle_check_pass_and_negative_control() {
    let out = run(&["oracle-check"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 11);
    assert!(text.lines().all(|l| l.contains("PASS")));
    let bad = run(&["oracle-check", "--formula", "bm5,L3", "--perturb", "1e-6"]);
    assert_eq!(bad.status.code(), Some(1));
    let empty = run(&["oracle-check", "--formula", "", "--format", "csv"]);
    assert_eq!(empty.status.code(), Some(0));
    assert_eq!(String::from_utf8(empty.stdout).unwrap().lines().count(), 12);
    assert_eq!(run(&["oracle-check", "--formula", "nope"]).status.code(), Some(2));
}

#[test]
fn output_is_deterministic() {
    let args = ["membership", "--kernel", "bridge", "--points", "uniform:0.01", "--max-n", "60", "--target", "0.3,0.31"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}
