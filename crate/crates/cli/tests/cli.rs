use serde_json::Value;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_magthresh")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn mu_json() {
    let out = run(&["mu", "--alpha", "2.3", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["alpha"], 2.3);
    assert!((v["mu"].as_f64().unwrap() - 0.3).abs() < 1e-12);
    assert_eq!(v["k_star"], -2);
    assert_eq!(v["integer_flux"], false);
    assert_eq!(v["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn kernel_below_spectrum_is_real() {
    let out = run(&["kernel", "--alpha", "0.3", "--m", "1", "--lambda", "-0.1", "--r", "2", "--rp", "3", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["im"].as_f64().unwrap().abs() <= 1e-10);
    for key in ["m", "lambda", "side", "r", "rp", "re", "im", "err"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn oracle_check_row() {
    let out = run(&["oracle-check", "--alpha", "0.3", "--m", "0", "--lambda", "0.05", "--r", "0.7", "--rp", "1.8", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out)["relative_diff"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn usage_errors_exit_two() {
    let out = run(&["mu"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(run(&["mu", "--alpha", "99"]).status.code(), Some(2));
    assert_eq!(run(&["gauge-check", "--field", "disc:1"]).status.code(), Some(2));
}

#[test]
fn failed_check_exits_one_with_json() {
    // The Y₀' part of lem-jy0 grows like log(1/z).
    let out = run(&["bounds", "--lemma", "jy0", "--json"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["pass"], false);
}

#[test]
fn config_is_echoed_and_hashed() {
    let dir = std::env::temp_dir().join(format!("magthresh-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("cfg.json");
    std::fs::write(&path, r#"{"seed": 9, "m_max": 12}"#).unwrap();
    let p = path.to_str().unwrap();
    let a = run(&["--config", p, "mu", "--alpha", "0.5", "--json"]);
    let b = run(&["mu", "--alpha", "0.5", "--json", "--config", p]);
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["config"]["seed"], 9);
    assert_eq!(v["config"]["m_max"], 12);
    assert_eq!(v["k_star_pair"], serde_json::json!([-1, 0]));
    let d = json(&run(&["mu", "--alpha", "0.5", "--json"]));
    assert_ne!(v["config_hash"], d["config_hash"]);
    std::fs::write(&path, r#"{"rel_tol": -1}"#).unwrap();
    assert_eq!(run(&["--config", p, "mu", "--alpha", "0.5"]).status.code(), Some(2));
}

#[test]
fn decay_fit_csv_columns_and_rerun_identity() {
    let args = ["decay-fit", "--alpha", "0.3", "--m", "0", "--points", "8", "--csv"];
    let a = run(&args);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    let text = String::from_utf8(a.stdout.clone()).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "t,re,im,abs,quad_err");
    assert_eq!(rows.len(), 9);
    for r in &rows[1..] {
        let v: Vec<f64> = r.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((v[1].hypot(v[2]) - v[3]).abs() <= 1e-12 * v[3]);
        assert!(v[3] <= 1.0);
    }
    assert_eq!(run(&args).stdout, a.stdout);
}

#[test]
fn decay_fit_window_too_short_is_usage_error() {
    let out = run(&["decay-fit", "--alpha", "0.3", "--m", "0", "--t-min", "100", "--t-max", "1000", "--json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gauge_check_gaussian() {
    let out = run(&["gauge-check", "--field", "gaussian:0.3,1", "--radii", "0.5,2", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["flux"].as_f64().unwrap() - 0.3).abs() < 1e-8);
    assert!(v["stokes_defect"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn hardy_csv() {
    let out = run(&["hardy", "--field", "gaussian:0.5,1", "--widths", "1,2,4", "--csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 4);
}
