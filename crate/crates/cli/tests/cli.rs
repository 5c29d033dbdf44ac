use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_fil");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn small(cmd: &str, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![cmd, "--out", out.to_str().unwrap(), "--nmax", "4", "--precision", "double"];
    args.extend_from_slice(extra);
    run(&args)
}

fn report(out: &Path, name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join(format!("{name}.json"))).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn basis_checks_deltas() {
    let dir = TempDir::new().unwrap();
    let o = small("basis", dir.path(), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = report(dir.path(), "basis");
    assert_eq!(r["schema"], "fil-report-v1");
    assert_eq!(r["result"]["pass"], true);
    assert_eq!(r["result"]["rebuilt"], true);
    assert!(r["result"]["max_delta_error"].as_f64().unwrap() < 1e-7);
    let csv = fs::read_to_string(dir.path().join("basis_deltas.csv")).unwrap();
    assert!(csv.starts_with("# fil-report-v1 config_hash="));
    assert_eq!(csv.lines().count(), 2 + 25);

    let o = small("basis", dir.path(), &[]);
    assert!(o.status.success());
    assert_eq!(report(dir.path(), "basis")["result"]["rebuilt"], false);
}

#[test]
fn corrupt_cache_is_rebuilt() {
    let dir = TempDir::new().unwrap();
    assert!(small("basis", dir.path(), &[]).status.success());
    fs::write(dir.path().join("cache/basis.bin"), b"not a table").unwrap();
    let o = small("basis", dir.path(), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = report(dir.path(), "basis");
    assert_eq!(r["result"]["rebuilt"], true);
    assert_eq!(r["result"]["pass"], true);
}

#[test]
fn double_precision_refuses_large_index() {
    let dir = TempDir::new().unwrap();
    let o = run(&["basis", "--out", dir.path().to_str().unwrap(), "--nmax", "30", "--precision", "double"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("30"), "{}", stderr(&o));
    assert!(!dir.path().join("basis.json").exists());
}

#[test]
fn perturb_without_perturbation_is_identity() {
    let dir = TempDir::new().unwrap();
    assert!(small("basis", dir.path(), &[]).status.success());
    let o = small("perturb", dir.path(), &["--eps", "zero"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = report(dir.path(), "perturb");
    assert_eq!(r["result"]["hs_defect"].as_f64(), Some(0.0));
    assert_eq!(r["result"]["node_delta_error"].as_f64(), Some(0.0));
}

#[test]
fn small_perturbation_inverts() {
    let dir = TempDir::new().unwrap();
    assert!(small("basis", dir.path(), &[]).status.success());
    let o = small("perturb", dir.path(), &["--eps", "power:0.01,1.5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = report(dir.path(), "perturb");
    let d = r["result"]["hs_defect"].as_f64().unwrap();
    assert!(d > 0.0 && d < 1.0, "{d}");
    assert!(r["result"]["neumann_vs_direct"].as_f64().unwrap() < 1e-9);
    assert!(r["result"]["node_delta_error"].as_f64().unwrap() < 1e-5);
}

#[test]
fn missing_cache_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let o = small("reconstruct", dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("fil basis"), "{}", stderr(&o));
}

#[test]
fn zero_function_reconstructs_to_zero() {
    let dir = TempDir::new().unwrap();
    assert!(small("basis", dir.path(), &[]).status.success());
    let o = small("reconstruct", dir.path(), &["--function", "zero", "--grid", "-2:2:0.1", "--eps", "power:0.01,1.5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = report(dir.path(), "reconstruct");
    assert_eq!(r["result"]["sup_error"].as_f64(), Some(0.0));
    let csv = fs::read_to_string(dir.path().join("reconstruct.csv")).unwrap();
    for line in csv.lines().skip(2) {
        let rec: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert_eq!(rec, 0.0);
    }
}

#[test]
fn unperturbed_reconstruction_is_direct_synthesis() {
    let dir = TempDir::new().unwrap();
    assert!(small("basis", dir.path(), &[]).status.success());
    let o = small("reconstruct", dir.path(), &["--grid", "-2:2:0.1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(report(dir.path(), "reconstruct")["result"]["identical_to_direct_synthesis"], true);
}

#[test]
fn nodes_classifies_scaled_sequence() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["nodes", "--out", out, "--seq", "scaled:0.9", "--count", "2001"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().last(), Some("supercritical"));
    assert_eq!(report(dir.path(), "nodes")["result"]["classification"]["verdict"], "supercritical");
    let o = run(&["nodes", "--out", out, "--seq", "scaled:1.2", "--count", "2001"]);
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().last(), Some("subcritical"));
}

#[test]
fn empty_sequence_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let seq = dir.path().join("empty.txt");
    fs::write(&seq, "").unwrap();
    let o = run(&["nodes", "--out", dir.path().to_str().unwrap(), "--seq", &format!("file:{}", seq.display())]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["nodes", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn identical_configs_give_identical_reports() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.json");
    let out = dir.path().join("out");
    fs::write(
        &cfg,
        format!(r#"{{"n_max": 4, "precision": "double", "eps": {{"kind": "power", "a": 0.01, "alpha": 1.5}}, "out": "{}"}}"#, out.display()),
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    assert!(run(&["basis", "--config", cfg]).status.success());
    let o = run(&["perturb", "--config", cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    let first = fs::read(out.join("perturb.json")).unwrap();
    let first_csv = fs::read(out.join("coefficients.csv")).unwrap();
    assert!(run(&["perturb", "--config", cfg]).status.success());
    assert_eq!(first, fs::read(out.join("perturb.json")).unwrap());
    assert_eq!(first_csv, fs::read(out.join("coefficients.csv")).unwrap());
}

#[test]
fn unknown_config_field_is_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"nmax": 4}"#).unwrap();
    let o = run(&["basis", "--config", cfg.to_str().unwrap()]);
    assert_ne!(o.status.code(), Some(0));
}
