use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;
use thermal_pulses::spectra::make_linear;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thermal-pulses"))
        .args(args)
        .env_remove("THERMAL_PULSES_GUARDRAIL")
        .output()
        .expect("binary runs")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    let mut full = vec!["--out", dir.to_str().unwrap()];
    full.extend_from_slice(args);
    run(&full)
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|line| line.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

#[test]
fn lambda_flat_and_linear() {
    let tmp = TempDir::new().unwrap();
    let flat = tmp.path().join("flat");
    assert!(run_in(&flat, &["lambda"]).status.success());
    let ind = json(&flat.join("independence.json"));
    assert_eq!(ind["independence_measure"].as_f64(), Some(0.0));
    assert!(ind["lambda_max_off_diagonal"].as_f64().unwrap() < 1e-12);
    let rows = csv_rows(&flat.join("lambda.csv"));
    assert_eq!(rows.len(), 21 * 21);

    let linear = tmp.path().join("linear");
    let out = run_in(&linear, &["--spectrum", "builtin:linear:n_min=0.1,n_max=0.5", "lambda"]);
    assert!(out.status.success());
    let ind = json(&linear.join("independence.json"));
    assert!(ind["independence_measure"].as_f64().unwrap() > 0.0);

    let manifest = json(&linear.join("manifest.json"));
    assert_eq!(manifest["n_modes"], 21);
    assert_eq!(manifest["length"], 1.0);
    assert_eq!(manifest["convention"], "squared");
    assert!(manifest["timestamp_unix"].is_u64());
}

#[test]
fn lambda_skips_undefined_matrix() {
    let tmp = TempDir::new().unwrap();
    let out = run_in(
        tmp.path(),
        &["--modes", "3", "--spectrum", "builtin:linear:n_min=0,n_max=0.2", "lambda"],
    );
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    assert!(!tmp.path().join("lambda.csv").exists());
    assert!(tmp.path().join("covariance.csv").exists());
}

#[test]
fn spectrum_file_round_trips() {
    let tmp = TempDir::new().unwrap();
    let source = make_linear(5, 0.05, 0.45, 3.0).unwrap();
    let file = tmp.path().join("input.json");
    fs::write(&file, source.to_json()).unwrap();
    let out_dir = tmp.path().join("run");
    let out = run_in(&out_dir, &["--spectrum", file.to_str().unwrap(), "lambda"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let back = thermal_pulses::spectra::Spectrum::from_json(
        &fs::read_to_string(out_dir.join("spectrum.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(back, source);
    assert_eq!(json(&out_dir.join("manifest.json"))["n_modes"], 5);
}

#[test]
fn correlations_start_at_bunching_peak() {
    let tmp = TempDir::new().unwrap();
    for model in ["general", "flat"] {
        let dir = tmp.path().join(model);
        assert!(run_in(&dir, &["corr", "--model", model]).status.success());
        let rows = csv_rows(&dir.join("correlations.csv"));
        assert_eq!(rows[0][0], 0.0);
        assert!((rows[0][4] - 2.0).abs() < 1e-10);
        assert_eq!(rows.len(), 201);
    }
    let out = run_in(
        tmp.path(),
        &["--spectrum", "builtin:linear:n_min=0.1,n_max=0.2", "corr", "--model", "flat"],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn weak_outputs() {
    let tmp = TempDir::new().unwrap();
    assert!(run_in(tmp.path(), &["--modes", "3", "weak", "--n", "1e-4"]).status.success());
    let terms = fs::read_to_string(tmp.path().join("weak_terms.csv")).unwrap();
    assert_eq!(terms.lines().count(), 1 + 10);
    let rows = csv_rows(&tmp.path().join("weak_correlations.csv"));
    for row in rows {
        assert!((row[2] / row[4] - 1.0).abs() < 1e-6);
        if row[5] > 0.0 {
            assert!((row[3] / row[5] - 1.0).abs() < 1e-6);
        }
    }
    let summary = json(&tmp.path().join("weak_summary.json"));
    assert_eq!(summary["term_count"], 10);
}

#[test]
fn sweeps() {
    let tmp = TempDir::new().unwrap();
    let lin = tmp.path().join("lin");
    let out = run_in(&lin, &["sweep-linear", "--n-min", "0.1", "--delta-grid", "0"]);
    assert!(out.status.success());
    let rows = csv_rows(&lin.join("sweep_linear_n_min_0.1.csv"));
    assert_eq!(rows, vec![vec![0.0, 1.0, 1.0, 0.0, 0.1]]);

    let gauss = tmp.path().join("gauss");
    let out = run_in(&gauss, &["sweep-gaussian", "--r-grid", "0.01,0.1,1"]);
    assert!(out.status.success());
    let rows = csv_rows(&gauss.join("sweep_gaussian.csv"));
    assert_eq!(rows.len(), 3);
    assert!(rows[0][1] > rows[1][1] && rows[1][1] > rows[2][1]);
    for row in &rows {
        assert!((row[2] - row[1].sqrt()).abs() < 1e-15);
    }
}

#[test]
fn outputs_are_reproducible() {
    let tmp = TempDir::new().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for dir in [&a, &b] {
        assert!(run_in(dir, &["--modes", "7", "sweep-gaussian", "--r-grid", "geomspace:1e-3:1:7"])
            .status
            .success());
    }
    let name = "sweep_gaussian.csv";
    assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap());

    for dir in [&a, &b] {
        assert!(run_in(dir, &["--spectrum", "builtin:gaussian:r=0.3", "corr"]).status.success());
    }
    let name = "correlations.csv";
    assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap());
}

#[test]
fn exit_codes() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(run_in(tmp.path(), &["--modes", "4", "lambda"]).status.code(), Some(2));
    assert_eq!(
        run_in(tmp.path(), &["--spectrum", "builtin:flat:n=-1", "lambda"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run_in(tmp.path(), &["--spectrum", "missing.json", "lambda"]).status.code(),
        Some(2)
    );
    assert_eq!(run_in(tmp.path(), &["corr", "--z-grid", "linspace:0:1"]).status.code(), Some(2));

    let out = Command::new(env!("CARGO_BIN_EXE_thermal-pulses"))
        .args(["--out", tmp.path().to_str().unwrap(), "oracle-check"])
        .env("THERMAL_PULSES_GUARDRAIL", "1000")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dimension"));
}

#[test]
fn oracle_check_default_passes() {
    let tmp = TempDir::new().unwrap();
    let out = run_in(tmp.path(), &["oracle-check"]);
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["suites"].as_array().unwrap().len(), 4);
    assert_eq!(json(&tmp.path().join("oracle_check.json")), report);
}

#[test]
fn oracle_check_fixed_cutoff_reports_failure() {
    let tmp = TempDir::new().unwrap();
    let out = run_in(tmp.path(), &["oracle-check", "--cutoff", "4"]);
    assert_eq!(out.status.code(), Some(4));
    let report = json(&tmp.path().join("oracle_check.json"));
    assert_eq!(report["passed"], false);
}
