use std::path::Path;

use openevt_cli::{run, validate, ExperimentConfig, Pipeline, Severity};
use serde_json::{json, Value};

fn config(v: Value) -> ExperimentConfig {
    ExperimentConfig::from_json(&v.to_string()).unwrap()
}

fn golden_mean(z: f64) -> Value {
    json!({
        "map": {"kind": "doubling"},
        "hole": [[0.0, 0.25]],
        "z": z,
        "tau": [0.5, 1.0, 2.0],
        "n_values": [8, 16],
        "bins": 256,
        "markov_mode": true,
        "n_particles": 20000,
        "seed": 11,
        "options": {"gev_n_values": [32, 64], "gev_paths": 2000, "mc_horizon": 16}
    })
}

/// `[0, 0.3) ∪ [0.35, 0.65) ∪ [0.7, 1)`: measure 0.9, and the period-two
/// orbit `{1/3, 2/3}` survives.
fn large_hole() -> Value {
    let mut v = golden_mean(1.0 / 3.0);
    v["hole"] = json!([[0.0, 0.3], [0.35, 0.65], [0.7, 1.0]]);
    v["n_particles"] = json!(2000);
    v
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

fn codes(m: &openevt_cli::RunManifest) -> Vec<&str> {
    m.warnings.iter().map(|w| w.code.as_str()).collect()
}

#[test]
fn golden_mean_validates() {
    let d = validate(&config(golden_mean(1.0 / 3.0)));
    assert!(d.iter().all(|d| d.severity != Severity::Fatal), "{d:?}");
    assert!(d.iter().any(|d| d.code == "classification" && d.message.contains("periodic(2)")));
}

#[test]
fn branch_boundary_is_fatal() {
    let d = validate(&config(golden_mean(0.5)));
    assert!(d.iter().any(|d| d.severity == Severity::Fatal && d.code == "ambiguous_point"), "{d:?}");
}

#[test]
fn long_horizon_is_flagged() {
    let mut v = golden_mean(1.0 / 3.0);
    v["n_values"] = json!([8, 200]);
    v["n_particles"] = json!(1000);
    let d = validate(&config(v));
    assert!(d.iter().any(|d| d.severity == Severity::Warning
        && d.code == "infeasible_horizon"
        && d.parameter == "n_values"));
}

#[test]
fn schema_violations_are_fatal() {
    let mut v = golden_mean(1.0 / 3.0);
    v["hole"] = json!([[0.2, 0.4], [0.3, 0.5]]);
    v["n_values"] = json!([16, 8]);
    v["tau"] = json!([0.0]);
    let d = validate(&config(v));
    let fatal: Vec<&str> = d.iter().filter(|d| d.severity == Severity::Fatal).map(|d| d.parameter.as_str()).collect();
    for p in ["hole", "n_values", "tau"] {
        assert!(fatal.contains(&p), "{p} missing from {fatal:?}");
    }
    let mut v = golden_mean(1.0 / 3.0);
    v.as_object_mut().unwrap().remove("seed");
    assert!(ExperimentConfig::from_json(&v.to_string()).is_err());
}

#[test]
fn closed_system_spectral_run() {
    let mut v = golden_mean(0.9192940507443652);
    v["hole"] = json!([]);
    v["markov_mode"] = json!(false);
    let dir = tempfile::tempdir().unwrap();
    let m = run(config(v), dir.path(), Some(Pipeline::Spectral), 1).unwrap();
    assert!(m.ok(), "{:?}", m.error);
    let spectral = csv_rows(&dir.path().join("spectral.csv"));
    let alpha = spectral.iter().find(|r| r[0] == "alpha").unwrap();
    assert_eq!(alpha[1], "1.0");
    for row in csv_rows(&dir.path().join("bins.csv")) {
        let h0: f64 = row[2].parse().unwrap();
        assert!((h0 - 1.0).abs() < 1e-9, "{h0}");
    }
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn theta_rows_near_the_golden_ratio() {
    let mut v = golden_mean(1.0 / 3.0);
    v["n_particles"] = json!(400_000);
    let dir = tempfile::tempdir().unwrap();
    let m = run(config(v), dir.path(), Some(Pipeline::Theta), 1).unwrap();
    assert!(m.ok(), "{:?}", m.error);
    let rows = csv_rows(&dir.path().join("theta.csv"));
    let methods: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(methods, ["formula", "spectral", "return", "gumbel"]);
    let theta = (5f64.sqrt() - 1.0) / 2.0;
    for r in &rows[..3] {
        let v: f64 = r[1].parse().unwrap();
        assert!((v - theta).abs() < 0.05, "{r:?}");
    }
    // n = 32 is far from the limit; see the acceptance notes.
    let g: f64 = rows[3][1].parse().unwrap();
    assert!((g - theta).abs() < 0.3, "{g}");
}

#[test]
fn large_hole_refuses_periodic_theta() {
    let dir = tempfile::tempdir().unwrap();
    let m = run(config(large_hole()), dir.path(), Some(Pipeline::Theta), 1).unwrap();
    let e = m.error.as_ref().expect("theta is refused");
    assert_eq!(e.name, "pipeline_refused");
    assert_eq!(e.parameter, "hole");
    assert!(codes(&m).contains(&"hole_smallness"));
    assert!(!dir.path().join("theta.csv").exists());
    let text = std::fs::read_to_string(dir.path().join("manifest.json")).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["status"], "error");
    assert_eq!(v["error"]["name"], "pipeline_refused");
}

#[test]
fn all_skips_refused_theta_with_a_warning() {
    let mut v = large_hole();
    v["options"]["dimension_u"] = json!([2.0, 3.0, 4.0, 5.0, 6.0]);
    let dir = tempfile::tempdir().unwrap();
    let m = run(config(v), dir.path(), Some(Pipeline::All), 1).unwrap();
    assert!(codes(&m).contains(&"pipeline_refused"), "{:?}", m.warnings);
    assert!(!m.files.contains_key("theta"));
    assert!(!m.files.contains_key("degenerate"));
}

#[test]
fn all_on_an_off_survivor_target() {
    let mut v = golden_mean(0.1);
    v["n_values"] = json!([2, 5, 10, 50]);
    let dir = tempfile::tempdir().unwrap();
    let m = run(config(v), dir.path(), None, 1).unwrap();
    assert!(m.ok(), "{:?}", m.error);
    let keys: Vec<&str> = m.files.keys().map(String::as_str).collect();
    assert_eq!(keys, ["degenerate", "evd", "spectral"]);
    let dist = csv_rows(&dir.path().join("distance.csv"));
    assert_eq!(dist[0][0], "5");
}

#[test]
fn explicit_theta_off_survivor_names_the_error() {
    let dir = tempfile::tempdir().unwrap();
    let m = run(config(golden_mean(0.1)), dir.path(), Some(Pipeline::Theta), 1).unwrap();
    let e = m.error.expect("mismatch");
    assert_eq!(e.name, "classification_mismatch");
    assert_eq!(e.module, "extremes");
}

#[test]
fn every_listed_file_exists() {
    let dir = tempfile::tempdir().unwrap();
    let m = run(config(golden_mean(1.0 / 3.0)), dir.path(), Some(Pipeline::All), 2).unwrap();
    assert!(m.ok(), "{:?}", m.error);
    let listed: Vec<&String> = m.files.values().flatten().collect();
    assert!(listed.len() >= 9);
    for f in listed {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
}
