use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lab"))
        .args(args)
        .output()
        .expect("lab binary runs")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    let mut full = vec!["run"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", dir.to_str().unwrap()]);
    lab(&full)
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

/// Rows of a CSV file (header skipped) as floats where parseable.
fn rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn solve_writes_trace_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &["--harness", "solve", "--scenario", "rotation", "--grid", "64", "--steps", "128"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let trace = rows(&dir.path().join("trace.csv"));
    assert_eq!(trace.len(), 129);
    assert!(trace.iter().all(|r| r[5] == "true"));
    let m = manifest(dir.path());
    assert_eq!(m["config"]["scenario"], "rotation");
    assert_eq!(m["config"]["harness"], "solve");
    assert_eq!(m["seed"], 7);
    assert!(m["version"].is_string());
    assert_eq!(m["violations"].as_array().unwrap().len(), 0);
    assert!(!dir.path().join("violation.json").exists());
}

#[test]
fn finite_volume_run_conserves_mass_for_divergence_free_flow() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &["--harness", "solve", "--scenario", "sawtooth", "--solver", "fv", "--grid", "64", "--steps", "128"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let masses: Vec<f64> = rows(&dir.path().join("trace.csv")).iter().map(|r| num(&r[4])).collect();
    for m in &masses {
        assert!((m - masses[0]).abs() <= 1e-12 * masses[0]);
    }
}

#[test]
fn thm_d_is_deterministic_and_reports_the_fitted_constant() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["--harness", "thmD", "--pairs", "20", "--grid", "64", "--seed", "11"];
    assert!(run_in(a.path(), &args).status.success());
    assert!(run_in(b.path(), &args).status.success());
    let ra = fs::read(a.path().join("records.csv")).unwrap();
    assert_eq!(ra, fs::read(b.path().join("records.csv")).unwrap());
    // C0 is the largest lhs / rhs over the records
    let recs = rows(&a.path().join("records.csv"));
    assert_eq!(recs.len(), 20);
    let max_ratio = recs
        .iter()
        .filter(|r| num(&r[5]) > 0.0)
        .map(|r| num(&r[1]) / num(&r[5]))
        .fold(0.0, f64::max);
    let c0 = manifest(a.path())["results"]["c0"].as_f64().unwrap();
    assert!((c0 / max_ratio - 1.0).abs() < 1e-12, "{c0} vs {max_ratio}");
    // a different seed gives a different suite
    let c = tempfile::tempdir().unwrap();
    assert!(run_in(c.path(), &["--harness", "thmD", "--pairs", "20", "--grid", "64", "--seed", "12"])
        .status
        .success());
    assert_ne!(ra, fs::read(c.path().join("records.csv")).unwrap());
}

#[test]
fn osgood_trace_stays_below_explicit_bound() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &["--harness", "osgood", "--driver", "logdiv", "--grid", "64", "--eps", "1e-4,1e-2"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let trace = rows(&dir.path().join("osgood.csv"));
    assert_eq!(trace.len(), 2 * 65);
    for r in &trace {
        assert!(num(&r[2]) <= num(&r[3]) * (1.0 + 1e-9), "{r:?}");
    }
    assert!(manifest(dir.path())["results"]["c0"].as_f64().unwrap() > 0.0);
}

#[test]
fn commutator_and_renormalize_emit_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &["--harness", "commutator", "--scenario", "sawtooth", "--grid", "128", "--eps", "0.125,0.0625", "--radii", "0.3,0.45"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(rows(&dir.path().join("commutator.csv")).len(), 4);

    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &["--harness", "renormalize", "--scenario", "compressive", "--grid", "64", "--steps", "32", "--m", "0.5"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(rows(&dir.path().join("renormalize.csv")).len(), 32);
}

#[test]
fn stability_run_reports_envelope() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &["--harness", "stability", "--scenario", "compressive", "--grid", "64", "--steps", "64", "--eps", "1e-1,1e-2"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = rows(&dir.path().join("stability.csv"));
    assert_eq!(table.len(), 2);
    for r in &table {
        assert!(num(&r[2]) <= num(&r[3]));
    }
    assert_eq!(manifest(dir.path())["results"]["below_envelope"], true);
}

#[test]
fn unknown_names_fail_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["--harness", "solve", "--scenario", "nope"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown scenario"));
    let out = run_in(dir.path(), &["--harness", "nope"]);
    assert!(!out.status.success());
    let out = run_in(dir.path(), &["--harness", "solve"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run_in(dir.path(), &["--harness", "solve", "--scenario", "rotation", "--grid", "100"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn catalog_lists_every_scenario() {
    let out = lab(&["catalog"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let names: Vec<&str> = v.as_array().unwrap().iter().map(|s| s["name"].as_str().unwrap()).collect();
    for n in ["translation", "rotation", "compressive", "logdiv", "sobolev_spiral", "sawtooth"] {
        assert!(names.contains(&n), "{n}");
    }
}

#[test]
fn check_passes() {
    let out = lab(&["check", "--grid", "32"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{text}");
    assert!(text.lines().all(|l| l.starts_with("PASS")), "{text}");
}
