use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn flatcert(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flatcert"))
        .args(args)
        .current_dir(dir)
        .env_remove("FLATCERT_PRECISION")
        .output()
        .unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn num(v: &Value) -> f64 {
    v.as_str().unwrap().parse().unwrap()
}

#[test]
fn ledger_reports_eps0_and_warning() {
    let dir = tempfile::tempdir().unwrap();
    let o = flatcert(&["ledger", "--n", "3", "--eps1", "0.25", "--eta", "0.2"], dir.path());
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["alphaWarning"], true);
    assert_eq!(v["eps0"]["approx"], "underflow");
    let log2: f64 = v["eps0"]["log2"].as_str().unwrap()[..20].parse().unwrap();
    assert!((log2 + 2110.107586176033).abs() < 1e-12);
    assert_eq!(v["chainHolds"], true);
    assert_eq!(v["precisionDigits"], 100);
}

#[test]
fn precision_env_is_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_flatcert"))
        .args(["ledger"])
        .current_dir(dir.path())
        .env("FLATCERT_PRECISION", "40")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(json(&o)["precisionDigits"], 40);
}

#[test]
fn flat_plane_certifies_vertical_normal() {
    let dir = tempfile::tempdir().unwrap();
    let o = flatcert(&["certify", "--exact", "affine", "--a", "0,0", "--eps", "1e-2"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["nu"], serde_json::json!(["0", "0", "1"]));
    assert_eq!(v["verdict"], true);
    assert_eq!(v["ledgerRef"], "n=3,eps1=0.25,eta=0.2");
}

#[test]
fn bumped_surface_round_trip_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = flatcert(&["solve", "--preset", "bumped", "--eps", "0.01", "--seed", "5", "--out", "bumped.gf"], d);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let first = flatcert(&["certify", "--surface", "bumped.gf", "--eps", "1e-2"], d);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    let v = json(&first);
    for key in ["taylor", "closeness", "inclusionAnalytic", "inclusionEmpirical"] {
        assert!(num(&v["margins"][key]) > 0.0, "{key}");
    }
    let second = flatcert(&["certify", "--surface", "bumped.gf", "--eps", "1e-2"], d);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn generic_data_names_failing_stage() {
    let dir = tempfile::tempdir().unwrap();
    let o = flatcert(&["certify", "--preset", "generic", "--eps", "1e-2"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("stage `inclusion_analytic` failed: margin -"), "{err}");
    assert!(o.stdout.is_empty());
}

#[test]
fn exact_and_audit() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = flatcert(&["exact", "--exact", "scherk", "--nodes", "33", "--out", "s.gf"], d);
    assert!(o.status.success());
    let text = std::fs::read_to_string(d.join("s.gf")).unwrap();
    assert!(text.starts_with("gf1\nbasedim 2\nradius 1\nh 0.0625\n"));
    let o = flatcert(&["audit", "--preset", "odd", "--eps", "0.0081"], d);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = String::from_utf8(o.stdout).unwrap();
    assert!(csv.starts_with("m,radius,measured,bound\n3,0.125,"));
    let o = flatcert(&["audit", "--preset", "odd", "--eps", "0.0081", "--format", "json"], d);
    assert_eq!(json(&o)["verdict"], true);
}

#[test]
fn iterate_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = flatcert(
        &["iterate", "--exact", "affine", "--a", "0.003,-0.004", "--eps", "1e-2", "--steps", "2", "--out", "it.json"],
        d,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = flatcert(&["certify", "--preset", "odd", "--eps", "1e-2", "--out", "c.json"], d);
    assert!(o.status.success());
    let o = flatcert(&["report", "it.json", "c.json"], d);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "eps,measured_closeness,bound");
    assert_eq!(lines.len(), 4);
    assert!(lines[3].starts_with("0.01,"));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = flatcert(&["certify", "--exact", "affine", "--eps", "1e-2", "--nodes", "9"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("at least 17"));
    let o = flatcert(&["certify", "--eps", "1e-2"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}
