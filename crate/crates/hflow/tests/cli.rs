use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn hflow(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hflow")).args(args).arg("--out").arg(out).output().unwrap()
}

fn summary(out: &Path, name: &str) -> Value {
    serde_json::from_slice(&fs::read(out.join(name)).unwrap()).unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("config.json");
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn euler_defaults_pass() {
    let d = tempfile::tempdir().unwrap();
    let o = hflow(d.path(), &["verify", "euler"]);
    assert_eq!(o.status.code(), Some(0));
    let s = summary(d.path(), "verify_euler_summary.json");
    assert_eq!(s["command"], "verify euler");
    assert_eq!(s["pass"], true);
    assert!(s["metrics"]["max_residual"].as_f64().unwrap() <= 1e-10);
    assert!(s["config_echo"].is_object());
}

#[test]
fn euler_negative_control_fails() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(d.path(), r#"{"negative_control": true}"#);
    let o = hflow(d.path(), &["verify", "euler", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(summary(d.path(), "verify_euler_summary.json")["pass"], false);
}

#[test]
fn malformed_config_is_a_config_error() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(d.path(), r#"{"grid": {"radial": 30,"#);
    let o = hflow(d.path(), &["verify", "euler", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line"), "{err}");
}

#[test]
fn unknown_config_field_is_rejected() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(d.path(), r#"{"gird": {}}"#);
    assert_eq!(hflow(d.path(), &["verify", "ns", "--config", &cfg]).status.code(), Some(2));
}

#[test]
fn bad_flags_are_usage_errors() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(hflow(d.path(), &["nonuniq", "--profile", "gauss:2"]).status.code(), Some(2));
    assert_eq!(hflow(d.path(), &["verify", "ns", "--steps", "0"]).status.code(), Some(2));
    assert_eq!(hflow(d.path(), &["frobnicate"]).status.code(), Some(2));
}

#[test]
fn nonuniq_rates_two_and_three() {
    let d = tempfile::tempdir().unwrap();
    let o = hflow(d.path(), &["nonuniq", "--profile", "exp:2", "--profile", "exp:3"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(d.path().join("nonuniq_f1.csv")).unwrap();
    let mut rows = csv.lines();
    let header: Vec<&str> = rows.next().unwrap().split(',').collect();
    assert_eq!(header, ["t", "f", "E", "four_F2", "lhs", "rhs", "margin", "sep"]);
    let at1: Vec<f64> =
        rows.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect::<Vec<f64>>()).find(|r| r[0] == 1.0).unwrap();
    assert!((at1[7] - 0.151_630_262_882_206_24).abs() < 1e-8);
}

#[test]
fn nonuniq_inadmissible_profile_fails() {
    let d = tempfile::tempdir().unwrap();
    let o = hflow(d.path(), &["nonuniq", "--profile", "exp:2", "--profile", "exp:1"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("t ="), "{err}");
}

#[test]
fn dodziuk_verdicts() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(hflow(d.path(), &["dodziuk"]).status.code(), Some(0));
    let v: Value = serde_json::from_slice(&fs::read(d.path().join("dodziuk.json")).unwrap()).unwrap();
    assert_eq!(v, serde_json::json!({"n2": "CONVERGENT", "n3": "DIVERGENT"}));
}

#[test]
fn energy_report_schema() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(hflow(d.path(), &["energy-report", "--profile", "exp:3:2", "--steps", "5"]).status.code(), Some(0));
    let csv = fs::read_to_string(d.path().join("energy.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "t,f,E,four_F2,lhs,rhs,margin");
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn plots_only_on_request() {
    let d = tempfile::tempdir().unwrap();
    hflow(d.path(), &["verify", "ns"]);
    assert!(!d.path().join("ns_margin.svg").exists());
    let o = Command::new(env!("CARGO_BIN_EXE_hflow"))
        .args(["verify", "ns", "--plot", "--out"])
        .arg(d.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(d.path().join("ns_margin.svg").exists());
}
