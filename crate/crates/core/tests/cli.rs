//! The command-line front end, driven in-process through `cli::run`.

use std::fs;

use cmc_shooter::cli::{run, EXIT_CONFIG};
use serde_json::Value;

const TS: &str = "2026-01-01T00:00:00Z";

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["cmc-shooter", "--timestamp", TS];
    full.extend_from_slice(args);
    let code = run(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap_or_else(|e| panic!("{e}: {text}"))
}

#[test]
fn unit_circle_has_vanishing_tau() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("circle.csv");
    let (code, out, err) =
        call(&["integrate", "--unperturbed", "--a", "1.0", "--dump-orbit", csv.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    assert!(json(&out)["result"]["tau_spread"].as_f64().unwrap() < 1e-8);

    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    let manifest = lines.next().unwrap().strip_prefix("# manifest: ").unwrap();
    assert_eq!(json(manifest)["command"], "integrate");
    assert_eq!(lines.next().unwrap(), "y,g,gp,tau,rho,k,d");
    let mut rows = 0;
    for l in lines.filter(|l| !l.starts_with('#')) {
        let tau: f64 = l.split(',').nth(3).unwrap().parse().unwrap();
        assert!(tau.abs() < 1e-8, "{l}");
        rows += 1;
    }
    assert!(rows > 10);
}

#[test]
fn skeleton_cases_on_either_side_of_criticality() {
    let base = ["--H", "0.01", "--p", "20", "--lambda", "0.1"];
    let (code, out, _) = call(&[&["integrate", "--a", "0.96"][..], &base].concat());
    assert_eq!(code, 0);
    let sk = &json(&out)["result"]["skeleton"];
    assert_eq!(sk["case"], "H1");
    for l in ["y1", "y2", "y3", "y4", "y5", "y6"] {
        assert!(sk[l].is_f64(), "{l} missing");
    }

    let (code, out, _) = call(&[&["classify", "--a", "1.05"][..], &base].concat());
    assert_eq!(code, 0);
    assert_ne!(json(&out)["result"]["case"], "H1");
}

#[test]
fn fixed_timestamp_gives_identical_output() {
    let args = ["integrate", "--H", "0.02", "--a", "0.95"];
    let (_, a, _) = call(&args);
    let (_, b, _) = call(&args);
    assert_eq!(a, b);
    assert_eq!(json(&a)["manifest"]["timestamp"], TS);
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# shared settings\nH = 0.02\na = 0.97\np = 20\n").unwrap();
    let (code, out, err) = call(&["--config", cfg.to_str().unwrap(), "classify", "--a", "0.95"]);
    assert_eq!(code, 0, "{err}");
    let v = json(&out);
    assert_eq!(v["result"]["a"], 0.95);
    assert_eq!(v["manifest"]["config"]["ode"]["H"], 0.02);
}

#[test]
fn configuration_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "no_such_key = 1\n").unwrap();
    assert_eq!(call(&["--config", cfg.to_str().unwrap(), "classify"]).0, EXIT_CONFIG);
    assert_eq!(call(&["integrate", "--H", "-1"]).0, EXIT_CONFIG);
    assert_eq!(call(&["integrate", "--no-such-flag"]).0, EXIT_CONFIG);
    assert_eq!(call(&["verify", "--suite", "nothing"]).0, EXIT_CONFIG);
    assert_eq!(call(&["sweep", "--H-list", "0.02,0.01,0.004"]).0, EXIT_CONFIG);
    let (code, _, err) = call(&["sweep", "--H-list", "0.02,0.01"]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("at least 3"), "{err}");
}

#[test]
fn identity_suite_passes() {
    let (code, out, _) = call(&["verify", "--suite", "identities", "--json"]);
    assert_eq!(code, 0);
    let reports = json(&out)["result"].as_array().unwrap().clone();
    assert!(!reports.is_empty());
    assert!(reports.iter().all(|r| r["pass"] == true));
}

#[test]
fn shoot_then_area_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let orbit = dir.path().join("profile.json");
    let result = dir.path().join("crit.json");
    let surface = dir.path().join("surface.csv");
    let svg = dir.path().join("meridian.svg");
    let (code, out, err) = call(&[
        "shoot",
        "--H",
        "0.02",
        "--output",
        result.to_str().unwrap(),
        "--orbit-json",
        orbit.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(out.is_empty());
    let crit = json(&fs::read_to_string(&result).unwrap());
    let width = crit["result"]["bracket_width"].as_f64().unwrap();
    assert!(width <= 1e-12);
    let outputs = crit["manifest"]["outputs"].as_array().unwrap();
    assert_eq!(outputs.len(), 2);

    let (code, out, err) = call(&[
        "area",
        "--from",
        orbit.to_str().unwrap(),
        "--surface",
        surface.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let v = json(&out);
    assert_eq!(v["manifest"]["inputs"][0], orbit.to_str().unwrap());
    assert_eq!(v["result"]["H"], 0.02);
    assert!(v["result"]["H_residual_max"].as_f64().unwrap() < 1e-8);
    let h2a = v["result"]["H2_area_euclidean"].as_f64().unwrap();
    assert!((h2a / (48.0 * std::f64::consts::PI) - 1.0).abs() < 0.05, "{h2a}");
    assert!(fs::read_to_string(&surface).unwrap().starts_with("# manifest: "));
    assert!(fs::read_to_string(&svg).unwrap().trim_end().ends_with("</svg>"));
}
