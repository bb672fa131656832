use std::path::Path;
use std::process::{Command, Output};

fn alignlab(args: &[&str], root: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_alignlab"))
        .args(args)
        .env("ALIGNLAB_OUTPUT_ROOT", root)
        .current_dir(root)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn empty_config_exits_65_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "empty.json", "");
    let out = alignlab(&["run", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(65));
    let entries: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(entries.len(), 1);
}

#[test]
fn malformed_and_missing_configs_exit_65() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.json", r#"{"scenario": "sigma-1d-indicator", "nope": 3}"#);
    assert_eq!(alignlab(&["run", &cfg], dir.path()).status.code(), Some(65));
    assert_eq!(alignlab(&["run", "absent.json"], dir.path()).status.code(), Some(65));
}

#[test]
fn unknown_scenario_and_flag_exit_64() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "u.json", r#"{"scenario": "no-such-thing"}"#);
    assert_eq!(alignlab(&["run", &cfg], dir.path()).status.code(), Some(64));
    let out = alignlab(&["list", "--bogus"], dir.path());
    assert_eq!(out.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(alignlab(&["verify", "--filter", "A9"], dir.path()).status.code(), Some(64));
}

#[test]
fn list_json_is_an_array_with_the_catalog() {
    let dir = tempfile::tempdir().unwrap();
    let out = alignlab(&["list", "--json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let names: Vec<&str> = v.as_array().unwrap().iter().map(|s| s["name"].as_str().unwrap()).collect();
    for want in [
        "sigma-1d-indicator",
        "sigma-2d-indicator",
        "complete-graph-decay",
        "fat-tail-flocking",
        "hydro-1d-subcritical",
        "hydro-1d-supercritical",
        "hydro-2d-threshold",
        "weighted-gap-uniform",
        "harmonic-potential-flock",
    ] {
        assert!(names.contains(&want), "{want} missing");
    }
}

#[test]
fn run_writes_bundle_under_output_root() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.json", r#"{"scenario": "sigma-1d-indicator", "outputs": "out"}"#);
    let out = alignlab(&["run", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["passed"], true);
    assert!(!manifest["files"].as_array().unwrap().is_empty());
}

#[test]
fn complete_graph_passes_and_impossible_tolerance_fails_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"scenario": "complete-graph-decay"}"#);
    assert_eq!(alignlab(&["run", &cfg], dir.path()).status.code(), Some(0));
    let out = alignlab(&["run", &cfg, "--tol", "decay_exactness=0"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let manifest = std::fs::read_to_string(dir.path().join("complete-graph-decay/manifest.json")).unwrap();
    assert!(manifest.contains("deltaE_vs_exponential"));
}

#[test]
fn verify_filter_runs_one_criterion() {
    let dir = tempfile::tempdir().unwrap();
    let out = alignlab(&["verify", "--filter", "A1"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("A1 PASS"));
    let out = alignlab(&["verify", "--filter", "sigma-1d-indicator", "--tol", "sigma_1d=0"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn sigma_subcommand_prints_gap_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = alignlab(&["sigma", r#"{"family":"indicator","radius":1.0}"#], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["sigma"].as_f64().unwrap() - (1.0 - 1f64.sin())).abs() < 1e-9);
    assert!(v["K_max"].is_u64() && v["tail_bound"].is_f64() && v["argmax_mode"].is_array());
}

#[test]
fn blowup_in_smooth_scenario_exits_2_and_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "b.json",
        r#"{"scenario": "hydro-1d-subcritical", "sim": {"amplitude_factor": 2.0, "blowup_factor": 5.0, "cells": 512, "t_end": 2.0}}"#,
    );
    let out = alignlab(&["run", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let manifest = std::fs::read_to_string(dir.path().join("hydro-1d-subcritical/manifest.json")).unwrap();
    assert!(manifest.contains("blow-up detected"), "{manifest}");
}
