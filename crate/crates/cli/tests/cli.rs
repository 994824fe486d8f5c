//! End-to-end tests driving the `qre` binary: example values, the exit-code
//! contract, JSON round-trips, and determinism under a fixed seed.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use qre_core::qstate::{DensityMatrix, PureState};

const LN_2: f64 = std::f64::consts::LN_2;

fn qre(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qre"))
        .args(args)
        .env_remove("QRE_SEED")
        .output()
        .expect("binary launches")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn json_report(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("report is valid JSON")
}

fn write_state(dir: &Path, name: &str, state: &DensityMatrix) -> String {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string(&state.to_json()).unwrap()).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn closest_bell_log_matches_ln_2() {
    let out = qre(&["closest", "--bell", "2", "--f", "log", "--json"]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let rep = json_report(&out);
    let e = rep["outputs"]["entanglement"].as_f64().unwrap();
    assert!((e - LN_2).abs() <= 1e-10);
    let q: Vec<f64> = rep["outputs"]["q"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(q, vec![0.5, 0.5]);
    assert!(rep["passed"].as_bool().unwrap());
    assert!(rep["certificates"][0]["passes"].as_bool().unwrap());
}

#[test]
fn closest_two_qubit_power_entropy_frozen_value() {
    let out = qre(&["closest", "--p", "0.75", "--f", "power_entropy:0.5", "--json"]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let rep = json_report(&out);
    let e = rep["outputs"]["entanglement"].as_f64().unwrap();
    assert!((e - 0.20943058495790517).abs() <= 1e-10, "E = {e}");
    let q0 = rep["outputs"]["q"][0].as_f64().unwrap();
    assert!((q0 - 0.9).abs() <= 1e-9, "q = {q0}");
    assert_eq!(rep["outputs"]["theorem"], "qubit");
}

#[test]
fn closest_schmidt_flat_h_human_output() {
    let out = qre(&["closest", "--schmidt", "0.7,0.3", "--f", "log"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("theorem: flatH"), "{text}");
    assert!(text.contains("E = 0.610864"), "{text}");
    assert!(text.contains("pass"), "{text}");
}

#[test]
fn entropy_examples_and_state_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let bell = write_state(
        dir.path(),
        "bell.json",
        &PureState::maximally_entangled(2).unwrap().density(),
    );
    let eye = write_state(
        dir.path(),
        "eye.json",
        &DensityMatrix::from_probabilities(&[0.25; 4], Some((2, 2))).unwrap(),
    );

    // Identical files give zero for any generator.
    let out = qre(&["entropy", "--rho", &bell, "--sigma", &bell, "--f", "tsallis:0.5"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("0.000000"), "{}", stdout(&out));

    // Bell vs the maximally mixed state: ln 4 for -log, 1/2 for sqrt.
    let out = qre(&["entropy", "--rho", &bell, "--sigma", &eye, "--f", "log"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("1.386294"), "{}", stdout(&out));
    let out = qre(&["entropy", "--rho", &bell, "--sigma", &eye, "--f", "power_entropy:0.5"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("0.500000"), "{}", stdout(&out));

    // Re-feeding the emitted closest state reproduces the reported value.
    let out = qre(&["closest", "--bell", "2", "--f", "log", "--json"]);
    let rep = json_report(&out);
    let sigma_path = dir.path().join("sigma.json");
    fs::write(
        &sigma_path,
        serde_json::to_string(&rep["outputs"]["sigma_star"]).unwrap(),
    )
    .unwrap();
    let out = qre(&[
        "entropy",
        "--rho",
        &bell,
        "--sigma",
        sigma_path.to_str().unwrap(),
        "--f",
        "log",
        "--json",
    ]);
    assert!(out.status.success());
    let back = json_report(&out);
    let value = back["outputs"]["value"].as_f64().unwrap();
    let reported = rep["outputs"]["entanglement"].as_f64().unwrap();
    assert!((value - reported).abs() <= 1e-12, "{value} vs {reported}");
}

#[test]
fn entropy_check_modular_agrees_on_full_rank_pair() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = qre_core::qstate::seeded_rng(42);
    let rho = write_state(
        dir.path(),
        "rho.json",
        &qre_core::qstate::random_density_with(&mut rng, 3).unwrap(),
    );
    let sigma = write_state(
        dir.path(),
        "sigma.json",
        &qre_core::qstate::random_density_with(&mut rng, 3).unwrap(),
    );
    let out = qre(&[
        "entropy",
        "--rho",
        &rho,
        "--sigma",
        &sigma,
        "--f",
        "log",
        "--check-modular",
        "--json",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let rep = json_report(&out);
    assert!(rep["outputs"]["discrepancy"].as_f64().unwrap() <= 1e-9);
    assert!(rep["passed"].as_bool().unwrap());
}

#[test]
fn table_frozen_tsallis_row() {
    let out = qre(&["table", "--d", "2", "--alpha", "0.5", "--json"]);
    assert!(out.status.success());
    let rep = json_report(&out);
    let row = &rep["outputs"]["rows"][0];
    let two = 2.0_f64;
    assert!((row["renyi"].as_f64().unwrap() - LN_2).abs() <= 1e-10);
    assert!((row["renyi_marginal"].as_f64().unwrap() - LN_2).abs() <= 1e-10);
    assert!((row["tsallis"].as_f64().unwrap() - (two - two.sqrt())).abs() <= 1e-10);
    assert!(
        (row["tsallis_marginal"].as_f64().unwrap() - (two * two.sqrt() - two)).abs() <= 1e-10
    );
    assert!(row["tsallis_non_reduction"].as_bool().unwrap());
    assert!(rep["passed"].as_bool().unwrap());

    // Human rendering carries the same frozen decimals.
    let out = qre(&["table", "--d", "2", "--alpha", "0.5"]);
    let text = stdout(&out);
    assert!(text.contains("0.585786"), "{text}");
    assert!(text.contains("0.828427"), "{text}");
}

#[test]
fn exit_codes_follow_the_contract() {
    // Unknown generator spec: input error.
    let out = qre(&["closest", "--bell", "2", "--f", "nosuch"]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));

    // Missing state file: input error.
    let out = qre(&["entropy", "--rho", "/no/such.json", "--sigma", "/no/such.json", "--f", "log"]);
    assert_eq!(out.status.code(), Some(2));

    // Malformed state (trace 1.2): input error.
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(
        &bad,
        r#"{"dim":2,"split":null,"re":[[0.9,0.0],[0.0,0.3]],"im":[[0.0,0.0],[0.0,0.0]]}"#,
    )
    .unwrap();
    let out = qre(&["entropy", "--rho", bad.to_str().unwrap(), "--sigma", bad.to_str().unwrap(), "--f", "log"]);
    assert_eq!(out.status.code(), Some(2));

    // Rank-3 spectrum with a non-constant transfer function: hypothesis violation.
    let out = qre(&["closest", "--schmidt", "0.5,0.3,0.2", "--f", "power_entropy:0.5"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("hypothesis"), "{}", stderr(&out));

    // Flag conflicts and missing targets are clap-level input errors.
    let out = qre(&["closest", "--f", "log"]);
    assert_eq!(out.status.code(), Some(2));
    let out = qre(&["closest", "--bell", "2", "--p", "0.5", "--f", "log"]);
    assert_eq!(out.status.code(), Some(2));

    // Unknown suite name: input error.
    let out = qre(&["verify", "--suite", "everything"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_functions_suite_is_deterministic() {
    let a = qre(&["verify", "--suite", "functions", "--seed", "4", "--json"]);
    let b = qre(&["verify", "--suite", "functions", "--seed", "4", "--json"]);
    assert!(a.status.success());
    let ra = json_report(&a);
    let rb = json_report(&b);
    assert_eq!(ra["outputs"], rb["outputs"]);
    assert_eq!(ra["flags"], rb["flags"]);
    assert!(ra["passed"].as_bool().unwrap());
}

#[test]
fn seed_env_var_matches_flag() {
    let flagged = qre(&["closest", "--p", "0.6", "--f", "log", "--seed", "9", "--json"]);
    let via_env = Command::new(env!("CARGO_BIN_EXE_qre"))
        .args(["closest", "--p", "0.6", "--f", "log", "--json"])
        .env("QRE_SEED", "9")
        .output()
        .expect("binary launches");
    let ra = json_report(&flagged);
    let rb = json_report(&via_env);
    assert_eq!(ra["certificates"], rb["certificates"]);
    assert_eq!(ra["certificates"][0]["seed"], 9);
}

#[test]
fn precision_flag_widens_output() {
    let out = qre(&["closest", "--bell", "2", "--f", "log", "--precision", "10"]);
    assert!(stdout(&out).contains("0.6931471806"), "{}", stdout(&out));
    // Out-of-range precision is rejected by the parser.
    let out = qre(&["closest", "--bell", "2", "--f", "log", "--precision", "16"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oracle_cross_check_passes_on_bell_state() {
    let out = qre(&["closest", "--bell", "2", "--f", "log", "--oracle", "--json"]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let rep = json_report(&out);
    let gap = rep["outputs"]["oracle"]["gap_above"].as_f64().unwrap();
    assert!(gap >= -1e-6, "oracle beat the analytic value by {gap:e}");
    assert!(gap <= 1e-3, "oracle missed the analytic value by {gap:e}");
    assert!(rep["passed"].as_bool().unwrap());
}
