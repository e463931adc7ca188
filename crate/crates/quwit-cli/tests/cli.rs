//! End-to-end checks against the installed binary: flag handling, exit
//! codes, output formats, determinism, and the golden built-in configs.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn quwit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quwit"))
        .args(args)
        .env_remove("QUWIT_SEED")
        .output()
        .expect("binary runs")
}

fn stdout_of(args: &[&str]) -> String {
    let out = quwit(args);
    assert!(
        out.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json_of(args: &[&str]) -> Value {
    serde_json::from_str(&stdout_of(args)).expect("valid json")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn write_matrix(path: &Path, dim: usize, rows: &[Vec<f64>]) {
    let mut text = format!("{dim}\n");
    for row in rows {
        let line: Vec<String> = row.iter().map(|x| format!("{x}+0i")).collect();
        text.push_str(&line.join(" "));
        text.push('\n');
    }
    std::fs::write(path, text).unwrap();
}

#[test]
fn builtin_channel_witness_is_maximal_and_violated() {
    let doc = json_of(&["witness", "--builtin", "paper-qubit", "--which", "v", "--output", "json"]);
    assert!((doc["superposition_value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(doc["violated"], Value::Bool(true));
    for c in doc["control_values"].as_array().unwrap() {
        assert!(c.as_f64().unwrap().abs() < 1e-12);
    }

    let table = stdout_of(&["witness", "--builtin", "paper-qutrit", "--which", "w"]);
    assert!(table.contains("0.6667"));
    assert!(table.contains("violated           yes"));
}

#[test]
fn builtin_configs_match_the_golden_files() {
    for name in ["paper-qubit", "paper-qutrit"] {
        let got = stdout_of(&["witness", "--builtin", name, "--show-config", "--output", "json"]);
        let golden_path = Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("tests/golden")
            .join(format!("{name}.json"));
        let want = std::fs::read_to_string(&golden_path).unwrap();
        assert_eq!(got, want, "golden drift for {name}");
    }
}

#[test]
fn identity_intervention_yields_a_null_report() {
    let dir = tempfile::tempdir().unwrap();
    let ident = dir.path().join("identity.mat");
    write_matrix(&ident, 2, &[vec![1.0, 0.0], vec![0.0, 1.0]]);
    let doc = json_of(&[
        "witness",
        "--dim",
        "2",
        "--u0",
        ident.to_str().unwrap(),
        "--output",
        "json",
    ]);
    assert!(doc["superposition_value"].as_f64().unwrap().abs() < 1e-12);
    assert_eq!(doc["violated"], Value::Bool(false));
}

#[test]
fn custom_flags_reproduce_the_qubit_point() {
    let dir = tempfile::tempdir().unwrap();
    let h = dir.path().join("h.mat");
    let s = std::f64::consts::FRAC_1_SQRT_2;
    write_matrix(&h, 2, &[vec![s, s], vec![s, -s]]);
    let doc = json_of(&[
        "witness",
        "--dim",
        "2",
        "--coeffs",
        "1,-1",
        "--u1",
        h.to_str().unwrap(),
        "--projector",
        "1",
        "--output",
        "json",
    ]);
    assert!((doc["superposition_value"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(doc["violated"], Value::Bool(true));
}

#[test]
fn compile_pipeline_counts_displacers() {
    let dir = tempfile::tempdir().unwrap();
    let mixer = dir.path().join("mixer3.mat");
    stdout_of(&["optimal", "--dim", "3", "--emit-u1", mixer.to_str().unwrap()]);
    let doc = json_of(&["compile", "--input", mixer.to_str().unwrap(), "--output", "json"]);
    assert_eq!(doc["bd_count"], Value::from(3));
    assert!(doc["reconstruction_error"].as_f64().unwrap() < 1e-10);

    let ident = dir.path().join("identity4.mat");
    write_matrix(
        &ident,
        4,
        &[
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
        ],
    );
    let doc = json_of(&["compile", "--input", ident.to_str().unwrap(), "--output", "json"]);
    assert_eq!(doc["bd_count"], Value::from(4));
    for rot in doc["rotations"].as_array().unwrap() {
        assert_eq!(rot["identity"], Value::Bool(true));
    }
}

#[test]
fn error_paths_use_the_documented_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("stretch.mat");
    write_matrix(&bad, 2, &[vec![1.0, 0.0], vec![0.0, 2.0]]);
    let out = quwit(&["compile", "--input", bad.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let out = quwit(&["compile", "--input", "/nonexistent.mat"]);
    assert_eq!(exit_code(&out), 2);

    let out = quwit(&["witness", "--builtin", "nope"]);
    assert_eq!(exit_code(&out), 2);

    // clap rejects the builtin/custom flag mix
    let out = quwit(&["witness", "--builtin", "paper-qubit", "--dim", "2"]);
    assert_eq!(exit_code(&out), 2);

    let out = quwit(&["witness", "--dim", "2", "--which", "v"]);
    assert_eq!(exit_code(&out), 2);

    let out = quwit(&["quartz", "--wavelength", "0"]);
    assert_eq!(exit_code(&out), 3);

    let out = quwit(&["noise", "--builtin", "paper-qubit", "--profile", "0.5,0.5"]);
    assert_eq!(exit_code(&out), 3);
}

#[test]
fn noise_output_is_reproducible_for_a_seed() {
    let args = [
        "noise",
        "--builtin",
        "paper-qutrit",
        "--which",
        "v",
        "--totals",
        "800,1600",
        "--trials",
        "25",
        "--seed",
        "123",
        "--output",
        "json",
    ];
    let first = stdout_of(&args);
    let second = stdout_of(&args);
    assert_eq!(first, second);
}

#[test]
fn env_var_supplies_the_default_seed() {
    let args = [
        "noise",
        "--builtin",
        "paper-qubit",
        "--totals",
        "400",
        "--trials",
        "8",
        "--output",
        "json",
    ];
    let via_env = Command::new(env!("CARGO_BIN_EXE_quwit"))
        .args(args)
        .env("QUWIT_SEED", "9")
        .output()
        .unwrap();
    assert!(via_env.status.success());
    let mut flag_args = args.to_vec();
    flag_args.extend(["--seed", "9"]);
    let via_flag = stdout_of(&flag_args);
    assert_eq!(String::from_utf8(via_env.stdout).unwrap(), via_flag);

    let bad = Command::new(env!("CARGO_BIN_EXE_quwit"))
        .args(args)
        .env("QUWIT_SEED", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(bad.status.code().unwrap(), 2);
}

#[test]
fn witness_noise_shrinks_with_the_photon_budget() {
    let doc = json_of(&[
        "noise",
        "--builtin",
        "paper-qubit",
        "--which",
        "w",
        "--totals",
        "13000,52000",
        "--trials",
        "3000",
        "--seed",
        "7",
        "--output",
        "json",
    ]);
    let results = doc["results"].as_array().unwrap();
    let s0 = results[0]["witness_std"].as_f64().unwrap();
    let s1 = results[1]["witness_std"].as_f64().unwrap();
    // quadrupling the counts should halve the spread
    assert!((s0 / s1 - 2.0).abs() < 0.4, "ratio {}", s0 / s1);
}

#[test]
fn json_documents_round_trip_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    let mixer = dir.path().join("mixer4.mat");
    stdout_of(&["optimal", "--dim", "4", "--emit-u1", mixer.to_str().unwrap()]);
    let runs: Vec<Vec<&str>> = vec![
        vec!["witness", "--builtin", "paper-qutrit", "--which", "v", "--output", "json"],
        vec!["witness", "--builtin", "paper-qubit", "--show-config", "--output", "json"],
        vec!["optimal", "--dim", "5", "--output", "json"],
        vec!["compile", "--input", mixer.to_str().unwrap(), "--output", "json"],
        vec![
            "noise", "--builtin", "paper-qubit", "--totals", "600", "--trials", "6", "--seed",
            "2", "--output", "json",
        ],
        vec!["quartz", "--output", "json"],
    ];
    for args in runs {
        let text = stdout_of(&args);
        let value: Value = serde_json::from_str(&text).unwrap();
        let again = serde_json::to_string_pretty(&value).unwrap() + "\n";
        assert_eq!(text, again, "round trip drift for {args:?}");
    }
}

#[test]
fn quartz_scales_with_its_flags() {
    let doc = json_of(&["quartz", "--output", "json"]);
    let min = doc["min_thickness_mm"].as_f64().unwrap();
    assert!((min - 23.97).abs() / 23.97 < 0.01);

    let doc = json_of(&["quartz", "--birefringence", "1", "--output", "json"]);
    assert!((doc["min_thickness_mm"].as_f64().unwrap() - 0.21418752).abs() < 1e-9);

    let doc = json_of(&[
        "quartz",
        "--wavelength",
        "801.6",
        "--bandwidth",
        "801.6",
        "--birefringence",
        "1",
        "--output",
        "json",
    ]);
    assert!((doc["min_thickness_mm"].as_f64().unwrap() - 801.6e-6).abs() < 1e-12);
}

#[test]
fn output_path_redirects_the_document() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("report.json");
    let direct = stdout_of(&["witness", "--builtin", "paper-qubit", "--output", "json"]);
    let redirected = stdout_of(&[
        "witness",
        "--builtin",
        "paper-qubit",
        "--output",
        "json",
        "--output-path",
        file.to_str().unwrap(),
    ]);
    assert!(redirected.is_empty());
    assert_eq!(std::fs::read_to_string(&file).unwrap(), direct);
}

#[test]
fn csv_outputs_start_with_headers() {
    let text = stdout_of(&["witness", "--builtin", "paper-qubit", "--output", "csv"]);
    assert!(text.starts_with("control_0,control_1,superposition_value,"));
    assert_eq!(text.lines().count(), 2);

    let text = stdout_of(&[
        "noise", "--builtin", "paper-qubit", "--totals", "300,600", "--trials", "4", "--seed",
        "3", "--output", "csv",
    ]);
    assert!(text.starts_with("total,witness_mean,witness_std,control_mean_0,"));
    assert_eq!(text.lines().count(), 3);

    let text = stdout_of(&["optimal", "--dim", "2", "--output", "csv"]);
    assert!(text.starts_with("dim,predicted_w,predicted_v,"));

    let text = stdout_of(&["quartz", "--output", "csv"]);
    assert!(text.starts_with("wavelength_nm,"));
}
