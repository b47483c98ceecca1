//! End-to-end checks of the compiled binary: exit codes, determinism and
//! the JSON interchange schema.

use std::process::{Command, Output};

use antimap::linalg::Matrix;

fn antimap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_antimap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(output: &Output) -> serde_json::Value {
    serde_json::from_slice(&output.stdout).expect("stdout is JSON")
}

#[test]
fn verify_exits_zero_and_all_checks_pass() {
    let output = antimap(&["verify", "--samples", "10"]);
    assert!(output.status.success());
    let report = stdout_json(&output);
    let checks = report["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|c| c["pass"].as_bool().unwrap()));
}

#[test]
fn unattainable_tolerance_exits_one_with_named_failure() {
    let output = antimap(&["verify", "--samples", "5", "--tolerance", "1e-30"]);
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("verification failed"));
    let report = stdout_json(&output);
    assert!(report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .any(|c| !c["pass"].as_bool().unwrap()));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(antimap(&["finite", "--dim", "0"]).status.code(), Some(2));
    assert_eq!(antimap(&["dilate", "--dim", "1"]).status.code(), Some(2));
    assert_eq!(antimap(&["cv", "--seed", "thermal:3"]).status.code(), Some(2));
    // unknown flags are clap usage errors
    assert_eq!(antimap(&["finite", "--dimension", "2"]).status.code(), Some(2));
}

#[test]
fn verify_runs_are_byte_identical_up_to_wall_clock() {
    let args = ["verify", "--rng-seed", "7", "--samples", "100"];
    let mut first = stdout_json(&antimap(&args));
    let mut second = stdout_json(&antimap(&args));
    first.as_object_mut().unwrap().remove("wall_clock_ms");
    second.as_object_mut().unwrap().remove("wall_clock_ms");
    assert_eq!(
        serde_json::to_string(&first).unwrap(),
        serde_json::to_string(&second).unwrap()
    );
}

#[test]
fn thread_cap_does_not_change_results() {
    let args = ["verify", "--samples", "20"];
    let capped = Command::new(env!("CARGO_BIN_EXE_antimap"))
        .args(args)
        .env("ANTIMAP_THREADS", "1")
        .output()
        .expect("binary runs");
    assert!(capped.status.success());
    let mut capped = stdout_json(&capped);
    let mut free = stdout_json(&antimap(&args));
    capped.as_object_mut().unwrap().remove("wall_clock_ms");
    free.as_object_mut().unwrap().remove("wall_clock_ms");
    assert_eq!(capped, free);
}

#[test]
fn emitted_matrices_round_trip_bitwise() {
    let output = antimap(&["finite", "--dim", "3", "--emit", "choi", "--emit", "kraus"]);
    assert!(output.status.success());
    let report = stdout_json(&output);
    let matrices = report["matrices"].as_object().unwrap();
    assert_eq!(matrices.len(), 1 + 9);
    let choi: Matrix = serde_json::from_value(matrices["choi"].clone()).unwrap();
    assert_eq!(choi.rows(), 9);
    // re-serialize and compare the decimal representations
    let again = serde_json::to_value(&choi).unwrap();
    assert_eq!(again, matrices["choi"]);
}

#[test]
fn dilate_emits_the_golden_ancilla() {
    let output = antimap(&["dilate", "--dim", "2", "--emit", "ancilla"]);
    assert!(output.status.success());
    let report = stdout_json(&output);
    assert_eq!(report["flags"]["golden_matrix_match"], serde_json::Value::Bool(true));
    let phi: Matrix = serde_json::from_value(report["matrices"]["ancilla"].clone()).unwrap();
    let expected = [2.0, 1.0, 1.0, 0.0].map(|x| x / 6.0f64.sqrt());
    for (i, want) in expected.iter().enumerate() {
        assert!((phi.get(i, 0).re - want).abs() < 1e-15);
    }
}

#[test]
fn cv_report_has_fidelity_and_chi() {
    let output = antimap(&["cv", "--cutoff", "20", "--seed", "vacuum", "--emit", "chi"]);
    assert!(output.status.success());
    let report = stdout_json(&output);
    let fidelity = report["fidelities"][0]["value"].as_f64().unwrap();
    assert!((fidelity - 0.5).abs() < 1e-8);
    let chi: Matrix = serde_json::from_value(report["matrices"]["chi"].clone()).unwrap();
    assert_eq!((chi.rows(), chi.cols()), (20, 1));
    assert!((chi.get(0, 0).re - 1.0).abs() < 1e-8);
}

#[test]
fn out_flag_writes_the_report_to_a_file() {
    let dir = std::env::temp_dir().join(format!("antimap_test_{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let output = antimap(&["finite", "--dim", "2", "--out", path.to_str().unwrap()]);
    assert!(output.status.success());
    assert!(output.stdout.is_empty());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report["command"], "finite");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn csv_format_renders_tabular_output() {
    let output = antimap(&["cv", "--cutoff", "10", "--format", "csv"]);
    assert!(output.status.success());
    let text = String::from_utf8_lossy(&output.stdout);
    assert!(text.starts_with("section,name,value,pass\n"));
    assert!(text.contains("fidelity,fidelity,5.00000000000000e-1"));
}
