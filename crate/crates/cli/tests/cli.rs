//! End-to-end tests of the `selftrig` binary: exit codes, artifact layout,
//! and the JSON surfaces of each verb.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::tempdir;

fn selftrig(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_selftrig"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn repo_file(rel: &str) -> String {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"))
        .parent()
        .unwrap()
        .parent()
        .unwrap();
    root.join(rel).to_string_lossy().into_owned()
}

#[test]
fn run_converging_scenario_exits_zero_and_writes_artifacts() {
    let out = tempdir().unwrap();
    let output = selftrig(&[
        "run",
        "--scenario",
        "paper-sec4",
        "--seeds",
        "1-5",
        "--out",
        out.path().to_str().unwrap(),
    ]);
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    let summary = fs::read_to_string(out.path().join("summary.csv")).unwrap();
    assert!(summary.starts_with(
        "seed,converged,time_to_tolerance,event_count,final_disagreement,reduction_violations"
    ));
    assert_eq!(summary.lines().count(), 6);
    for seed in 1..=5 {
        let dir = out.path().join(format!("seed-{seed}"));
        for artifact in ["trajectory.csv", "events.jsonl", "reduced.json", "summary.json"] {
            assert!(dir.join(artifact).exists(), "missing {artifact}");
        }
    }
}

#[test]
fn checked_in_config_matches_the_builtin() {
    let out = tempdir().unwrap();
    let output = selftrig(&[
        "run",
        "--config",
        &repo_file("scenarios/paper-sec4.json"),
        "--seeds",
        "1-3",
        "--out",
        out.path().to_str().unwrap(),
    ]);
    assert!(output.status.success());
    let from_config = fs::read(out.path().join("summary.csv")).unwrap();

    let out2 = tempdir().unwrap();
    let output = selftrig(&[
        "run",
        "--scenario",
        "paper-sec4",
        "--seeds",
        "1-3",
        "--out",
        out2.path().to_str().unwrap(),
    ]);
    assert!(output.status.success());
    let from_builtin = fs::read(out2.path().join("summary.csv")).unwrap();
    assert_eq!(from_config, from_builtin);
}

#[test]
fn non_converging_run_exits_nonzero_with_failure_list() {
    // Identity-free coupling cannot mix two isolated pairs.
    let config = serde_json::json!({
        "mode": "distributed",
        "topology": {
            "kind": "fixed",
            "laplacian": [
                [1.0, -1.0, 0.0, 0.0],
                [-1.0, 1.0, 0.0, 0.0],
                [0.0, 0.0, 1.0, -1.0],
                [0.0, 0.0, -1.0, 1.0]
            ]
        },
        "delta": 0.1,
        "dt_rule": {"kind": "uniform-random"},
        "x0": {"kind": "explicit", "values": [0.0, 0.0, 10.0, 10.0]},
        "horizon": 20.0,
        "seeds": [1, 2],
        "tolerance": 1e-3
    });
    let dir = tempdir().unwrap();
    let path = dir.path().join("config.json");
    fs::write(&path, config.to_string()).unwrap();
    let output = selftrig(&["run", "--config", path.to_str().unwrap()]);
    assert!(!output.status.success());
    let failures: serde_json::Value =
        serde_json::from_slice(&output.stdout).expect("machine-readable failure list");
    let list = failures.as_array().unwrap();
    assert_eq!(list.len(), 2);
    assert!(list[0]["reason"]
        .as_str()
        .unwrap()
        .contains("did not converge"));
}

#[test]
fn invalid_config_is_rejected_with_field_diagnostics() {
    let config = serde_json::json!({
        "mode": "distributed",
        "topology": {
            "kind": "fixed",
            "laplacian": [[1.0, -1.0], [-1.0, 1.0]]
        },
        "delta": 0.6,
        "x0": {"kind": "explicit", "values": [0.0, 1.0]},
        "horizon": 5.0,
        "seeds": [1],
        "tolerance": 1e-3
    });
    let dir = tempdir().unwrap();
    let path = dir.path().join("config.json");
    fs::write(&path, config.to_string()).unwrap();
    let output = selftrig(&["run", "--config", path.to_str().unwrap()]);
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("delta"), "stderr: {stderr}");
}

#[test]
fn analyze_emits_the_report_json() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("matrix.json");
    fs::write(&path, "[[0.5, 0.5], [0.5, 0.5]]").unwrap();
    let output = selftrig(&[
        "analyze",
        "--matrix",
        path.to_str().unwrap(),
        "--delta",
        "0.4,0.6",
    ]);
    assert!(output.status.success());
    let report: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(report["is_stochastic"], true);
    assert_eq!(report["delta_coeff"], 0.0);
    assert_eq!(report["lambda_coeff"], 0.0);
    let verdicts = report["verdicts"].as_array().unwrap();
    assert_eq!(verdicts.len(), 2);
    assert_eq!(verdicts[0]["scrambling_delta"], true);
    assert_eq!(verdicts[0]["spanning_tree_delta"], true);
    assert_eq!(verdicts[1]["scrambling_delta"], false);
}

#[test]
fn analyze_rejects_non_square_matrices() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("matrix.json");
    fs::write(&path, "[[1.0, 0.0], [0.5]]").unwrap();
    let output = selftrig(&["analyze", "--matrix", path.to_str().unwrap(), "--delta", "0.1"]);
    assert!(!output.status.success());
}

#[test]
fn estimate_reports_mean_rows_and_tree_verdict() {
    let output = selftrig(&[
        "estimate",
        "--scenario",
        "paper-sec4",
        "--samples",
        "10000",
        "--delta",
        "0.4",
        "--seed",
        "1",
    ]);
    assert!(output.status.success());
    let estimate: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(estimate["samples"], 10000);
    assert_eq!(estimate["has_tree"], true);
    let row = estimate["mean"][0].as_array().unwrap();
    let expected = [1.0, -0.5, 0.0, -0.5];
    for (got, want) in row.iter().zip(expected) {
        assert!((got.as_f64().unwrap() - want).abs() < 0.02);
    }
}
