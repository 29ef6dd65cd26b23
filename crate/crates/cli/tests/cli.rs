//! End-to-end runs of the binary: output schema, determinism across thread
//! counts, seed override plumbing, and exit codes.

use std::path::PathBuf;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_geoperc");

const CSV_HEADER: &str =
    "experiment,field_family,marking,lambda,n,s,mu,p,value,ci_low,ci_high,reps,seed,leakage_budget";

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn write_config(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("geoperc-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

const TINY_ESTIMATE: &str = r#"{
  "command": "estimate",
  "model": {"marking": {"mode": "iid", "law": {"family": "point_mass", "value": 0.5}}},
  "quantities": [{"kind": "point_coverage"}, {"kind": "box_crossing", "scales": [3.0]}],
  "lambda_grid": [0.4],
  "replications": 200,
  "master_seed": 11
}"#;

#[test]
fn csv_output_is_deterministic_with_a_pinned_header() {
    let config = write_config("tiny.json", TINY_ESTIMATE);
    let config = config.to_str().unwrap();
    let first = run(&["estimate", "--config", config, "--format", "csv"]);
    assert_eq!(exit_code(&first), 0, "stderr: {}", String::from_utf8_lossy(&first.stderr));
    let second = run(&["estimate", "--config", config, "--format", "csv"]);
    assert_eq!(first.stdout, second.stdout);

    let text = String::from_utf8(first.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), CSV_HEADER);
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].starts_with("point_coverage,point_mass,iid,0.4,"));
    assert!(rows[1].starts_with("point_coverage_closed_form,point_mass,iid,0.4,"));
    assert!(rows[2].starts_with("box_crossing,point_mass,iid,0.4,3.0,"));
}

#[test]
fn thread_count_never_changes_results() {
    let config = write_config("threads.json", TINY_ESTIMATE);
    let config = config.to_str().unwrap();
    let one = run(&["estimate", "--config", config, "--threads", "1"]);
    let four = run(&["estimate", "--config", config, "--threads", "4"]);
    assert_eq!(exit_code(&one), 0);
    assert_eq!(one.stdout, four.stdout);

    let json_one = run(&["estimate", "--config", config, "--threads", "1", "--format", "json"]);
    let json_four = run(&["estimate", "--config", config, "--threads", "4", "--format", "json"]);
    let mut parsed_one: serde_json::Value = serde_json::from_slice(&json_one.stdout).unwrap();
    let mut parsed_four: serde_json::Value = serde_json::from_slice(&json_four.stdout).unwrap();
    // Wall clock is the one legitimate difference.
    parsed_one.as_object_mut().unwrap().remove("timing");
    parsed_four.as_object_mut().unwrap().remove("timing");
    assert_eq!(parsed_one, parsed_four);
}

#[test]
fn json_report_carries_schema_config_and_rows() {
    let config = write_config("report.json", TINY_ESTIMATE);
    let out = run(&["estimate", "--config", config.to_str().unwrap(), "--format", "json", "--seed", "99"]);
    assert_eq!(exit_code(&out), 0);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["config"]["master_seed"], 99);
    assert_eq!(report["config"]["command"], "estimate");
    let rows = report["results"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for row in rows {
        for key in ["experiment", "value", "ci_low", "ci_high", "reps", "seed", "leakage_budget"] {
            assert!(!row[key].is_null(), "row lacks {key}: {row}");
        }
    }
    assert!(report["timing"]["wall_seconds"].is_number());
}

#[test]
fn config_errors_exit_with_two() {
    // Unknown preset.
    let out = run(&["lambda-c", "--preset", "no-such-preset"]);
    assert_eq!(exit_code(&out), 2);

    // Unreadable config path.
    let out = run(&["estimate", "--config", "/no/such/file.json"]);
    assert_eq!(exit_code(&out), 2);

    // Malformed JSON.
    let bad = write_config("malformed.json", "{ not json");
    let out = run(&["estimate", "--config", bad.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);

    // Out-of-range eps0.
    let bad = write_config(
        "bad-eps0.json",
        &TINY_ESTIMATE.replace("\"master_seed\": 11", "\"master_seed\": 11, \"eps0\": 0.3"),
    );
    let out = run(&["estimate", "--config", bad.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("eps0"));

    // Empty lambda grid.
    let bad = write_config("no-grid.json", &TINY_ESTIMATE.replace("[0.4]", "[]"));
    let out = run(&["estimate", "--config", bad.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);

    // Config written for a different command.
    let config = write_config("mismatch.json", TINY_ESTIMATE);
    let out = run(&["scan-lambda", "--config", config.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("estimate"));
}

#[test]
fn runtime_failures_exit_with_three() {
    let config = write_config("unwritable.json", TINY_ESTIMATE);
    let out = run(&[
        "estimate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        "/no-such-directory/results.csv",
    ]);
    assert_eq!(exit_code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot write"));
}

#[test]
fn presets_are_listed_and_loadable() {
    let out = run(&["presets"]);
    assert_eq!(exit_code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let names: Vec<&str> =
        text.lines().map(|l| l.split_whitespace().next().unwrap()).collect();
    for expected in [
        "point-coverage-comparison",
        "segment-coverage-reversal",
        "cylinder-coverage-saturation",
        "heavy-tail-coverage",
        "contraction-check",
        "mosaic-scan-fine-cells",
        "mosaic-scan-coarse-cells",
    ] {
        assert!(names.contains(&expected), "preset {expected} missing from listing");
    }
}
