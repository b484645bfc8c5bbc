//! Black-box tests of the installed binary: the documented examples, the
//! artifact formats, seed precedence, and diagnostic quality.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn tracelab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tracelab"))
        .args(args)
        .current_dir(dir)
        .env_remove("TRACELAB_SEED")
        .output()
        .expect("binary runs")
}

fn stdout_json(output: &Output) -> Value {
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stdout).expect("stdout is JSON")
}

#[test]
fn thresholds_example_prints_the_known_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = tracelab(
        &["thresholds", "--eps1", "1e-3", "--n", "1000", "--variant", "upper-only"],
        dir.path(),
    );
    let json = stdout_json(&out);
    let eta1 = json["eta1"].as_f64().unwrap();
    assert!((eta1 - 1e6f64.ln()).abs() < 1e-12);
    assert!(json["eta0"].is_null());
    assert_eq!(json["eps1_per_user"].as_f64().unwrap(), 1e-6);
}

#[test]
fn analyze_example_reports_the_drifts() {
    let dir = tempfile::tempdir().unwrap();
    let out = tracelab(&["analyze", "--c", "10", "--attack", "interleaving"], dir.path());
    let json = stdout_json(&out);
    assert!((json["mu0"].as_f64().unwrap() + 0.00343).abs() <= 2e-5);
    assert!((json["mu1"].as_f64().unwrap() - 0.00382).abs() <= 2e-5);
    assert!(json["I"].as_f64().is_some());
    let expected_len = 2.0 * 100.0 * 1000f64.ln();
    assert!((json["asymptotic_length"].as_f64().unwrap() - expected_len).abs() < 1e-9);
    assert!(json["predicted_T_h1"].as_f64().unwrap() > 0.0);
}

#[test]
fn analyze_covers_other_attacks() {
    let dir = tempfile::tempdir().unwrap();
    let out = tracelab(&["analyze", "--c", "5", "--attack", "all_one"], dir.path());
    let json = stdout_json(&out);
    assert!(json["I"].is_null());
    let mu1 = json["mu1"].as_f64().unwrap();
    assert!(mu1 > 0.0);
    // the all-one decoder acquits innocents through certain-innocence
    // cells, so the guilty-side prediction is the plain crossing time
    let eta1 = json["eta1"].as_f64().unwrap();
    let predicted = json["predicted_T_h1"].as_f64().unwrap();
    assert!((predicted - eta1 / mu1).abs() < 1e-9);

    let out = tracelab(&["analyze", "--c", "5", "--attack", "majority"], dir.path());
    let json = stdout_json(&out);
    assert!(json["mu0"].as_f64().unwrap() < 0.0);
    assert!(json["mu1"].as_f64().unwrap() > 0.0);
}

#[test]
fn simulate_writes_csv_and_aggregate_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = tracelab(
        &[
            "simulate",
            "--preset",
            "sprt-error-sum",
            "--trials",
            "3",
            "--max-segments",
            "400",
            "--out",
            "run.csv",
        ],
        dir.path(),
    );
    let json = stdout_json(&out);
    assert_eq!(json["trials"].as_u64().unwrap(), 3);
    let csv = std::fs::read_to_string(dir.path().join("run.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(
        lines[0],
        "trial,catch_all_time,false_positives,false_negatives,segments_generated,mean_overshoot"
    );
    assert!(lines[1].starts_with("0,"));
}

#[test]
fn same_request_and_seed_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "simulate",
        "--preset",
        "sprt-error-sum",
        "--trials",
        "4",
        "--max-segments",
        "300",
        "--seed",
        "1234",
        "--out",
    ];
    let mut with_out = args.to_vec();
    with_out.push("a.csv");
    let first = tracelab(&with_out, dir.path());
    let mut with_out = args.to_vec();
    with_out.push("b.csv");
    let second = tracelab(&with_out, dir.path());
    assert!(first.status.success() && second.status.success());
    assert_eq!(first.stdout, second.stdout);
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn seed_env_var_is_a_fallback_and_the_flag_wins() {
    let dir = tempfile::tempdir().unwrap();
    let base = [
        "simulate",
        "--preset",
        "sprt-error-sum",
        "--trials",
        "2",
        "--max-segments",
        "300",
    ];

    let mut flagged = base.to_vec();
    flagged.extend(["--seed", "7", "--out", "flag.csv"]);
    let flagged = tracelab(&flagged, dir.path());

    let mut env_only = base.to_vec();
    env_only.extend(["--out", "env.csv"]);
    let env_only = Command::new(env!("CARGO_BIN_EXE_tracelab"))
        .args(&env_only)
        .current_dir(dir.path())
        .env("TRACELAB_SEED", "7")
        .output()
        .unwrap();

    let mut both = base.to_vec();
    both.extend(["--seed", "9", "--out", "both.csv"]);
    let both = Command::new(env!("CARGO_BIN_EXE_tracelab"))
        .args(&both)
        .current_dir(dir.path())
        .env("TRACELAB_SEED", "7")
        .output()
        .unwrap();

    let mut nine = base.to_vec();
    nine.extend(["--seed", "9", "--out", "nine.csv"]);
    let nine = tracelab(&nine, dir.path());

    assert!(flagged.status.success() && env_only.status.success());
    assert_eq!(
        std::fs::read(dir.path().join("flag.csv")).unwrap(),
        std::fs::read(dir.path().join("env.csv")).unwrap(),
        "env seed must act like the flag"
    );
    assert!(both.status.success() && nine.status.success());
    assert_eq!(
        std::fs::read(dir.path().join("both.csv")).unwrap(),
        std::fs::read(dir.path().join("nine.csv")).unwrap(),
        "explicit flag must beat the env var"
    );
}

#[test]
fn config_file_runs_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let presets = tracelab(&["presets"], dir.path());
    let list = stdout_json(&presets);
    let config = list
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["name"] == "sprt_error_sum")
        .expect("preset listed")["config"]
        .clone();
    let path = dir.path().join("experiment.json");
    std::fs::write(&path, serde_json::to_string_pretty(&config).unwrap()).unwrap();

    let out = tracelab(
        &[
            "simulate",
            "--config",
            "experiment.json",
            "--trials",
            "2",
            "--max-segments",
            "250",
            "--out",
            "run.csv",
        ],
        dir.path(),
    );
    let json = stdout_json(&out);
    assert_eq!(json["trials"].as_u64().unwrap(), 2);
    let csv = std::fs::read_to_string(dir.path().join("run.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn presets_lists_all_five() {
    let dir = tempfile::tempdir().unwrap();
    let out = tracelab(&["presets"], dir.path());
    let json = stdout_json(&out);
    let names: Vec<&str> =
        json.as_array().unwrap().iter().map(|e| e["name"].as_str().unwrap()).collect();
    assert_eq!(
        names,
        vec![
            "wald_interleaving_toy",
            "tardos_interleaving_toy",
            "wald_grouptesting_toy",
            "tardos_grouptesting_toy",
            "sprt_error_sum"
        ]
    );
}

#[test]
fn diagnostics_name_the_violated_precondition() {
    let dir = tempfile::tempdir().unwrap();

    let out = tracelab(&["simulate", "--out", "x.csv"], dir.path());
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("--preset or --config"), "stderr: {err}");

    let out = tracelab(
        &["simulate", "--preset", "wald_interleaving_toy", "--attack", "sneaky", "--out", "x.csv"],
        dir.path(),
    );
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("unknown attack"), "stderr: {err}");

    let out = tracelab(&["thresholds", "--eps1", "0"], dir.path());
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("eps1") && err.contains("(0, 1)"), "stderr: {err}");

    let out = tracelab(
        &["thresholds", "--eps1", "1e-3", "--eps2", "0", "--variant", "aggressive"],
        dir.path(),
    );
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("eps2"), "stderr: {err}");
}

#[test]
fn budget_overrides_rebuild_the_boundary() {
    let dir = tempfile::tempdir().unwrap();
    // eps1 override on the one-sided preset: new eta1 = ln(n / eps1)
    let out = tracelab(
        &[
            "simulate",
            "--preset",
            "wald_interleaving_toy",
            "--eps1",
            "0.01",
            "--trials",
            "1",
            "--max-segments",
            "50",
            "--out",
            "run.csv",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    // the run is too short to accuse anyone at the rebuilt threshold;
    // reaching the cap cleanly is the observable
    let csv = std::fs::read_to_string(dir.path().join("run.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().contains(",50,"));
}
