//! Subcommand behavior through the real binary: exit codes, error channels,
//! and the artifacts each command leaves behind.

mod common;

use common::*;

fn store_with_two_configs(dir: &std::path::Path) -> (std::path::PathBuf, Vec<String>) {
    let (csv, manifest) = write_fixture(dir);
    let out = dir.join("results");
    let mut hashes = Vec::new();
    for knn_k in [1, 3] {
        let cfg_path = dir.join(format!("cfg_{}.json", knn_k));
        std::fs::write(&cfg_path, config_json(&csv, &manifest, knn_k, 4, 1, 0)).unwrap();
        let output = run_cli(&["run", cfg_path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(exit_code(&output), 0, "stderr: {}", stderr_of(&output));
        let stdout = stdout_of(&output);
        let hash = stdout
            .lines()
            .find_map(|l| l.strip_prefix("config "))
            .expect("hash echoed")
            .to_string();
        hashes.push(hash);
    }
    (out.join("records.jsonl"), hashes)
}

#[test]
fn run_creates_the_store_and_echoes_the_hash() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, manifest) = write_fixture(dir.path());
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, config_json(&csv, &manifest, 3, 4, 2, 0)).unwrap();
    let out = dir.path().join("results");

    let output = run_cli(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(exit_code(&output), 0, "stderr: {}", stderr_of(&output));
    let stdout = stdout_of(&output);
    assert!(stdout.contains("config "));
    assert!(stdout.contains("records written: 8"));
    assert!(out.join("records.jsonl").exists());
}

#[test]
fn run_with_missing_config_exits_1_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.json");
    let output = run_cli(&[
        "run",
        missing.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 1);
    assert!(stderr_of(&output).contains("absent.json"));
}

#[test]
fn unknown_flag_and_subcommand_exit_1_with_usage_on_stderr() {
    let output = run_cli(&["run", "x.json", "--bogus", "y"]);
    assert_eq!(exit_code(&output), 1);
    let stderr = stderr_of(&output);
    assert!(stderr.to_lowercase().contains("usage"), "stderr: {}", stderr);
    assert!(stdout_of(&output).is_empty());

    let output = run_cli(&["frobnicate"]);
    assert_eq!(exit_code(&output), 1);
    assert!(stderr_of(&output).to_lowercase().contains("usage"));
}

#[test]
fn invalid_config_content_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"dataset": {"path": "x", "manifest": "y"}, "surprise": 1}"#).unwrap();
    let output = run_cli(&[
        "run",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 2);
    assert!(stderr_of(&output).contains("invalid"));
}

#[test]
fn run_on_vanished_dataset_is_an_execution_failure() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, manifest) = write_fixture(dir.path());
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, config_json(&csv, &manifest, 3, 4, 1, 0)).unwrap();
    std::fs::remove_file(&csv).unwrap();
    let output = run_cli(&[
        "run",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 3);
    assert!(stderr_of(&output).contains("points.csv"));
}

#[test]
fn compare_with_absent_model_exits_2_listing_available() {
    let dir = tempfile::tempdir().unwrap();
    let (store, hashes) = store_with_two_configs(dir.path());
    let output = run_cli(&[
        "compare",
        "--store",
        store.to_str().unwrap(),
        "--metric",
        "accuracy",
        "--models",
        &hashes[0],
        "deadbeef",
    ]);
    assert_eq!(exit_code(&output), 2);
    let stderr = stderr_of(&output);
    assert!(stderr.contains("deadbeef"));
    assert!(stderr.contains(&hashes[0]) && stderr.contains(&hashes[1]));
}

#[test]
fn compare_renders_the_decision_report() {
    let dir = tempfile::tempdir().unwrap();
    let (store, hashes) = store_with_two_configs(dir.path());
    let output = run_cli(&[
        "compare",
        "--store",
        store.to_str().unwrap(),
        "--metric",
        "accuracy",
        "--models",
        &hashes[0],
        &hashes[1],
    ]);
    assert_eq!(exit_code(&output), 0, "stderr: {}", stderr_of(&output));
    let stdout = stdout_of(&output);
    assert!(stdout.contains("comparison on accuracy: 2 models"));
    assert!(stdout.contains("trail:"));
}

#[test]
fn compare_rejects_unknown_metrics_listing_known_ids() {
    let dir = tempfile::tempdir().unwrap();
    let (store, hashes) = store_with_two_configs(dir.path());
    let output = run_cli(&[
        "compare",
        "--store",
        store.to_str().unwrap(),
        "--metric",
        "vibes",
        "--models",
        &hashes[0],
        &hashes[1],
    ]);
    assert_eq!(exit_code(&output), 2);
    assert!(stderr_of(&output).contains("macro_f1"));
}

#[test]
fn rank_orders_models_under_a_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let (store, hashes) = store_with_two_configs(dir.path());
    let scenario = dir.path().join("scenario.json");
    std::fs::write(
        &scenario,
        r#"{"name": "balanced", "criteria": [
            {"metric": "accuracy", "weight": 3.0, "direction": "maximize"},
            {"metric": "train_seconds", "weight": 1.0, "direction": "minimize"}
        ]}"#,
    )
    .unwrap();
    let output = run_cli(&[
        "rank",
        "--store",
        store.to_str().unwrap(),
        "--scenario",
        scenario.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 0, "stderr: {}", stderr_of(&output));
    let stdout = stdout_of(&output);
    assert!(stdout.contains("scenario: balanced"));
    assert!(stdout.contains(&hashes[0]) && stdout.contains(&hashes[1]));
    assert!(stdout.contains("1. "));
}

#[test]
fn report_writes_per_config_and_summary_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let (store, hashes) = store_with_two_configs(dir.path());
    let report_dir = dir.path().join("report");
    let output = run_cli(&[
        "report",
        "--store",
        store.to_str().unwrap(),
        "--out",
        report_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 0, "stderr: {}", stderr_of(&output));
    assert!(report_dir.join("summary.csv").exists());
    for hash in &hashes {
        assert!(report_dir.join(hash).join("metrics.csv").exists());
        assert!(report_dir.join(hash).join("confusion.txt").exists());
        assert!(report_dir.join(hash).join("roc_mean.svg").exists());
    }
}

#[test]
fn analyze_prints_stats_and_exports_plots() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, manifest) = write_fixture(dir.path());
    let plots = dir.path().join("plots");
    let output = run_cli(&[
        "analyze",
        csv.to_str().unwrap(),
        manifest.to_str().unwrap(),
        "--plots",
        plots.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 0, "stderr: {}", stderr_of(&output));
    let stdout = stdout_of(&output);
    assert!(stdout.contains("f0") && stdout.contains("f1"));
    assert!(stdout.contains("class"));
    assert!(plots.join("features_box.svg").exists());
    assert!(plots.join("scatter.csv").exists());
}

#[test]
fn prophetic_seed_is_echoed_and_changes_the_config_hash() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, manifest) = write_fixture(dir.path());
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, config_json(&csv, &manifest, 3, 4, 1, 0)).unwrap();

    let plain = run_cli(&[
        "run",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("a").to_str().unwrap(),
    ]);
    let seeded = run_cli_env(
        &[
            "run",
            cfg.to_str().unwrap(),
            "--out",
            dir.path().join("b").to_str().unwrap(),
        ],
        &[("PROPHETIC_SEED", "99")],
    );
    assert_eq!(exit_code(&plain), 0);
    assert_eq!(exit_code(&seeded), 0);
    let seeded_out = stdout_of(&seeded);
    assert!(seeded_out.contains("PROPHETIC_SEED active: base_seed = 99"));
    assert!(!stdout_of(&plain).contains("PROPHETIC_SEED"));

    let hash = |text: &str| {
        text.lines()
            .find_map(|l| l.strip_prefix("config "))
            .unwrap()
            .to_string()
    };
    assert_ne!(hash(&stdout_of(&plain)), hash(&seeded_out));
}

#[test]
fn malformed_prophetic_seed_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, manifest) = write_fixture(dir.path());
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, config_json(&csv, &manifest, 3, 4, 1, 0)).unwrap();
    let output = run_cli_env(
        &[
            "run",
            cfg.to_str().unwrap(),
            "--out",
            dir.path().join("o").to_str().unwrap(),
        ],
        &[("PROPHETIC_SEED", "soon")],
    );
    assert_eq!(exit_code(&output), 2);
    assert!(stderr_of(&output).contains("PROPHETIC_SEED"));
}

#[test]
fn batch_expands_axes_and_reports_counts() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, manifest) = write_fixture(dir.path());
    let batch = dir.path().join("batch.json");
    std::fs::write(
        &batch,
        format!(
            r#"{{
  "workers": 2,
  "dataset": {{"path": "{}", "manifest": "{}"}},
  "model": {{"algorithm": "knn", "hyperparameters": {{"k": [1, 3, 5]}}, "seed": 0}},
  "cv": {{"k": 4, "runs": 1, "base_seed": 0, "grouped": false}}
}}"#,
            csv.display(),
            manifest.display()
        ),
    )
    .unwrap();
    let out = dir.path().join("results");
    let output = run_cli(&["batch", batch.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(exit_code(&output), 0, "stderr: {}", stderr_of(&output));
    let stdout = stdout_of(&output);
    assert!(stdout.contains("configs run: 3"));
    assert!(stdout.contains("records written: 12"));
}

#[test]
fn interactive_quit_script_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let output = run_interactive("q\n", dir.path());
    assert_eq!(exit_code(&output), 0);
    assert!(stdout_of(&output).contains("== main menu =="));
}
