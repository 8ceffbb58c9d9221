//! Shared fixtures for the binary-driving tests: a small separable dataset
//! on disk plus helpers for invoking the crucible binary.

// each integration test binary compiles this module separately, so any one
// target uses only a subset of the helpers
#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

pub fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_crucible")
}

/// Two well-separated classes of 20 rows each, written as CSV + manifest.
/// Returns (csv_path, manifest_path).
pub fn write_fixture(dir: &Path) -> (PathBuf, PathBuf) {
    let mut csv = String::from("f0,f1,label\n");
    for i in 0..20 {
        let _ = writeln!(csv, "{:.2},{:.2},a", i as f64 * 0.1, 1.0 + i as f64 * 0.05);
        let _ = writeln!(csv, "{:.2},{:.2},b", 5.0 + i as f64 * 0.1, 6.0 + i as f64 * 0.05);
    }
    let csv_path = dir.join("points.csv");
    std::fs::write(&csv_path, csv).unwrap();
    let manifest_path = dir.join("points.manifest.json");
    std::fs::write(
        &manifest_path,
        r#"{
  "features": [
    {"name": "f0", "kind": "numeric"},
    {"name": "f1", "kind": "numeric"}
  ],
  "label": "label"
}
"#,
    )
    .unwrap();
    (csv_path, manifest_path)
}

/// A complete experiment config document for the fixture dataset.
pub fn config_json(csv: &Path, manifest: &Path, knn_k: u64, cv_k: u64, runs: u64, seed: u64) -> String {
    format!(
        r#"{{
  "dataset": {{"path": "{}", "manifest": "{}"}},
  "transforms": [],
  "model": {{"algorithm": "knn", "hyperparameters": {{"k": {}}}, "seed": 0}},
  "cv": {{"k": {}, "runs": {}, "base_seed": {}, "grouped": false}}
}}
"#,
        csv.display(),
        manifest.display(),
        knn_k,
        cv_k,
        runs,
        seed
    )
}

pub fn run_cli(args: &[&str]) -> Output {
    Command::new(binary())
        .args(args)
        .env_remove("PROPHETIC_SEED")
        .output()
        .expect("binary runs")
}

pub fn run_cli_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(binary());
    cmd.args(args).env_remove("PROPHETIC_SEED");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

/// Runs the binary with no arguments, feeding `script` on stdin.
pub fn run_interactive(script: &str, dir: &Path) -> Output {
    let mut child = Command::new(binary())
        .current_dir(dir)
        .env_remove("PROPHETIC_SEED")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary spawns");
    use std::io::Write;
    child
        .stdin
        .take()
        .expect("piped stdin")
        .write_all(script.as_bytes())
        .expect("script written");
    child.wait_with_output().expect("binary exits")
}

pub fn stdout_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

pub fn stderr_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

pub fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("exit code")
}
