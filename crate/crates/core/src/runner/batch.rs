//! Batch execution: a work queue of expanded configs, optional worker
//! threads, and a single-writer results sink that enforces the one-record-
//! per-(config, run, fold) store invariant.

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::sync::Mutex;

use serde::Serialize;

use crate::data::{load_dataset, Manifest};
use crate::error::{Error, Result};
use crate::evaluate::{run_experiment, RunRecord};
use crate::runner::config::{expand_grid, BatchConfig, ExperimentConfig};
use crate::runner::store::{read_records, write_records, RecordFilter};

/// The store file a batch appends to inside its output directory.
pub const STORE_FILE: &str = "records.jsonl";

/// One config that did not complete.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchFailure {
    /// Position in the expansion order.
    pub index: usize,
    pub config_hash: String,
    pub message: String,
}

/// Exact counts for one batch execution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchSummary {
    /// Configs that executed to completion.
    pub configs_run: usize,
    pub records_written: usize,
    /// Records dropped because their (config_hash, run, fold) key was
    /// already in the store.
    pub records_skipped: usize,
    pub failures: Vec<BatchFailure>,
}

impl BatchSummary {
    pub fn render_text(&self) -> String {
        let mut out = format!(
            "configs run: {}\nrecords written: {}\nrecords skipped: {}\nfailures: {}\n",
            self.configs_run,
            self.records_written,
            self.records_skipped,
            self.failures.len()
        );
        for failure in &self.failures {
            out.push_str(&format!(
                "  config {} ({}): {}\n",
                failure.index, failure.config_hash, failure.message
            ));
        }
        out
    }
}

fn execute_config(config: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    let manifest = Manifest::from_file(Path::new(&config.dataset.manifest))?;
    let loaded = load_dataset(Path::new(&config.dataset.path), &manifest)?;
    run_experiment(config, &loaded.dataset)
}

/// Runs every expanded config and appends its records to the store at
/// `out_dir`/records.jsonl. A config failure is recorded and the batch
/// continues; records whose key already exists are skipped and counted.
/// Record content does not depend on the worker count or scheduling.
pub fn run_batch(batch: &BatchConfig, out_dir: &Path) -> Result<BatchSummary> {
    let configs = expand_grid(batch)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir.display().to_string(), e))?;
    let store_path = out_dir.join(STORE_FILE);

    let mut existing_keys: HashSet<(String, usize, usize)> = HashSet::new();
    if store_path.exists() {
        for record in read_records(&store_path, &RecordFilter::default())? {
            existing_keys.insert(record.key());
        }
    }

    let jobs: Vec<(usize, &ExperimentConfig)> = configs.iter().enumerate().collect();
    let queue: Mutex<std::vec::IntoIter<(usize, &ExperimentConfig)>> =
        Mutex::new(jobs.into_iter());
    let (sender, receiver) = mpsc::channel::<(usize, String, Result<Vec<RunRecord>>)>();

    let workers = batch.workers.clamp(1, configs.len().max(1));
    std::thread::scope(|scope| -> Result<BatchSummary> {
        for _ in 0..workers {
            let sender = sender.clone();
            let queue = &queue;
            scope.spawn(move || loop {
                let job = queue.lock().expect("queue lock is never poisoned").next();
                let Some((index, config)) = job else {
                    break;
                };
                let hash = crate::runner::config_hash(config);
                let outcome = execute_config(config);
                if sender.send((index, hash, outcome)).is_err() {
                    break;
                }
            });
        }
        drop(sender);

        let mut summary = BatchSummary {
            configs_run: 0,
            records_written: 0,
            records_skipped: 0,
            failures: Vec::new(),
        };
        for (index, hash, outcome) in receiver {
            match outcome {
                Ok(records) => {
                    let mut fresh = Vec::with_capacity(records.len());
                    for record in records {
                        if existing_keys.insert(record.key()) {
                            fresh.push(record);
                        } else {
                            summary.records_skipped += 1;
                        }
                    }
                    write_records(&fresh, &store_path)?;
                    summary.records_written += fresh.len();
                    summary.configs_run += 1;
                }
                Err(e) => summary.failures.push(BatchFailure {
                    index,
                    config_hash: hash,
                    message: e.to_string(),
                }),
            }
        }
        summary.failures.sort_by_key(|f| f.index);
        Ok(summary)
    })
}

/// The store path a batch writes inside an output directory.
pub fn store_path(out_dir: &Path) -> PathBuf {
    out_dir.join(STORE_FILE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{write_dataset, Dataset, FeatureKind, FeatureSpec};
    use crate::matrix::Matrix;
    use crate::rng::Rng;
    use serde_json::json;

    fn blob_dataset(n: usize) -> Dataset {
        let mut rng = Rng::new(99);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let class = i % 2;
            let center = if class == 0 { 0.0 } else { 10.0 };
            rows.push(vec![center + rng.next_f64(), center - rng.next_f64()]);
            labels.push(class);
        }
        Dataset {
            features: Matrix::from_rows(&rows).unwrap(),
            labels: Some(labels),
            class_names: vec!["neg".into(), "pos".into()],
            feature_meta: vec![
                FeatureSpec {
                    name: "f0".into(),
                    kind: FeatureKind::Numeric,
                },
                FeatureSpec {
                    name: "f1".into(),
                    kind: FeatureKind::Numeric,
                },
            ],
            group_ids: None,
            origin: "test".into(),
        }
    }

    fn write_fixture(dir: &Path) -> (String, String) {
        let dataset = blob_dataset(20);
        let manifest_value = json!({
            "features": [
                {"name": "f0", "kind": "numeric"},
                {"name": "f1", "kind": "numeric"},
            ],
            "label": "label",
        });
        let manifest: Manifest =
            serde_json::from_value(manifest_value.clone()).unwrap();
        let data_path = dir.join("blobs.csv");
        write_dataset(&dataset, &manifest, &data_path).unwrap();
        let manifest_path = dir.join("blobs.manifest.json");
        std::fs::write(
            &manifest_path,
            serde_json::to_string_pretty(&manifest_value).unwrap(),
        )
        .unwrap();
        (
            data_path.display().to_string(),
            manifest_path.display().to_string(),
        )
    }

    fn batch_doc(data: &str, manifest: &str, ks: serde_json::Value) -> BatchConfig {
        BatchConfig::from_json(
            &json!({
                "workers": 1,
                "dataset": {"path": data, "manifest": manifest},
                "model": {"algorithm": "knn", "hyperparameters": {"k": ks}},
                "cv": {"k": 2, "runs": 2, "base_seed": 7},
            })
            .to_string(),
        )
        .unwrap()
    }

    #[test]
    fn batch_counts_records_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let (data, manifest) = write_fixture(dir.path());
        let batch = batch_doc(&data, &manifest, json!([1, 3]));
        let out = dir.path().join("out");
        let summary = run_batch(&batch, &out).unwrap();
        assert_eq!(summary.configs_run, 2);
        assert_eq!(summary.records_written, 8);
        assert_eq!(summary.records_skipped, 0);
        assert!(summary.failures.is_empty());
        let records = read_records(&store_path(&out), &RecordFilter::default()).unwrap();
        assert_eq!(records.len(), 8);
    }

    #[test]
    fn rerun_skips_every_duplicate_key() {
        let dir = tempfile::tempdir().unwrap();
        let (data, manifest) = write_fixture(dir.path());
        let batch = batch_doc(&data, &manifest, json!([1, 3]));
        let out = dir.path().join("out");
        run_batch(&batch, &out).unwrap();
        let second = run_batch(&batch, &out).unwrap();
        assert_eq!(second.configs_run, 2);
        assert_eq!(second.records_written, 0);
        assert_eq!(second.records_skipped, 8);
        let records = read_records(&store_path(&out), &RecordFilter::default()).unwrap();
        assert_eq!(records.len(), 8);
    }

    #[test]
    fn failing_config_is_isolated() {
        let dir = tempfile::tempdir().unwrap();
        let (data, manifest) = write_fixture(dir.path());
        let missing = dir.path().join("gone.csv").display().to_string();
        let batch = BatchConfig::from_json(
            &json!({
                "dataset": {"path": [data, missing], "manifest": manifest},
                "model": {"algorithm": "knn", "hyperparameters": {"k": 1}},
                "cv": {"k": 2, "runs": 1, "base_seed": 7},
            })
            .to_string(),
        )
        .unwrap();
        let out = dir.path().join("out");
        let summary = run_batch(&batch, &out).unwrap();
        assert_eq!(summary.configs_run, 1);
        assert_eq!(summary.records_written, 2);
        assert_eq!(summary.failures.len(), 1);
        assert_eq!(summary.failures[0].index, 1);
        assert!(summary.failures[0].message.contains("gone.csv"));
    }

    #[test]
    fn parallel_and_serial_stores_match_after_key_sort() {
        let dir = tempfile::tempdir().unwrap();
        let (data, manifest) = write_fixture(dir.path());

        let serial = batch_doc(&data, &manifest, json!([1, 3, 5]));
        let serial_out = dir.path().join("serial");
        run_batch(&serial, &serial_out).unwrap();

        let mut parallel = batch_doc(&data, &manifest, json!([1, 3, 5]));
        parallel.workers = 4;
        let parallel_out = dir.path().join("parallel");
        run_batch(&parallel, &parallel_out).unwrap();

        let mut a = read_records(&store_path(&serial_out), &RecordFilter::default()).unwrap();
        let mut b = read_records(&store_path(&parallel_out), &RecordFilter::default()).unwrap();
        a.sort_by_key(|r| r.key());
        b.sort_by_key(|r| r.key());
        let digests_a: Vec<String> = a.iter().map(|r| r.content_digest()).collect();
        let digests_b: Vec<String> = b.iter().map(|r| r.content_digest()).collect();
        assert_eq!(digests_a, digests_b);
    }
}
