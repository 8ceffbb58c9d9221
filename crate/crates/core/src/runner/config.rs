//! Experiment and batch configuration. A batch document is ordinary
//! experiment JSON where any scalar position may hold a list of candidate
//! values; expansion takes the cartesian product in document order.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::canon::{canonical_json, sha256_hex};
use crate::error::{Error, Result};
use crate::learn::ModelSpec;
use crate::transform::TransformSpec;

/// Where the data lives: a CSV path and its manifest path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetRef {
    pub path: String,
    pub manifest: String,
}

/// Cross-validation shape shared by every run of a config.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CvConfig {
    pub k: usize,
    pub runs: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub grouped: bool,
}

/// One fully specified experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetRef,
    #[serde(default)]
    pub transforms: Vec<TransformSpec>,
    pub model: ModelSpec,
    pub cv: CvConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<ExperimentConfig> {
        let config: ExperimentConfig = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("invalid experiment config: {}", e)))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        ExperimentConfig::from_json(&text)
    }

    /// Structural checks beyond what parsing enforces. Window restructures
    /// rows so it must lead the chain; resampling feeds training data so it
    /// must close the chain.
    pub fn validate(&self) -> Result<()> {
        if self.cv.k < 2 {
            return Err(Error::Config("cv.k must be at least 2".into()));
        }
        if self.cv.runs < 1 {
            return Err(Error::Config("cv.runs must be at least 1".into()));
        }
        for spec in &self.transforms {
            spec.validate()?;
        }
        let windows = self
            .transforms
            .iter()
            .filter(|s| s.is_window())
            .count();
        if windows > 1 {
            return Err(Error::Config(
                "transform chain may contain at most one window".into(),
            ));
        }
        if windows == 1 && !self.transforms[0].is_window() {
            return Err(Error::Config(
                "the window transform must come first in the chain".into(),
            ));
        }
        let resamples = self
            .transforms
            .iter()
            .filter(|s| s.is_resample())
            .count();
        if resamples > 1 {
            return Err(Error::Config(
                "transform chain may contain at most one resample".into(),
            ));
        }
        if resamples == 1 && !self.transforms.last().expect("nonempty").is_resample() {
            return Err(Error::Config(
                "the resample transform must come last in the chain".into(),
            ));
        }
        if resamples == 1 && self.model.algorithm.is_clustering() {
            return Err(Error::Config(format!(
                "resampling needs labels; {} is a clustering algorithm",
                self.model.algorithm.id()
            )));
        }
        self.model.validate()
    }
}

/// Content identity of a config: a digest of its canonical serialization.
/// Key order in the source document never changes the hash.
pub fn config_hash(config: &ExperimentConfig) -> String {
    let value = serde_json::to_value(config).expect("config serializes");
    sha256_hex(&[canonical_json(&value).as_bytes()])
}

/// A batch: worker count plus the experiment document with optional axes.
#[derive(Debug, Clone)]
pub struct BatchConfig {
    pub workers: usize,
    pub document: Value,
}

impl BatchConfig {
    pub fn from_json(text: &str) -> Result<BatchConfig> {
        let value: Value = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("invalid batch config: {}", e)))?;
        let Value::Object(mut map) = value else {
            return Err(Error::Config("batch config must be a JSON object".into()));
        };
        let workers = match map.shift_remove("workers") {
            None => 1,
            Some(Value::Number(n)) => match n.as_u64() {
                Some(w) if w >= 1 => w as usize,
                _ => {
                    return Err(Error::Config(
                        "workers must be an integer of at least 1".into(),
                    ))
                }
            },
            Some(_) => {
                return Err(Error::Config(
                    "workers must be an integer, not a list".into(),
                ))
            }
        };
        Ok(BatchConfig {
            workers,
            document: Value::Object(map),
        })
    }

    pub fn from_file(path: &Path) -> Result<BatchConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        BatchConfig::from_json(&text)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum PathSeg {
    Key(String),
    Index(usize),
}

fn render_path(path: &[PathSeg]) -> String {
    let mut out = String::new();
    for seg in path {
        match seg {
            PathSeg::Key(k) => {
                if !out.is_empty() {
                    out.push('.');
                }
                out.push_str(k);
            }
            PathSeg::Index(i) => out.push_str(&format!("[{}]", i)),
        }
    }
    out
}

/// The transform chain itself is a list; every other array is an axis.
fn is_structural_list(path: &[PathSeg]) -> bool {
    matches!(path, [PathSeg::Key(k)] if k == "transforms")
}

fn find_axes(
    value: &Value,
    path: &mut Vec<PathSeg>,
    axes: &mut Vec<(Vec<PathSeg>, Vec<Value>)>,
) -> Result<()> {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                path.push(PathSeg::Key(k.clone()));
                find_axes(v, path, axes)?;
                path.pop();
            }
        }
        Value::Array(items) => {
            if is_structural_list(path) {
                for (i, item) in items.iter().enumerate() {
                    path.push(PathSeg::Index(i));
                    find_axes(item, path, axes)?;
                    path.pop();
                }
            } else {
                if items.is_empty() {
                    return Err(Error::Config(format!(
                        "axis {} lists no values",
                        render_path(path)
                    )));
                }
                axes.push((path.clone(), items.clone()));
            }
        }
        _ => {}
    }
    Ok(())
}

fn set_path(doc: &mut Value, path: &[PathSeg], new: Value) {
    let mut at = doc;
    for seg in &path[..path.len() - 1] {
        at = match seg {
            PathSeg::Key(k) => at.get_mut(k).expect("path came from this document"),
            PathSeg::Index(i) => at.get_mut(i).expect("path came from this document"),
        };
    }
    match path.last().expect("nonempty path") {
        PathSeg::Key(k) => {
            at[k.as_str()] = new;
        }
        PathSeg::Index(i) => {
            at[*i] = new;
        }
    }
}

/// Expand the batch document into concrete configs: the cartesian product
/// over all axes, axes in document order with the last one varying fastest.
pub fn expand_grid(batch: &BatchConfig) -> Result<Vec<ExperimentConfig>> {
    let mut axes = Vec::new();
    find_axes(&batch.document, &mut Vec::new(), &mut axes)?;

    let total: usize = axes.iter().map(|(_, vs)| vs.len()).product();
    let mut configs = Vec::with_capacity(total);
    let mut odometer = vec![0usize; axes.len()];
    for _ in 0..total {
        let mut doc = batch.document.clone();
        for ((path, values), &pick) in axes.iter().zip(&odometer) {
            set_path(&mut doc, path, values[pick].clone());
        }
        let parsed: Result<ExperimentConfig> = serde_json::from_value(doc)
            .map_err(|e| Error::Config(format!("{}", e)))
            .and_then(|c: ExperimentConfig| c.validate().map(|_| c));
        match parsed {
            Ok(config) => configs.push(config),
            Err(e) => {
                let coords: Vec<String> = axes
                    .iter()
                    .zip(&odometer)
                    .map(|((path, values), &pick)| {
                        format!("{}={}", render_path(path), values[pick])
                    })
                    .collect();
                return Err(Error::Config(format!(
                    "grid point {{{}}} expands to an invalid config: {}",
                    coords.join(", "),
                    e
                )));
            }
        }
        // advance the odometer, last axis fastest
        for slot in (0..axes.len()).rev() {
            odometer[slot] += 1;
            if odometer[slot] < axes[slot].1.len() {
                break;
            }
            odometer[slot] = 0;
        }
    }
    if configs.is_empty() {
        return Err(Error::Config("grid expansion yields no configs".into()));
    }
    Ok(configs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_doc() -> String {
        r#"{
            "dataset": {"path": "d.csv", "manifest": "d.manifest.json"},
            "transforms": [{"kind": "zscore"}],
            "model": {"algorithm": "knn", "hyperparameters": {"k": 3}, "seed": 0},
            "cv": {"k": 5, "runs": 2, "base_seed": 42, "grouped": false}
        }"#
        .to_string()
    }

    #[test]
    fn config_round_trips() {
        let config = ExperimentConfig::from_json(&base_doc()).unwrap();
        let json = serde_json::to_string(&config).unwrap();
        let back = ExperimentConfig::from_json(&json).unwrap();
        assert_eq!(back, config);
    }

    #[test]
    fn hash_ignores_key_order() {
        let reordered = r#"{
            "cv": {"grouped": false, "base_seed": 42, "runs": 2, "k": 5},
            "model": {"seed": 0, "hyperparameters": {"k": 3}, "algorithm": "knn"},
            "transforms": [{"kind": "zscore"}],
            "dataset": {"manifest": "d.manifest.json", "path": "d.csv"}
        }"#;
        let a = ExperimentConfig::from_json(&base_doc()).unwrap();
        let b = ExperimentConfig::from_json(reordered).unwrap();
        assert_eq!(config_hash(&a), config_hash(&b));
    }

    #[test]
    fn hash_sees_seed_changes() {
        let a = ExperimentConfig::from_json(&base_doc()).unwrap();
        let mut b = a.clone();
        b.cv.base_seed = 43;
        assert_ne!(config_hash(&a), config_hash(&b));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let doc = base_doc().replace("\"cv\":", "\"extra\": 1, \"cv\":");
        assert!(ExperimentConfig::from_json(&doc).is_err());
    }

    #[test]
    fn resample_must_be_last() {
        let doc = base_doc().replace(
            r#"[{"kind": "zscore"}]"#,
            r#"[{"kind": "resample", "method": "oversample"}, {"kind": "zscore"}]"#,
        );
        let err = ExperimentConfig::from_json(&doc).unwrap_err();
        assert!(err.to_string().contains("last"), "{}", err);
    }

    #[test]
    fn window_must_be_first() {
        let doc = base_doc().replace(
            r#"[{"kind": "zscore"}]"#,
            r#"[{"kind": "zscore"}, {"kind": "window", "width": 3, "stride": 1}]"#,
        );
        let err = ExperimentConfig::from_json(&doc).unwrap_err();
        assert!(err.to_string().contains("first"), "{}", err);
    }

    #[test]
    fn clustering_with_resample_is_rejected() {
        let doc = base_doc()
            .replace(
                r#"[{"kind": "zscore"}]"#,
                r#"[{"kind": "resample", "method": "oversample"}]"#,
            )
            .replace(
                r#""algorithm": "knn", "hyperparameters": {"k": 3}"#,
                r#""algorithm": "kmeans", "hyperparameters": {"k": 3}"#,
            );
        let err = ExperimentConfig::from_json(&doc).unwrap_err();
        assert!(err.to_string().contains("labels"), "{}", err);
    }

    #[test]
    fn literal_batch_expands_to_itself() {
        let batch = BatchConfig::from_json(&base_doc()).unwrap();
        assert_eq!(batch.workers, 1);
        let configs = expand_grid(&batch).unwrap();
        assert_eq!(configs.len(), 1);
        assert_eq!(configs[0], ExperimentConfig::from_json(&base_doc()).unwrap());
    }

    #[test]
    fn axes_multiply() {
        let doc = base_doc()
            .replace(r#"{"k": 3}"#, r#"{"k": [1, 3]}"#)
            .replace(
                r#"[{"kind": "zscore"}]"#,
                r#"[{"kind": "pca", "components": [2]}]"#,
            );
        let configs = expand_grid(&BatchConfig::from_json(&doc).unwrap()).unwrap();
        assert_eq!(configs.len(), 2);
    }

    #[test]
    fn expansion_order_is_document_order_with_last_axis_fastest() {
        let doc = base_doc()
            .replace(r#"{"k": 3}"#, r#"{"k": [1, 3]}"#)
            .replace(r#""runs": 2"#, r#""runs": [2, 3, 4]"#)
            .replace(r#""base_seed": 42"#, r#""base_seed": [7, 8]"#);
        let configs = expand_grid(&BatchConfig::from_json(&doc).unwrap()).unwrap();
        assert_eq!(configs.len(), 12);
        // document order: model.hyperparameters.k, then cv.runs, then
        // cv.base_seed; the last flips fastest
        let coords: Vec<(u64, usize, u64)> = configs
            .iter()
            .map(|c| {
                (
                    c.model.hyperparameters["k"].as_u64().unwrap(),
                    c.cv.runs,
                    c.cv.base_seed,
                )
            })
            .collect();
        assert_eq!(coords[0], (1, 2, 7));
        assert_eq!(coords[1], (1, 2, 8));
        assert_eq!(coords[2], (1, 3, 7));
        assert_eq!(coords[5], (1, 4, 8));
        assert_eq!(coords[6], (3, 2, 7));
        assert_eq!(coords[11], (3, 4, 8));
    }

    #[test]
    fn invalid_grid_point_names_its_coordinates() {
        let doc = base_doc().replace(r#"{"k": 3}"#, r#"{"k": [1, 0]}"#);
        let err = expand_grid(&BatchConfig::from_json(&doc).unwrap()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("model.hyperparameters.k=0"), "{}", msg);
    }

    #[test]
    fn empty_axis_is_rejected() {
        let doc = base_doc().replace(r#"{"k": 3}"#, r#"{"k": []}"#);
        let err = expand_grid(&BatchConfig::from_json(&doc).unwrap()).unwrap_err();
        assert!(err.to_string().contains("no values"), "{}", err);
    }

    #[test]
    fn workers_must_be_a_positive_integer() {
        let with_workers = format!("{{\"workers\": 4, {}", &base_doc()[1..]);
        assert_eq!(BatchConfig::from_json(&with_workers).unwrap().workers, 4);
        let zero = format!("{{\"workers\": 0, {}", &base_doc()[1..]);
        assert!(BatchConfig::from_json(&zero).is_err());
        let list = format!("{{\"workers\": [1, 2], {}", &base_doc()[1..]);
        assert!(BatchConfig::from_json(&list).is_err());
    }
}
