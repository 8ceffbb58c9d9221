//! The experiment engine. Transforms are fitted on training rows only, the
//! fit row set is asserted disjoint from the test fold at runtime, and every
//! random choice derives from the config's base seed, so a config and a
//! dataset fully determine every record up to wall-clock timings.

use std::collections::HashSet;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::canon::{canonical_json, sha256_hex};
use crate::data::{validate_dataset, Dataset};
use crate::error::{Error, Result};
use crate::learn;
use crate::runner::{config_hash, ExperimentConfig};
use crate::transform::{
    apply_transform, fit_transform, make_windows, resample, TransformSpec,
};

use super::folds::stratified_folds;
use super::metrics::{
    adjusted_rand, classification_metrics, confusion_matrix, roc_curve, silhouette,
    MetricsBundle, RocCurve,
};

/// One fold of one run: metrics, timings, and row counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config_hash: String,
    pub run_index: usize,
    pub fold_index: usize,
    pub metrics: MetricsBundle,
    pub train_seconds: f64,
    pub test_seconds: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub n_train_after_resample: usize,
}

impl RunRecord {
    pub fn key(&self) -> (String, usize, usize) {
        (self.config_hash.clone(), self.run_index, self.fold_index)
    }

    /// Digest of everything deterministic: timing fields are zeroed first so
    /// reruns and parallel schedules compare equal.
    pub fn content_digest(&self) -> String {
        let mut clone = self.clone();
        clone.train_seconds = 0.0;
        clone.test_seconds = 0.0;
        let value = serde_json::to_value(&clone).expect("record serializes");
        sha256_hex(&[canonical_json(&value).as_bytes()])
    }
}

/// Engine progress notifications, mainly so tests can observe exactly which
/// rows each fit or resample call saw.
#[derive(Debug)]
pub enum StageEvent<'a> {
    TestRows {
        run: usize,
        fold: usize,
        rows: &'a [usize],
    },
    Fit {
        run: usize,
        fold: usize,
        kind: &'a str,
        rows: &'a [usize],
    },
    Resample {
        run: usize,
        fold: usize,
        rows: &'a [usize],
    },
}

/// The model seed for run r, fold f. The stride decorrelates folds from the
/// run-level fold seeds (base + r).
pub fn model_seed(base: u64, run: usize, fold: usize) -> u64 {
    base.wrapping_add(run as u64 * 10007).wrapping_add(fold as u64)
}

pub fn run_experiment(config: &ExperimentConfig, dataset: &Dataset) -> Result<Vec<RunRecord>> {
    run_experiment_observed(config, dataset, &mut |_| {})
}

fn stage_error(run: usize, fold: usize, stage: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| Error::Experiment {
        run,
        fold,
        stage: stage.to_string(),
        message: e.to_string(),
    }
}

pub fn run_experiment_observed(
    config: &ExperimentConfig,
    dataset: &Dataset,
    observer: &mut dyn FnMut(&StageEvent),
) -> Result<Vec<RunRecord>> {
    config.validate()?;
    let hash = config_hash(config);

    // windowing restructures rows, so it runs before any fold planning; it
    // fits nothing, so it cannot leak fold contents
    let windowed;
    let mut specs: &[TransformSpec] = &config.transforms;
    let data = if let Some(TransformSpec::Window { width, stride }) = specs.first() {
        windowed = make_windows(dataset, *width, *stride)
            .map_err(stage_error(0, 0, "window"))?;
        specs = &specs[1..];
        &windowed
    } else {
        dataset
    };

    let (column_specs, resample_spec) = match specs.last() {
        Some(TransformSpec::Resample { method, seed }) => {
            (&specs[..specs.len() - 1], Some((*method, *seed)))
        }
        _ => (specs, None),
    };

    if config.model.algorithm.is_clustering() {
        return cluster_experiment(config, data, &hash, column_specs, observer);
    }

    let Some(labels) = &data.labels else {
        return Err(Error::Dataset(
            "classification needs a dataset with a label column".into(),
        ));
    };
    let report = validate_dataset(data, config.cv.k);
    if !report.is_clean() {
        let reasons: Vec<String> =
            report.errors.iter().map(|f| f.message.clone()).collect();
        return Err(Error::Dataset(format!(
            "dataset fails validation: {}",
            reasons.join("; ")
        )));
    }
    let groups = if config.cv.grouped {
        match &data.group_ids {
            Some(g) => Some(g.as_slice()),
            None => {
                return Err(Error::Dataset(
                    "grouped cross-validation needs a group column".into(),
                ))
            }
        }
    } else {
        None
    };

    let n_classes = data.n_classes();
    let mut records = Vec::with_capacity(config.cv.runs * config.cv.k);
    for run in 0..config.cv.runs {
        let fold_seed = config.cv.base_seed.wrapping_add(run as u64);
        let plan = stratified_folds(labels, config.cv.k, fold_seed, groups)
            .map_err(stage_error(run, 0, "plan_folds"))?
            .with_run_index(run);

        for fold in 0..config.cv.k {
            let test_rows = plan.test_rows(fold);
            let train_rows = plan.train_rows(fold);
            observer(&StageEvent::TestRows {
                run,
                fold,
                rows: &test_rows,
            });
            let test_set: HashSet<usize> = test_rows.iter().cloned().collect();

            let mut train_x = data.features.select_rows(&train_rows);
            let mut train_y: Vec<usize> = train_rows.iter().map(|&i| labels[i]).collect();
            let mut test_x = data.features.select_rows(&test_rows);
            let test_y: Vec<usize> = test_rows.iter().map(|&i| labels[i]).collect();

            for spec in column_specs {
                observer(&StageEvent::Fit {
                    run,
                    fold,
                    kind: spec.kind_name(),
                    rows: &train_rows,
                });
                assert_fit_rows_clean(&train_rows, &test_set, run, fold);
                let fitted =
                    fit_transform(spec, &train_x).map_err(stage_error(run, fold, "fit_transform"))?;
                train_x = apply_transform(&fitted, &train_x)
                    .map_err(stage_error(run, fold, "apply_transform"))?;
                test_x = apply_transform(&fitted, &test_x)
                    .map_err(stage_error(run, fold, "apply_transform"))?;
            }

            let n_train = train_rows.len();
            let seed = model_seed(config.cv.base_seed, run, fold);
            if let Some((method, explicit_seed)) = resample_spec {
                observer(&StageEvent::Resample {
                    run,
                    fold,
                    rows: &train_rows,
                });
                assert_fit_rows_clean(&train_rows, &test_set, run, fold);
                let (rx, ry) = resample(&train_x, &train_y, method, explicit_seed.unwrap_or(seed))
                    .map_err(stage_error(run, fold, "resample"))?;
                train_x = rx;
                train_y = ry;
            }

            let mut model_spec = config.model.clone();
            model_spec.seed = seed;
            let train_start = Instant::now();
            let model = learn::train(&model_spec, &train_x, &train_y)
                .map_err(stage_error(run, fold, "train"))?;
            let train_seconds = train_start.elapsed().as_secs_f64();

            let test_start = Instant::now();
            let predictions = learn::predict(&model, &test_x)
                .map_err(stage_error(run, fold, "predict"))?;
            let scores = learn::predict_scores(&model, &test_x)
                .map_err(stage_error(run, fold, "predict"))?;
            let test_seconds = test_start.elapsed().as_secs_f64();

            let cm = confusion_matrix(&test_y, &predictions, n_classes)
                .map_err(stage_error(run, fold, "metrics"))?;
            let classification = classification_metrics(&cm);
            let curves: Vec<Option<RocCurve>> = (0..n_classes)
                .map(|c| {
                    if c >= scores.n_cols() {
                        return None;
                    }
                    roc_curve(&test_y, &scores.column(c), c).ok()
                })
                .collect();
            let per_class_auc: Vec<Option<f64>> =
                curves.iter().map(|c| c.as_ref().map(|r| r.auc)).collect();
            let per_class_roc: Vec<Option<Vec<(f64, f64)>>> =
                curves.into_iter().map(|c| c.map(|r| r.points)).collect();
            let defined: Vec<f64> = per_class_auc.iter().filter_map(|&a| a).collect();
            let macro_auc = if defined.is_empty() {
                None
            } else {
                Some(defined.iter().sum::<f64>() / defined.len() as f64)
            };

            records.push(RunRecord {
                config_hash: hash.clone(),
                run_index: run,
                fold_index: fold,
                metrics: MetricsBundle {
                    classification: Some(classification),
                    per_class_auc,
                    per_class_roc,
                    macro_auc,
                    silhouette: None,
                    adjusted_rand: None,
                },
                train_seconds,
                test_seconds,
                n_train,
                n_test: test_rows.len(),
                n_train_after_resample: train_x.n_rows(),
            });
        }
    }
    Ok(records)
}

/// Clustering has no held-out fold: transforms and the model fit all rows,
/// recorded as run 0, fold 0.
fn cluster_experiment(
    config: &ExperimentConfig,
    data: &Dataset,
    hash: &str,
    column_specs: &[TransformSpec],
    observer: &mut dyn FnMut(&StageEvent),
) -> Result<Vec<RunRecord>> {
    let all_rows: Vec<usize> = (0..data.n_rows()).collect();
    observer(&StageEvent::TestRows {
        run: 0,
        fold: 0,
        rows: &[],
    });

    let mut x = data.features.clone();
    for spec in column_specs {
        observer(&StageEvent::Fit {
            run: 0,
            fold: 0,
            kind: spec.kind_name(),
            rows: &all_rows,
        });
        let fitted = fit_transform(spec, &x).map_err(stage_error(0, 0, "fit_transform"))?;
        x = apply_transform(&fitted, &x).map_err(stage_error(0, 0, "apply_transform"))?;
    }

    let mut model_spec = config.model.clone();
    model_spec.seed = model_seed(config.cv.base_seed, 0, 0);
    let train_start = Instant::now();
    let assignments =
        learn::cluster(&model_spec, &x).map_err(stage_error(0, 0, "cluster"))?;
    let train_seconds = train_start.elapsed().as_secs_f64();

    let silhouette_score = silhouette(&x, &assignments).ok();
    let rand_score = data.labels.as_ref().and_then(|labels| {
        let truth: Vec<i64> = labels.iter().map(|&l| l as i64).collect();
        adjusted_rand(&assignments, &truth).ok()
    });

    Ok(vec![RunRecord {
        config_hash: hash.to_string(),
        run_index: 0,
        fold_index: 0,
        metrics: MetricsBundle {
            classification: None,
            per_class_auc: Vec::new(),
            per_class_roc: Vec::new(),
            macro_auc: None,
            silhouette: silhouette_score,
            adjusted_rand: rand_score,
        },
        train_seconds,
        test_seconds: 0.0,
        n_train: data.n_rows(),
        n_test: 0,
        n_train_after_resample: data.n_rows(),
    }])
}

/// The runtime leakage guard: any overlap between rows reaching a fit or
/// resample call and the fold's test rows is a bug, not a recoverable error.
fn assert_fit_rows_clean(fit_rows: &[usize], test_set: &HashSet<usize>, run: usize, fold: usize) {
    for row in fit_rows {
        assert!(
            !test_set.contains(row),
            "leakage: run {} fold {} let test row {} reach a fit call",
            run,
            fold,
            row
        );
    }
}
