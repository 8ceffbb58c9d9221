//! Leakage-safe cross-validation: fold planning, the per-fold pipeline, and
//! all classification and clustering metrics.

mod engine;
mod folds;
mod metrics;

pub use engine::{
    model_seed, run_experiment, run_experiment_observed, RunRecord, StageEvent,
};
pub use folds::{stratified_folds, FoldPlan};
pub use metrics::{
    adjusted_rand, classification_metrics, confusion_matrix, roc_curve, silhouette,
    ClassificationMetrics, MetricsBundle, RocCurve,
};
