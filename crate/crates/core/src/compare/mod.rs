//! Scenario-weighted model ranking and the automated statistical comparison
//! engine over paired per-fold metric samples.

mod engine;

pub use engine::{
    compare, AssumptionCheck, ComparisonReport, Family, NemenyiSummary, Omnibus,
    PairwiseComparison,
};

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluate::RunRecord;

/// Whether larger or smaller values of a metric count as an improvement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Maximize,
    Minimize,
}

/// Scalar metrics addressable by name in scenarios and comparisons, with the
/// direction that counts as better.
pub const METRIC_IDS: &[(&str, Direction)] = &[
    ("accuracy", Direction::Maximize),
    ("macro_precision", Direction::Maximize),
    ("macro_recall", Direction::Maximize),
    ("macro_f1", Direction::Maximize),
    ("weighted_precision", Direction::Maximize),
    ("weighted_recall", Direction::Maximize),
    ("weighted_f1", Direction::Maximize),
    ("macro_auc", Direction::Maximize),
    ("silhouette", Direction::Maximize),
    ("adjusted_rand", Direction::Maximize),
    ("train_seconds", Direction::Minimize),
    ("test_seconds", Direction::Minimize),
];

/// The improvement direction of a registered metric id.
pub fn metric_direction(id: &str) -> Option<Direction> {
    METRIC_IDS.iter().find(|(m, _)| *m == id).map(|(_, d)| *d)
}

/// Pulls a registered metric out of one record. None when the record does not
/// carry it, which happens for classification metrics on clustering records
/// and for scores a fold could not define.
pub fn metric_value(record: &RunRecord, id: &str) -> Option<f64> {
    let cls = record.metrics.classification.as_ref();
    match id {
        "accuracy" => cls.map(|c| c.accuracy),
        "macro_precision" => cls.map(|c| c.macro_precision),
        "macro_recall" => cls.map(|c| c.macro_recall),
        "macro_f1" => cls.map(|c| c.macro_f1),
        "weighted_precision" => cls.map(|c| c.weighted_precision),
        "weighted_recall" => cls.map(|c| c.weighted_recall),
        "weighted_f1" => cls.map(|c| c.weighted_f1),
        "macro_auc" => record.metrics.macro_auc,
        "silhouette" => record.metrics.silhouette,
        "adjusted_rand" => record.metrics.adjusted_rand,
        "train_seconds" => Some(record.train_seconds),
        "test_seconds" => Some(record.test_seconds),
        _ => None,
    }
}

/// Mean of a metric over the records that define it. None when none do.
pub fn mean_metric(records: &[RunRecord], id: &str) -> Option<f64> {
    let values: Vec<f64> = records.iter().filter_map(|r| metric_value(r, id)).collect();
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// One weighted ranking criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Criterion {
    pub metric: String,
    pub weight: f64,
    pub direction: Direction,
}

/// A named weighting of metrics describing what matters in one deployment
/// situation. Weights are rescaled to sum 1 when the scenario is loaded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub criteria: Vec<Criterion>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Scenario> {
        let mut scenario: Scenario = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("invalid scenario: {}", e)))?;
        scenario.normalize()?;
        Ok(scenario)
    }

    pub fn from_file(path: &Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        Scenario::from_json(&text)
    }

    /// Checks every criterion against the metric registry and rescales the
    /// weights to sum 1.
    pub fn normalize(&mut self) -> Result<()> {
        if self.criteria.is_empty() {
            return Err(Error::Config(
                "a scenario needs at least one criterion".into(),
            ));
        }
        for criterion in &self.criteria {
            if !criterion.weight.is_finite() || criterion.weight <= 0.0 {
                return Err(Error::Config(format!(
                    "criterion {} weight must be positive, got {}",
                    criterion.metric, criterion.weight
                )));
            }
            if metric_direction(&criterion.metric).is_none() {
                let known: Vec<&str> = METRIC_IDS.iter().map(|(m, _)| *m).collect();
                return Err(Error::Config(format!(
                    "unknown metric {}; known ids: {}",
                    criterion.metric,
                    known.join(", ")
                )));
            }
        }
        let total: f64 = self.criteria.iter().map(|c| c.weight).sum();
        for criterion in &mut self.criteria {
            criterion.weight /= total;
        }
        Ok(())
    }
}

/// Ranks models under a scenario. Each criterion metric is min-max normalized
/// across the models (a constant metric scores 0.5 for everyone), minimized
/// metrics are flipped, and the weighted sum orders the result descending
/// with ties falling back to model id order.
pub fn rank_models(
    scenario: &Scenario,
    summaries: &BTreeMap<String, BTreeMap<String, f64>>,
) -> Result<Vec<(String, f64)>> {
    if summaries.is_empty() {
        return Err(Error::Degenerate("no models to rank".into()));
    }
    let mut scores = vec![0.0; summaries.len()];
    for criterion in &scenario.criteria {
        let mut raw = Vec::with_capacity(summaries.len());
        for (model, metrics) in summaries {
            let value = *metrics.get(&criterion.metric).ok_or_else(|| {
                Error::Config(format!(
                    "model {} lacks metric {}",
                    model, criterion.metric
                ))
            })?;
            if !value.is_finite() {
                return Err(Error::Degenerate(format!(
                    "model {} has a non-finite {}",
                    model, criterion.metric
                )));
            }
            raw.push(value);
        }
        let min = raw.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = raw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for (score, value) in scores.iter_mut().zip(&raw) {
            let normalized = if max > min {
                (value - min) / (max - min)
            } else {
                0.5
            };
            let oriented = match criterion.direction {
                Direction::Maximize => normalized,
                Direction::Minimize => 1.0 - normalized,
            };
            *score += criterion.weight * oriented;
        }
    }
    let mut ranked: Vec<(String, f64)> = summaries.keys().cloned().zip(scores).collect();
    ranked.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .expect("scores are finite")
            .then_with(|| a.0.cmp(&b.0))
    });
    Ok(ranked)
}

/// Paired per-(run, fold) values of one metric for several models. Every
/// model holds exactly the same (run, fold) keys in the same order, so row s
/// of every model came from the same fold of the same shuffled split.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSamples {
    metric: String,
    keys: Vec<(usize, usize)>,
    models: Vec<String>,
    values: Vec<Vec<f64>>,
}

impl MetricSamples {
    /// Builds paired samples from per-model keyed values. Entries are sorted
    /// by (run, fold) and every model must supply the same keys.
    pub fn new(
        metric: impl Into<String>,
        per_model: Vec<(String, Vec<((usize, usize), f64)>)>,
    ) -> Result<MetricSamples> {
        let metric = metric.into();
        if per_model.is_empty() {
            return Err(Error::Degenerate(
                "metric samples need at least one model".into(),
            ));
        }
        let mut models: Vec<String> = Vec::with_capacity(per_model.len());
        let mut values: Vec<Vec<f64>> = Vec::with_capacity(per_model.len());
        let mut keys: Option<Vec<(usize, usize)>> = None;
        for (model, mut entries) in per_model {
            if models.contains(&model) {
                return Err(Error::Config(format!("duplicate model id {}", model)));
            }
            entries.sort_by_key(|(key, _)| *key);
            for pair in entries.windows(2) {
                let ((run, fold), _) = pair[0];
                if pair[1].0 == (run, fold) {
                    return Err(Error::Config(format!(
                        "model {} repeats run {} fold {}",
                        model, run, fold
                    )));
                }
            }
            for ((run, fold), value) in &entries {
                if !value.is_finite() {
                    return Err(Error::Degenerate(format!(
                        "model {} has a non-finite {} at run {} fold {}",
                        model, metric, run, fold
                    )));
                }
            }
            let model_keys: Vec<(usize, usize)> = entries.iter().map(|(k, _)| *k).collect();
            match &keys {
                None => {
                    if model_keys.len() < 3 {
                        return Err(Error::Degenerate(format!(
                            "a comparison needs at least 3 paired samples, model {} has {}",
                            model,
                            model_keys.len()
                        )));
                    }
                    keys = Some(model_keys);
                }
                Some(reference) => {
                    if model_keys != *reference {
                        return Err(Error::Dimension(format!(
                            "model {} is not paired with model {}: their (run, fold) keys differ",
                            model, models[0]
                        )));
                    }
                }
            }
            models.push(model);
            values.push(entries.into_iter().map(|(_, v)| v).collect());
        }
        Ok(MetricSamples {
            metric,
            keys: keys.expect("at least one model was accepted"),
            models,
            values,
        })
    }

    /// Extracts one metric from per-model record sets. Every record must
    /// carry the metric.
    pub fn from_records(
        metric: &str,
        groups: &[(String, Vec<RunRecord>)],
    ) -> Result<MetricSamples> {
        let mut per_model = Vec::with_capacity(groups.len());
        for (model, records) in groups {
            let mut entries = Vec::with_capacity(records.len());
            for record in records {
                let value = metric_value(record, metric).ok_or_else(|| {
                    Error::Config(format!(
                        "model {} has no {} at run {} fold {}",
                        model, metric, record.run_index, record.fold_index
                    ))
                })?;
                entries.push(((record.run_index, record.fold_index), value));
            }
            per_model.push((model.clone(), entries));
        }
        MetricSamples::new(metric, per_model)
    }

    pub fn metric(&self) -> &str {
        &self.metric
    }

    pub fn keys(&self) -> &[(usize, usize)] {
        &self.keys
    }

    pub fn model_ids(&self) -> &[String] {
        &self.models
    }

    pub fn n_models(&self) -> usize {
        self.models.len()
    }

    pub fn n_samples(&self) -> usize {
        self.keys.len()
    }

    /// All values for one model, in key order.
    pub fn values(&self, model: usize) -> &[f64] {
        &self.values[model]
    }

    /// One row per (run, fold) key, one column per model.
    pub fn sample_matrix(&self) -> Vec<Vec<f64>> {
        (0..self.keys.len())
            .map(|s| self.values.iter().map(|column| column[s]).collect())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluate::{MetricsBundle, RunRecord};

    fn scenario_of(criteria: &[(&str, f64, Direction)]) -> Scenario {
        let mut scenario = Scenario {
            name: "test".into(),
            criteria: criteria
                .iter()
                .map(|(metric, weight, direction)| Criterion {
                    metric: metric.to_string(),
                    weight: *weight,
                    direction: *direction,
                })
                .collect(),
        };
        scenario.normalize().unwrap();
        scenario
    }

    fn summaries_of(rows: &[(&str, &[(&str, f64)])]) -> BTreeMap<String, BTreeMap<String, f64>> {
        rows.iter()
            .map(|(model, metrics)| {
                (
                    model.to_string(),
                    metrics
                        .iter()
                        .map(|(id, v)| (id.to_string(), *v))
                        .collect(),
                )
            })
            .collect()
    }

    #[test]
    fn scenario_weights_normalize_to_one() {
        let scenario = Scenario::from_json(
            r#"{"name": "ops", "criteria": [
                {"metric": "macro_f1", "weight": 1.0, "direction": "maximize"},
                {"metric": "train_seconds", "weight": 3.0, "direction": "minimize"}
            ]}"#,
        )
        .unwrap();
        assert_eq!(scenario.name, "ops");
        assert!((scenario.criteria[0].weight - 0.25).abs() < 1e-12);
        assert!((scenario.criteria[1].weight - 0.75).abs() < 1e-12);
    }

    #[test]
    fn scenario_rejects_bad_criteria() {
        let empty = Scenario::from_json(r#"{"name": "x", "criteria": []}"#);
        assert!(empty.is_err());

        let negative = Scenario::from_json(
            r#"{"name": "x", "criteria": [
                {"metric": "accuracy", "weight": -1.0, "direction": "maximize"}
            ]}"#,
        );
        assert!(negative.unwrap_err().to_string().contains("positive"));

        let unknown = Scenario::from_json(
            r#"{"name": "x", "criteria": [
                {"metric": "speed", "weight": 1.0, "direction": "maximize"}
            ]}"#,
        );
        let message = unknown.unwrap_err().to_string();
        assert!(message.contains("speed"));
        assert!(message.contains("accuracy"));
    }

    #[test]
    fn single_criterion_ranking_matches_metric_order() {
        let scenario = scenario_of(&[("accuracy", 1.0, Direction::Maximize)]);
        let summaries = summaries_of(&[
            ("alpha", &[("accuracy", 0.7)]),
            ("beta", &[("accuracy", 0.9)]),
            ("gamma", &[("accuracy", 0.8)]),
        ]);
        let ranked = rank_models(&scenario, &summaries).unwrap();
        let order: Vec<&str> = ranked.iter().map(|(m, _)| m.as_str()).collect();
        assert_eq!(order, ["beta", "gamma", "alpha"]);
    }

    #[test]
    fn opposing_criteria_tie_and_break_lexicographically() {
        let scenario = scenario_of(&[
            ("macro_f1", 0.5, Direction::Maximize),
            ("train_seconds", 0.5, Direction::Minimize),
        ]);
        let summaries = summaries_of(&[
            ("a", &[("macro_f1", 0.8), ("train_seconds", 2.0)]),
            ("b", &[("macro_f1", 0.6), ("train_seconds", 1.0)]),
        ]);
        let ranked = rank_models(&scenario, &summaries).unwrap();
        assert_eq!(ranked[0].0, "a");
        assert_eq!(ranked[1].0, "b");
        assert!((ranked[0].1 - 0.5).abs() < 1e-12);
        assert!((ranked[1].1 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn identical_models_all_score_half() {
        let scenario = scenario_of(&[
            ("accuracy", 1.0, Direction::Maximize),
            ("test_seconds", 1.0, Direction::Minimize),
        ]);
        let summaries = summaries_of(&[
            ("c", &[("accuracy", 0.9), ("test_seconds", 1.0)]),
            ("a", &[("accuracy", 0.9), ("test_seconds", 1.0)]),
            ("b", &[("accuracy", 0.9), ("test_seconds", 1.0)]),
        ]);
        let ranked = rank_models(&scenario, &summaries).unwrap();
        let order: Vec<&str> = ranked.iter().map(|(m, _)| m.as_str()).collect();
        assert_eq!(order, ["a", "b", "c"]);
        for (_, score) in &ranked {
            assert!((score - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn ranking_is_invariant_under_affine_metric_rescaling() {
        let scenario = scenario_of(&[
            ("accuracy", 2.0, Direction::Maximize),
            ("train_seconds", 1.0, Direction::Minimize),
        ]);
        let base = summaries_of(&[
            ("a", &[("accuracy", 0.61), ("train_seconds", 4.0)]),
            ("b", &[("accuracy", 0.92), ("train_seconds", 9.5)]),
            ("c", &[("accuracy", 0.77), ("train_seconds", 1.2)]),
            ("d", &[("accuracy", 0.70), ("train_seconds", 6.0)]),
        ]);
        let mut rescaled = base.clone();
        for metrics in rescaled.values_mut() {
            let v = metrics["train_seconds"];
            metrics.insert("train_seconds".into(), 3.0 * v + 7.0);
        }
        let before: Vec<String> = rank_models(&scenario, &base)
            .unwrap()
            .into_iter()
            .map(|(m, _)| m)
            .collect();
        let after: Vec<String> = rank_models(&scenario, &rescaled)
            .unwrap()
            .into_iter()
            .map(|(m, _)| m)
            .collect();
        assert_eq!(before, after);
    }

    #[test]
    fn missing_metric_is_reported_per_model() {
        let scenario = scenario_of(&[("macro_f1", 1.0, Direction::Maximize)]);
        let summaries = summaries_of(&[
            ("a", &[("macro_f1", 0.8)]),
            ("b", &[("accuracy", 0.9)]),
        ]);
        let err = rank_models(&scenario, &summaries).unwrap_err().to_string();
        assert!(err.contains("b"));
        assert!(err.contains("macro_f1"));
    }

    fn record(run: usize, fold: usize, accuracy: f64) -> RunRecord {
        let confusion = vec![vec![1, 0], vec![0, 1]];
        let classification = crate::evaluate::classification_metrics(&confusion);
        let mut record = RunRecord {
            config_hash: "h".into(),
            run_index: run,
            fold_index: fold,
            metrics: MetricsBundle {
                classification: Some(classification),
                per_class_auc: vec![None, None],
                per_class_roc: vec![None, None],
                macro_auc: None,
                silhouette: None,
                adjusted_rand: None,
            },
            train_seconds: 0.25,
            test_seconds: 0.5,
            n_train: 8,
            n_test: 2,
            n_train_after_resample: 8,
        };
        if let Some(c) = record.metrics.classification.as_mut() {
            c.accuracy = accuracy;
        }
        record
    }

    #[test]
    fn metric_values_cover_the_registry() {
        let r = record(0, 0, 0.75);
        assert_eq!(metric_value(&r, "accuracy"), Some(0.75));
        assert_eq!(metric_value(&r, "train_seconds"), Some(0.25));
        assert_eq!(metric_value(&r, "test_seconds"), Some(0.5));
        assert_eq!(metric_value(&r, "macro_auc"), None);
        assert_eq!(metric_value(&r, "silhouette"), None);
        assert_eq!(metric_value(&r, "nonsense"), None);
        assert_eq!(metric_direction("train_seconds"), Some(Direction::Minimize));
        assert_eq!(metric_direction("macro_f1"), Some(Direction::Maximize));
        for (id, _) in METRIC_IDS {
            assert!(metric_direction(id).is_some());
        }
    }

    #[test]
    fn mean_metric_skips_records_without_the_value() {
        let records = vec![record(0, 0, 0.5), record(0, 1, 1.0)];
        assert_eq!(mean_metric(&records, "accuracy"), Some(0.75));
        assert_eq!(mean_metric(&records, "macro_auc"), None);
    }

    #[test]
    fn paired_samples_sort_keys_and_expose_the_matrix() {
        let samples = MetricSamples::new(
            "accuracy",
            vec![
                (
                    "a".into(),
                    vec![((1, 0), 0.3), ((0, 0), 0.1), ((0, 1), 0.2)],
                ),
                (
                    "b".into(),
                    vec![((0, 0), 0.4), ((0, 1), 0.5), ((1, 0), 0.6)],
                ),
            ],
        )
        .unwrap();
        assert_eq!(samples.keys(), [(0, 0), (0, 1), (1, 0)]);
        assert_eq!(samples.values(0), [0.1, 0.2, 0.3]);
        assert_eq!(samples.values(1), [0.4, 0.5, 0.6]);
        assert_eq!(
            samples.sample_matrix(),
            vec![vec![0.1, 0.4], vec![0.2, 0.5], vec![0.3, 0.6]]
        );
    }

    #[test]
    fn unpaired_or_short_samples_are_rejected() {
        let mismatched = MetricSamples::new(
            "accuracy",
            vec![
                ("a".into(), vec![((0, 0), 0.1), ((0, 1), 0.2), ((0, 2), 0.3)]),
                ("b".into(), vec![((0, 0), 0.1), ((0, 1), 0.2), ((1, 0), 0.3)]),
            ],
        );
        assert!(mismatched
            .unwrap_err()
            .to_string()
            .contains("not paired"));

        let duplicate = MetricSamples::new(
            "accuracy",
            vec![(
                "a".into(),
                vec![((0, 0), 0.1), ((0, 0), 0.2), ((0, 1), 0.3)],
            )],
        );
        assert!(duplicate.unwrap_err().to_string().contains("repeats"));

        let short = MetricSamples::new(
            "accuracy",
            vec![("a".into(), vec![((0, 0), 0.1), ((0, 1), 0.2)])],
        );
        assert!(short.unwrap_err().to_string().contains("at least 3"));
    }

    #[test]
    fn samples_from_records_require_the_metric_everywhere() {
        let groups = vec![
            ("m1".into(), vec![record(0, 0, 0.1), record(0, 1, 0.2), record(1, 0, 0.3)]),
            ("m2".into(), vec![record(0, 0, 0.4), record(0, 1, 0.5), record(1, 0, 0.6)]),
        ];
        let samples = MetricSamples::from_records("accuracy", &groups).unwrap();
        assert_eq!(samples.n_models(), 2);
        assert_eq!(samples.n_samples(), 3);
        assert_eq!(samples.values(1), [0.4, 0.5, 0.6]);

        let missing = MetricSamples::from_records("macro_auc", &groups)
            .unwrap_err()
            .to_string();
        assert!(missing.contains("m1"));
        assert!(missing.contains("macro_auc"));
    }
}
