//! From-scratch learners. Every algorithm is deterministic given its spec,
//! its seed, and its training data; randomized procedures draw from the
//! crate's own generator so results reproduce across platforms.

mod dbscan;
mod gnb;
mod kmeans;
mod knn;
mod logreg;
mod tree;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::canon::{canonical_json, sha256_hex};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub use tree::TreeNode;

/// Algorithm identifiers. Together with the hyperparameter names these form
/// the stable config-file contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Knn,
    Gnb,
    Tree,
    Logreg,
    Kmeans,
    Dbscan,
}

impl Algorithm {
    pub fn id(&self) -> &'static str {
        match self {
            Algorithm::Knn => "knn",
            Algorithm::Gnb => "gnb",
            Algorithm::Tree => "tree",
            Algorithm::Logreg => "logreg",
            Algorithm::Kmeans => "kmeans",
            Algorithm::Dbscan => "dbscan",
        }
    }

    /// Clustering algorithms take no labels and skip cross-validation.
    pub fn is_clustering(&self) -> bool {
        matches!(self, Algorithm::Kmeans | Algorithm::Dbscan)
    }
}

/// A model request: which algorithm, its hyperparameters, and the seed that
/// drives any randomized step. Hyperparameters stay a raw JSON map here so
/// config files and grid expansion can treat them uniformly; they are parsed
/// and validated against the per-algorithm schema before any training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub algorithm: Algorithm,
    #[serde(default)]
    pub hyperparameters: serde_json::Map<String, Value>,
    #[serde(default)]
    pub seed: u64,
}

impl ModelSpec {
    pub fn new(algorithm: Algorithm, seed: u64) -> Self {
        ModelSpec {
            algorithm,
            hyperparameters: serde_json::Map::new(),
            seed,
        }
    }

    pub fn with_param(mut self, name: &str, value: Value) -> Self {
        self.hyperparameters.insert(name.to_string(), value);
        self
    }

    /// Parse and range-check the hyperparameters for this spec's algorithm.
    pub fn validate(&self) -> Result<()> {
        match self.algorithm {
            Algorithm::Knn => self.knn_params().map(|_| ()),
            Algorithm::Gnb => self.gnb_params(),
            Algorithm::Tree => self.tree_params().map(|_| ()),
            Algorithm::Logreg => self.logreg_params().map(|_| ()),
            Algorithm::Kmeans => self.kmeans_params().map(|_| ()),
            Algorithm::Dbscan => self.dbscan_params().map(|_| ()),
        }
    }

    fn parse_params<T: serde::de::DeserializeOwned>(&self) -> Result<T> {
        serde_json::from_value(Value::Object(self.hyperparameters.clone())).map_err(|e| {
            Error::Config(format!(
                "invalid hyperparameters for {}: {}",
                self.algorithm.id(),
                e
            ))
        })
    }

    pub(crate) fn knn_params(&self) -> Result<KnnParams> {
        let p: KnnParams = self.parse_params()?;
        if p.k < 1 {
            return Err(Error::Config("knn k must be at least 1".into()));
        }
        Ok(p)
    }

    pub(crate) fn gnb_params(&self) -> Result<()> {
        let _: GnbParams = self.parse_params()?;
        Ok(())
    }

    pub(crate) fn tree_params(&self) -> Result<TreeParams> {
        let p: TreeParams = self.parse_params()?;
        if p.max_depth < 1 {
            return Err(Error::Config("tree max_depth must be at least 1".into()));
        }
        if p.min_samples_split < 2 {
            return Err(Error::Config(
                "tree min_samples_split must be at least 2".into(),
            ));
        }
        Ok(p)
    }

    pub(crate) fn logreg_params(&self) -> Result<LogregParams> {
        let p: LogregParams = self.parse_params()?;
        if !(p.learning_rate > 0.0) {
            return Err(Error::Config("logreg learning_rate must be positive".into()));
        }
        if !(p.l2 >= 0.0) {
            return Err(Error::Config("logreg l2 must be non-negative".into()));
        }
        if p.max_iters < 1 {
            return Err(Error::Config("logreg max_iters must be at least 1".into()));
        }
        if !(p.tol > 0.0) {
            return Err(Error::Config("logreg tol must be positive".into()));
        }
        Ok(p)
    }

    pub(crate) fn kmeans_params(&self) -> Result<KmeansParams> {
        let p: KmeansParams = self.parse_params()?;
        if p.k < 1 {
            return Err(Error::Config("kmeans k must be at least 1".into()));
        }
        if p.max_iters < 1 {
            return Err(Error::Config("kmeans max_iters must be at least 1".into()));
        }
        if !(p.tol >= 0.0) {
            return Err(Error::Config("kmeans tol must be non-negative".into()));
        }
        Ok(p)
    }

    pub(crate) fn dbscan_params(&self) -> Result<DbscanParams> {
        let p: DbscanParams = self.parse_params()?;
        if !(p.eps > 0.0) {
            return Err(Error::Config("dbscan eps must be positive".into()));
        }
        if p.min_pts < 1 {
            return Err(Error::Config("dbscan min_pts must be at least 1".into()));
        }
        Ok(p)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct KnnParams {
    pub k: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct GnbParams {}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct TreeParams {
    #[serde(default = "default_max_depth")]
    pub max_depth: usize,
    #[serde(default = "default_min_samples_split")]
    pub min_samples_split: usize,
}

fn default_max_depth() -> usize {
    10
}

fn default_min_samples_split() -> usize {
    2
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct LogregParams {
    #[serde(default = "default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default)]
    pub l2: f64,
    #[serde(default = "default_logreg_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_logreg_tol")]
    pub tol: f64,
}

fn default_learning_rate() -> f64 {
    0.1
}

fn default_logreg_max_iters() -> usize {
    5000
}

fn default_logreg_tol() -> f64 {
    1e-6
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct KmeansParams {
    pub k: usize,
    #[serde(default = "default_kmeans_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_kmeans_tol")]
    pub tol: f64,
}

fn default_kmeans_max_iters() -> usize {
    100
}

fn default_kmeans_tol() -> f64 {
    1e-6
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct DbscanParams {
    pub eps: f64,
    pub min_pts: usize,
}

/// A trained classifier. Immutable once built; prediction never mutates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum FittedModel {
    Knn {
        k: usize,
        train_x: Matrix,
        train_y: Vec<usize>,
        n_classes: usize,
    },
    Gnb {
        priors: Vec<f64>,
        means: Matrix,
        variances: Matrix,
        n_classes: usize,
    },
    Tree {
        nodes: Vec<TreeNode>,
        n_features: usize,
        n_classes: usize,
    },
    Logreg {
        weights: Matrix,
        bias: Vec<f64>,
        n_classes: usize,
    },
}

impl FittedModel {
    pub fn n_classes(&self) -> usize {
        match self {
            FittedModel::Knn { n_classes, .. }
            | FittedModel::Gnb { n_classes, .. }
            | FittedModel::Tree { n_classes, .. }
            | FittedModel::Logreg { n_classes, .. } => *n_classes,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            FittedModel::Knn { train_x, .. } => train_x.n_cols(),
            FittedModel::Gnb { means, .. } => means.n_cols(),
            FittedModel::Tree { n_features, .. } => *n_features,
            FittedModel::Logreg { weights, .. } => weights.n_cols(),
        }
    }

    /// Content hash of the learned state; equal states hash equal.
    pub fn digest(&self) -> String {
        let value = serde_json::to_value(self).expect("model state serializes");
        sha256_hex(&[canonical_json(&value).as_bytes()])
    }

    fn check_query(&self, x: &Matrix) -> Result<()> {
        if x.n_cols() != self.n_features() {
            return Err(Error::Dimension(format!(
                "model expects {} features, query has {}",
                self.n_features(),
                x.n_cols()
            )));
        }
        Ok(())
    }
}

fn check_training_set(x: &Matrix, y: &[usize]) -> Result<usize> {
    if x.n_rows() != y.len() {
        return Err(Error::Dimension(format!(
            "training features have {} rows, labels have {}",
            x.n_rows(),
            y.len()
        )));
    }
    if x.n_rows() == 0 {
        return Err(Error::Degenerate("training set is empty".into()));
    }
    let n_classes = y.iter().max().map(|m| m + 1).unwrap_or(0);
    if n_classes < 2 {
        return Err(Error::Degenerate(
            "training labels contain fewer than 2 classes".into(),
        ));
    }
    Ok(n_classes)
}

/// Train a classifier. The same spec and data always produce the same model.
pub fn train(spec: &ModelSpec, x: &Matrix, y: &[usize]) -> Result<FittedModel> {
    let n_classes = check_training_set(x, y)?;
    match spec.algorithm {
        Algorithm::Knn => {
            let p = spec.knn_params()?;
            knn::train(p.k, x, y, n_classes)
        }
        Algorithm::Gnb => {
            spec.gnb_params()?;
            gnb::train(x, y, n_classes)
        }
        Algorithm::Tree => {
            let p = spec.tree_params()?;
            tree::train(&p, x, y, n_classes)
        }
        Algorithm::Logreg => {
            let p = spec.logreg_params()?;
            logreg::train(&p, x, y, n_classes)
        }
        Algorithm::Kmeans | Algorithm::Dbscan => Err(Error::Config(format!(
            "{} is a clustering algorithm; use cluster()",
            spec.algorithm.id()
        ))),
    }
}

/// Per-class scores, one row per query row. Rows are valid distributions.
pub fn predict_scores(model: &FittedModel, x: &Matrix) -> Result<Matrix> {
    model.check_query(x)?;
    let scores = match model {
        FittedModel::Knn {
            k,
            train_x,
            train_y,
            n_classes,
        } => knn::scores(*k, train_x, train_y, *n_classes, x),
        FittedModel::Gnb {
            priors,
            means,
            variances,
            n_classes,
        } => gnb::scores(priors, means, variances, *n_classes, x),
        FittedModel::Tree {
            nodes, n_classes, ..
        } => tree::scores(nodes, *n_classes, x),
        FittedModel::Logreg {
            weights,
            bias,
            n_classes,
        } => logreg::scores(weights, bias, *n_classes, x),
    };
    debug_assert!(scores
        .rows()
        .all(|r| (r.iter().sum::<f64>() - 1.0).abs() < 1e-9));
    Ok(scores)
}

/// Predicted labels: the highest-scoring class per row, lowest class index
/// on ties. kNN refines its ties by total neighbor distance first.
pub fn predict(model: &FittedModel, x: &Matrix) -> Result<Vec<usize>> {
    model.check_query(x)?;
    match model {
        FittedModel::Knn {
            k,
            train_x,
            train_y,
            n_classes,
        } => Ok(knn::predict(*k, train_x, train_y, *n_classes, x)),
        _ => {
            let scores = predict_scores(model, x)?;
            Ok(scores.rows().map(argmax_lowest).collect())
        }
    }
}

/// Index of the largest value, preferring the lowest index on exact ties.
pub(crate) fn argmax_lowest(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// Cluster unlabeled rows. kmeans assigns 0..k; dbscan marks noise as -1.
pub fn cluster(spec: &ModelSpec, x: &Matrix) -> Result<Vec<i64>> {
    if x.n_rows() == 0 {
        return Err(Error::Degenerate("clustering input is empty".into()));
    }
    match spec.algorithm {
        Algorithm::Kmeans => {
            let p = spec.kmeans_params()?;
            kmeans::cluster(&p, spec.seed, x)
        }
        Algorithm::Dbscan => {
            let p = spec.dbscan_params()?;
            Ok(dbscan::cluster(&p, x))
        }
        other => Err(Error::Config(format!(
            "{} is a classifier; use train()",
            other.id()
        ))),
    }
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}
