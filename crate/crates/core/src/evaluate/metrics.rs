//! Classification and clustering metrics. Undefined ratios (0/0) are
//! defined as 0 throughout so aggregation never meets a NaN.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Everything derivable from a confusion matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationMetrics {
    pub accuracy: f64,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub f1: Vec<f64>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub weighted_precision: f64,
    pub weighted_recall: f64,
    pub weighted_f1: f64,
    /// entry (i, j): rows with true class i predicted as class j
    pub confusion: Vec<Vec<usize>>,
}

/// The full per-fold metric set. Classification fields are absent for
/// clustering records and vice versa; AUC entries are absent for classes
/// the test fold cannot rank (missing or universal).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsBundle {
    pub classification: Option<ClassificationMetrics>,
    pub per_class_auc: Vec<Option<f64>>,
    /// (fpr, tpr) curves parallel to per_class_auc, kept per fold so reports
    /// can average curves across folds.
    #[serde(default)]
    pub per_class_roc: Vec<Option<Vec<(f64, f64)>>>,
    pub macro_auc: Option<f64>,
    pub silhouette: Option<f64>,
    pub adjusted_rand: Option<f64>,
}

pub fn confusion_matrix(
    y_true: &[usize],
    y_pred: &[usize],
    n_classes: usize,
) -> Result<Vec<Vec<usize>>> {
    if y_true.len() != y_pred.len() {
        return Err(Error::Dimension(format!(
            "true labels have {} entries, predictions have {}",
            y_true.len(),
            y_pred.len()
        )));
    }
    let mut cm = vec![vec![0usize; n_classes]; n_classes];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        if t >= n_classes || p >= n_classes {
            return Err(Error::Dimension(format!(
                "class {} out of range for {} classes",
                t.max(p),
                n_classes
            )));
        }
        cm[t][p] += 1;
    }
    Ok(cm)
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

pub fn classification_metrics(cm: &[Vec<usize>]) -> ClassificationMetrics {
    let c = cm.len();
    let row_sums: Vec<usize> = cm.iter().map(|r| r.iter().sum()).collect();
    let col_sums: Vec<usize> = (0..c).map(|j| cm.iter().map(|r| r[j]).sum()).collect();
    let total: usize = row_sums.iter().sum();
    let trace: usize = (0..c).map(|i| cm[i][i]).sum();

    let precision: Vec<f64> = (0..c)
        .map(|i| ratio(cm[i][i] as f64, col_sums[i] as f64))
        .collect();
    let recall: Vec<f64> = (0..c)
        .map(|i| ratio(cm[i][i] as f64, row_sums[i] as f64))
        .collect();
    let f1: Vec<f64> = (0..c)
        .map(|i| ratio(2.0 * precision[i] * recall[i], precision[i] + recall[i]))
        .collect();

    let mean = |v: &[f64]| ratio(v.iter().sum::<f64>(), v.len() as f64);
    let weighted = |v: &[f64]| {
        ratio(
            v.iter()
                .zip(&row_sums)
                .map(|(m, &w)| m * w as f64)
                .sum::<f64>(),
            total as f64,
        )
    };

    ClassificationMetrics {
        accuracy: ratio(trace as f64, total as f64),
        macro_precision: mean(&precision),
        macro_recall: mean(&recall),
        macro_f1: mean(&f1),
        weighted_precision: weighted(&precision),
        weighted_recall: weighted(&recall),
        weighted_f1: weighted(&f1),
        precision,
        recall,
        f1,
        confusion: cm.to_vec(),
    }
}

/// One-vs-rest ROC: points from (0,0) to (1,1) with one point per distinct
/// score, area by the trapezoidal rule.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
}

pub fn roc_curve(y_true: &[usize], scores: &[f64], positive_class: usize) -> Result<RocCurve> {
    if y_true.len() != scores.len() {
        return Err(Error::Dimension(format!(
            "labels have {} entries, scores have {}",
            y_true.len(),
            scores.len()
        )));
    }
    let pos_total = y_true.iter().filter(|&&y| y == positive_class).count();
    let neg_total = y_true.len() - pos_total;
    if pos_total == 0 || neg_total == 0 {
        return Err(Error::Degenerate(format!(
            "roc needs both classes; class {} covers {} of {} rows",
            positive_class,
            pos_total,
            y_true.len()
        )));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap());

    let mut points = vec![(0.0, 0.0)];
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut at = 0usize;
    while at < order.len() {
        let threshold = scores[order[at]];
        // consume the whole tie block so equal scores yield one point
        while at < order.len() && scores[order[at]] == threshold {
            if y_true[order[at]] == positive_class {
                tp += 1;
            } else {
                fp += 1;
            }
            at += 1;
        }
        points.push((fp as f64 / neg_total as f64, tp as f64 / pos_total as f64));
    }

    let auc = points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum();
    Ok(RocCurve { points, auc })
}

/// Mean silhouette over non-noise points. Noise is assignment -1; points in
/// singleton clusters score 0 by convention.
pub fn silhouette(x: &Matrix, assignments: &[i64]) -> Result<f64> {
    if x.n_rows() != assignments.len() {
        return Err(Error::Dimension(format!(
            "features have {} rows, assignments have {}",
            x.n_rows(),
            assignments.len()
        )));
    }
    let mut cluster_ids: Vec<i64> = assignments.iter().cloned().filter(|&a| a >= 0).collect();
    cluster_ids.sort_unstable();
    cluster_ids.dedup();
    if cluster_ids.len() < 2 {
        return Err(Error::Degenerate(format!(
            "silhouette needs at least 2 clusters, found {}",
            cluster_ids.len()
        )));
    }
    let members: Vec<Vec<usize>> = cluster_ids
        .iter()
        .map(|&id| {
            (0..assignments.len())
                .filter(|&i| assignments[i] == id)
                .collect()
        })
        .collect();

    let dist = |a: usize, b: usize| -> f64 {
        x.row(a)
            .iter()
            .zip(x.row(b))
            .map(|(p, q)| (p - q) * (p - q))
            .sum::<f64>()
            .sqrt()
    };

    let mut total = 0.0;
    let mut counted = 0usize;
    for (c, rows) in members.iter().enumerate() {
        for &i in rows {
            if rows.len() == 1 {
                counted += 1;
                continue;
            }
            let a = rows
                .iter()
                .filter(|&&j| j != i)
                .map(|&j| dist(i, j))
                .sum::<f64>()
                / (rows.len() - 1) as f64;
            let b = members
                .iter()
                .enumerate()
                .filter(|(o, _)| *o != c)
                .map(|(_, other)| {
                    other.iter().map(|&j| dist(i, j)).sum::<f64>() / other.len() as f64
                })
                .fold(f64::INFINITY, f64::min);
            let denom = a.max(b);
            total += if denom == 0.0 { 0.0 } else { (b - a) / denom };
            counted += 1;
        }
    }
    Ok(total / counted as f64)
}

fn pairs(n: usize) -> f64 {
    (n * n.saturating_sub(1)) as f64 / 2.0
}

/// Pair-counting adjusted Rand index between two assignments. Chance-level
/// agreement scores near 0; identical partitions score 1.
pub fn adjusted_rand(a: &[i64], b: &[i64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!(
            "assignments have {} and {} entries",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::Degenerate(
            "adjusted rand needs at least 2 points".into(),
        ));
    }
    let mut a_ids: Vec<i64> = a.to_vec();
    a_ids.sort_unstable();
    a_ids.dedup();
    let mut b_ids: Vec<i64> = b.to_vec();
    b_ids.sort_unstable();
    b_ids.dedup();

    let mut table = vec![vec![0usize; b_ids.len()]; a_ids.len()];
    for (&ai, &bi) in a.iter().zip(b) {
        let i = a_ids.binary_search(&ai).expect("id present");
        let j = b_ids.binary_search(&bi).expect("id present");
        table[i][j] += 1;
    }

    let index: f64 = table
        .iter()
        .flat_map(|row| row.iter())
        .map(|&n| pairs(n))
        .sum();
    let a_pairs: f64 = table.iter().map(|row| pairs(row.iter().sum())).sum();
    let b_pairs: f64 = (0..b_ids.len())
        .map(|j| pairs(table.iter().map(|row| row[j]).sum()))
        .sum();
    let expected = a_pairs * b_pairs / pairs(a.len());
    let max_index = (a_pairs + b_pairs) / 2.0;
    if max_index == expected {
        return Ok(1.0);
    }
    Ok((index - expected) / (max_index - expected))
}
