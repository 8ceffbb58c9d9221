//! Descriptive analysis of datasets: per-feature summaries, correlation
//! matrices, class balance, and exportable plot artifacts.

mod plot;

pub use plot::{export_plot, PlotArtifacts, PlotKind};

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::stats::average_ranks;

/// Five-number summary plus moments for one feature.
///
/// The standard deviation is the population one (ddof 0); quartiles use
/// linear interpolation between closest ranks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureStats {
    pub name: String,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub distinct_count: usize,
}

/// Quantile by linear interpolation at position p(n-1) of the sorted sample.
pub(crate) fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = p * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let frac = pos - lo as f64;
    if frac == 0.0 || lo + 1 == n {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

pub(crate) fn sorted_column(dataset: &Dataset, j: usize) -> Vec<f64> {
    let mut col = dataset.features.column(j);
    col.sort_by(|a, b| a.partial_cmp(b).unwrap());
    col
}

/// Summarize every feature of the dataset.
pub fn describe(dataset: &Dataset) -> Vec<FeatureStats> {
    let n = dataset.n_rows();
    assert!(n >= 1, "describe requires at least one row");
    let nf = n as f64;
    dataset
        .feature_meta
        .iter()
        .enumerate()
        .map(|(j, spec)| {
            let sorted = sorted_column(dataset, j);
            let mean = sorted.iter().sum::<f64>() / nf;
            let var = sorted.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / nf;
            let distinct_count = 1 + sorted.windows(2).filter(|w| w[0] != w[1]).count();
            FeatureStats {
                name: spec.name.clone(),
                mean,
                std: var.sqrt(),
                min: sorted[0],
                q1: quantile(&sorted, 0.25),
                median: quantile(&sorted, 0.5),
                q3: quantile(&sorted, 0.75),
                max: sorted[n - 1],
                distinct_count,
            }
        })
        .collect()
}

/// Which correlation coefficient to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationMethod {
    Pearson,
    Spearman,
}

impl std::str::FromStr for CorrelationMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pearson" => Ok(CorrelationMethod::Pearson),
            "spearman" => Ok(CorrelationMethod::Spearman),
            other => Err(Error::Config(format!(
                "unknown correlation method '{}', expected pearson or spearman",
                other
            ))),
        }
    }
}

/// Pearson correlation of two equal-length columns; zero variance on either
/// side yields 0 by convention.
pub(crate) fn pearson_pair(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in x.iter().zip(y) {
        cov += (a - mx) * (b - my);
        vx += (a - mx) * (a - mx);
        vy += (b - my) * (b - my);
    }
    if vx == 0.0 || vy == 0.0 {
        0.0
    } else {
        (cov / (vx * vy).sqrt()).clamp(-1.0, 1.0)
    }
}

/// d by d feature correlation matrix. Symmetric with unit diagonal; a
/// zero-variance feature correlates 0 with everything else.
pub fn correlation_matrix(dataset: &Dataset, method: CorrelationMethod) -> Matrix {
    let d = dataset.n_features();
    let columns: Vec<Vec<f64>> = (0..d)
        .map(|j| {
            let col = dataset.features.column(j);
            match method {
                CorrelationMethod::Pearson => col,
                CorrelationMethod::Spearman => average_ranks(&col),
            }
        })
        .collect();
    let mut m = Matrix::zeros(d, d);
    for i in 0..d {
        m.set(i, i, 1.0);
        for j in i + 1..d {
            let r = pearson_pair(&columns[i], &columns[j]);
            m.set(i, j, r);
            m.set(j, i, r);
        }
    }
    m
}

/// One class's share of the dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassShare {
    pub name: String,
    pub count: usize,
    pub fraction: f64,
}

/// Per-class counts and fractions, in class-index order.
pub fn class_distribution(dataset: &Dataset) -> Result<Vec<ClassShare>> {
    if dataset.labels.is_none() {
        return Err(Error::Dataset(
            "class distribution requires a dataset with labels".into(),
        ));
    }
    let n = dataset.n_rows() as f64;
    Ok(dataset
        .class_counts()
        .into_iter()
        .enumerate()
        .map(|(i, count)| ClassShare {
            name: dataset.class_names[i].clone(),
            count,
            fraction: count as f64 / n,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{FeatureKind, FeatureSpec};

    pub(super) fn dataset_from(rows: &[Vec<f64>], labels: Option<Vec<usize>>) -> Dataset {
        let d = rows[0].len();
        let class_names = labels
            .as_ref()
            .map(|ls| {
                let c = ls.iter().max().map(|m| m + 1).unwrap_or(0);
                (0..c).map(|i| format!("c{}", i)).collect()
            })
            .unwrap_or_default();
        Dataset {
            features: Matrix::from_rows(rows).unwrap(),
            labels,
            class_names,
            feature_meta: (0..d)
                .map(|j| FeatureSpec {
                    name: format!("f{}", j),
                    kind: FeatureKind::Numeric,
                })
                .collect(),
            group_ids: None,
            origin: "test".into(),
        }
    }

    #[test]
    fn describe_uses_population_std() {
        let ds = dataset_from(&[vec![1.0], vec![2.0], vec![3.0]], None);
        let stats = &describe(&ds)[0];
        assert_eq!(stats.mean, 2.0);
        assert!((stats.std - (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!((stats.std - 0.816497).abs() < 1e-6);
    }

    #[test]
    fn describe_constant_feature() {
        let ds = dataset_from(&[vec![5.0], vec![5.0], vec![5.0]], None);
        let stats = &describe(&ds)[0];
        assert_eq!(stats.std, 0.0);
        assert_eq!(stats.distinct_count, 1);
        assert_eq!(stats.min, 5.0);
        assert_eq!(stats.max, 5.0);
    }

    #[test]
    fn describe_interpolates_quartiles() {
        let ds = dataset_from(&[vec![1.0], vec![2.0], vec![3.0], vec![4.0]], None);
        let stats = &describe(&ds)[0];
        assert_eq!(stats.q1, 1.75);
        assert_eq!(stats.median, 2.5);
        assert_eq!(stats.q3, 3.25);
    }

    #[test]
    fn describe_orders_summary_numbers() {
        let mut rng = crate::rng::Rng::new(3);
        let rows: Vec<Vec<f64>> = (0..40).map(|_| vec![rng.next_f64() * 10.0]).collect();
        let stats = &describe(&dataset_from(&rows, None))[0];
        assert!(stats.min <= stats.q1);
        assert!(stats.q1 <= stats.median);
        assert!(stats.median <= stats.q3);
        assert!(stats.q3 <= stats.max);
    }

    #[test]
    fn describe_is_row_order_invariant() {
        let rows: Vec<Vec<f64>> = vec![
            vec![3.0, 1.0],
            vec![1.0, 9.0],
            vec![4.0, 2.0],
            vec![1.5, 8.0],
            vec![9.0, 0.5],
        ];
        let mut shuffled = rows.clone();
        shuffled.swap(0, 4);
        shuffled.swap(1, 3);
        assert_eq!(
            describe(&dataset_from(&rows, None)),
            describe(&dataset_from(&shuffled, None))
        );
    }

    #[test]
    fn pearson_perfect_linear() {
        let ds = dataset_from(&[vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]], None);
        let m = correlation_matrix(&ds, CorrelationMethod::Pearson);
        assert!((m.get(0, 1) - 1.0).abs() < 1e-12);
        assert_eq!(m.get(0, 0), 1.0);
    }

    #[test]
    fn pearson_hand_value() {
        let ds = dataset_from(
            &[vec![1.0, 1.0], vec![2.0, 3.0], vec![3.0, 2.0], vec![4.0, 4.0]],
            None,
        );
        let m = correlation_matrix(&ds, CorrelationMethod::Pearson);
        assert!((m.get(0, 1) - 0.8).abs() < 1e-12, "r={}", m.get(0, 1));
    }

    #[test]
    fn spearman_monotone_and_tied() {
        let ds = dataset_from(&[vec![1.0, 1.0], vec![2.0, 8.0], vec![3.0, 27.0]], None);
        let m = correlation_matrix(&ds, CorrelationMethod::Spearman);
        assert!((m.get(0, 1) - 1.0).abs() < 1e-12);

        let ds2 = dataset_from(
            &[vec![1.0, 1.0], vec![2.0, 3.0], vec![3.0, 2.0], vec![4.0, 4.0]],
            None,
        );
        let m2 = correlation_matrix(&ds2, CorrelationMethod::Spearman);
        assert!((m2.get(0, 1) - 0.8).abs() < 1e-12, "r={}", m2.get(0, 1));
    }

    #[test]
    fn zero_variance_feature_correlates_zero() {
        let ds = dataset_from(&[vec![1.0, 7.0], vec![2.0, 7.0], vec![3.0, 7.0]], None);
        let m = correlation_matrix(&ds, CorrelationMethod::Pearson);
        assert_eq!(m.get(0, 1), 0.0);
        assert_eq!(m.get(1, 0), 0.0);
        assert_eq!(m.get(1, 1), 1.0);
    }

    #[test]
    fn pearson_matches_brute_force_on_random_data() {
        let mut rng = crate::rng::Rng::new(17);
        let rows: Vec<Vec<f64>> = (0..50)
            .map(|_| (0..4).map(|_| rng.next_f64() * 3.0 - 1.5).collect())
            .collect();
        let ds = dataset_from(&rows, None);
        let m = correlation_matrix(&ds, CorrelationMethod::Pearson);
        let n = rows.len() as f64;
        for a in 0..4 {
            for b in 0..4 {
                let ma = rows.iter().map(|r| r[a]).sum::<f64>() / n;
                let mb = rows.iter().map(|r| r[b]).sum::<f64>() / n;
                let mut cov = 0.0;
                let mut va = 0.0;
                let mut vb = 0.0;
                for r in &rows {
                    cov += (r[a] - ma) * (r[b] - mb);
                    va += (r[a] - ma) * (r[a] - ma);
                    vb += (r[b] - mb) * (r[b] - mb);
                }
                let expect = cov / (va * vb).sqrt();
                assert!(
                    (m.get(a, b) - expect).abs() < 1e-9,
                    "({},{}): {} vs {}",
                    a,
                    b,
                    m.get(a, b),
                    expect
                );
            }
        }
    }

    #[test]
    fn correlation_matrix_is_symmetric_in_unit_range() {
        let mut rng = crate::rng::Rng::new(23);
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|_| (0..3).map(|_| rng.next_f64()).collect())
            .collect();
        let ds = dataset_from(&rows, None);
        for method in [CorrelationMethod::Pearson, CorrelationMethod::Spearman] {
            let m = correlation_matrix(&ds, method);
            for i in 0..3 {
                assert_eq!(m.get(i, i), 1.0);
                for j in 0..3 {
                    assert_eq!(m.get(i, j), m.get(j, i));
                    assert!(m.get(i, j).abs() <= 1.0);
                }
            }
        }
    }

    #[test]
    fn class_distribution_counts_and_fractions() {
        let ds = dataset_from(
            &[vec![1.0], vec![2.0], vec![3.0]],
            Some(vec![0, 0, 1]),
        );
        let dist = class_distribution(&ds).unwrap();
        assert_eq!(dist[0].count, 2);
        assert_eq!(dist[1].count, 1);
        assert!((dist[0].fraction - 2.0 / 3.0).abs() < 1e-12);
        let total: f64 = dist.iter().map(|c| c.fraction).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn class_distribution_multiclass_hand_count() {
        let rows = vec![vec![0.0]; 6];
        let ds = dataset_from(&rows, Some(vec![0, 1, 1, 2, 2, 2]));
        let dist = class_distribution(&ds).unwrap();
        let counts: Vec<usize> = dist.iter().map(|c| c.count).collect();
        assert_eq!(counts, vec![1, 2, 3]);
    }

    #[test]
    fn class_distribution_requires_labels() {
        let ds = dataset_from(&[vec![1.0]], None);
        assert!(class_distribution(&ds).is_err());
    }
}
