//! Preprocessing transforms with a strict fit/apply split. Fitting learns
//! parameters from a training matrix only; applying is a pure function that
//! never re-estimates anything, which is what makes fold-safe evaluation
//! possible.

mod pca;
mod resample;

pub use pca::fit_pca;
pub use resample::{resample, ResampleMethod};

use serde::{Deserialize, Serialize};

use crate::canon::sha256_hex;
use crate::data::{Dataset, FeatureSpec};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Declarative description of one preprocessing step, as it appears in
/// experiment configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TransformSpec {
    Zscore,
    Minmax,
    VarianceFilter {
        threshold: f64,
    },
    CorrelationFilter {
        threshold: f64,
    },
    Pca {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        components: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        variance_ratio: Option<f64>,
    },
    Window {
        width: usize,
        stride: usize,
    },
    Resample {
        method: ResampleMethod,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
}

impl TransformSpec {
    /// Check parameter ranges before any fitting happens.
    pub fn validate(&self) -> Result<()> {
        match self {
            TransformSpec::Zscore | TransformSpec::Minmax => Ok(()),
            TransformSpec::VarianceFilter { threshold } => {
                if threshold.is_finite() && *threshold >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::Config(format!(
                        "variance_filter threshold must be >= 0, got {}",
                        threshold
                    )))
                }
            }
            TransformSpec::CorrelationFilter { threshold } => {
                if threshold.is_finite() && *threshold > 0.0 && *threshold <= 1.0 {
                    Ok(())
                } else {
                    Err(Error::Config(format!(
                        "correlation_filter threshold must be in (0, 1], got {}",
                        threshold
                    )))
                }
            }
            TransformSpec::Pca {
                components,
                variance_ratio,
            } => match (components, variance_ratio) {
                (Some(k), None) if *k >= 1 => Ok(()),
                (Some(k), None) => Err(Error::Config(format!(
                    "pca components must be >= 1, got {}",
                    k
                ))),
                (None, Some(r)) if *r > 0.0 && *r <= 1.0 => Ok(()),
                (None, Some(r)) => Err(Error::Config(format!(
                    "pca variance_ratio must be in (0, 1], got {}",
                    r
                ))),
                _ => Err(Error::Config(
                    "pca requires exactly one of components or variance_ratio".into(),
                )),
            },
            TransformSpec::Window { width, stride } => {
                if *width >= 1 && *stride >= 1 {
                    Ok(())
                } else {
                    Err(Error::Config(format!(
                        "window width and stride must be >= 1, got width {} stride {}",
                        width, stride
                    )))
                }
            }
            TransformSpec::Resample { .. } => Ok(()),
        }
    }

    /// Whether this step changes row count and therefore may only touch
    /// training rows.
    pub fn is_resample(&self) -> bool {
        matches!(self, TransformSpec::Resample { .. })
    }

    /// Whether this step restructures the dataset before cross-validation.
    pub fn is_window(&self) -> bool {
        matches!(self, TransformSpec::Window { .. })
    }

    /// The config-file identifier for this step's kind.
    pub fn kind_name(&self) -> &'static str {
        match self {
            TransformSpec::Zscore => "zscore",
            TransformSpec::Minmax => "minmax",
            TransformSpec::VarianceFilter { .. } => "variance_filter",
            TransformSpec::CorrelationFilter { .. } => "correlation_filter",
            TransformSpec::Pca { .. } => "pca",
            TransformSpec::Window { .. } => "window",
            TransformSpec::Resample { .. } => "resample",
        }
    }
}

/// Which statistic pair a standardizer learns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StandardizeMode {
    Zscore,
    Minmax,
}

/// Learned, immutable parameters of a fitted transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FittedParams {
    /// per feature: (mean, std) for zscore, (min, max) for minmax
    Standardize {
        mode: StandardizeMode,
        stats: Vec<(f64, f64)>,
    },
    /// kept input column indices, ascending
    Selection {
        kept: Vec<usize>,
        input_dim: usize,
    },
    /// rows of `components` are principal directions
    Pca {
        mean: Vec<f64>,
        components: Matrix,
        explained: Vec<f64>,
        input_dim: usize,
    },
}

/// Fingerprint of the training view a transform was fitted on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitStamp {
    pub rows: usize,
    pub digest: String,
}

/// A transform after fitting: learned parameters plus provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedTransform {
    pub params: FittedParams,
    pub fitted_on: FitStamp,
}

impl FittedTransform {
    fn new(params: FittedParams, train: &Matrix) -> FittedTransform {
        FittedTransform {
            params,
            fitted_on: FitStamp {
                rows: train.n_rows(),
                digest: train.digest(),
            },
        }
    }

    pub fn input_dim(&self) -> usize {
        match &self.params {
            FittedParams::Standardize { stats, .. } => stats.len(),
            FittedParams::Selection { input_dim, .. } => *input_dim,
            FittedParams::Pca { input_dim, .. } => *input_dim,
        }
    }

    pub fn output_dim(&self) -> usize {
        match &self.params {
            FittedParams::Standardize { stats, .. } => stats.len(),
            FittedParams::Selection { kept, .. } => kept.len(),
            FittedParams::Pca { components, .. } => components.n_rows(),
        }
    }

    /// Digest of the learned state, for asserting that apply mutates nothing.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("fitted transform serializes");
        sha256_hex(&[json.as_bytes()])
    }
}

/// Fit a standardizer on a training matrix.
pub fn fit_standardize(train: &Matrix, mode: StandardizeMode) -> Result<FittedTransform> {
    if train.n_rows() == 0 {
        return Err(Error::Degenerate(
            "standardize requires at least 1 training row".into(),
        ));
    }
    let n = train.n_rows() as f64;
    let stats = (0..train.n_cols())
        .map(|j| {
            let col = train.column(j);
            match mode {
                StandardizeMode::Zscore => {
                    let mean = col.iter().sum::<f64>() / n;
                    let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
                    (mean, var.sqrt())
                }
                StandardizeMode::Minmax => {
                    let lo = col.iter().cloned().fold(f64::INFINITY, f64::min);
                    let hi = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    (lo, hi)
                }
            }
        })
        .collect();
    Ok(FittedTransform::new(
        FittedParams::Standardize { mode, stats },
        train,
    ))
}

pub(crate) fn column_variances(train: &Matrix) -> Vec<f64> {
    let n = train.n_rows() as f64;
    (0..train.n_cols())
        .map(|j| {
            let col = train.column(j);
            let mean = col.iter().sum::<f64>() / n;
            col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n
        })
        .collect()
}

/// Fit a variance filter: keep features whose population variance exceeds
/// `threshold`.
pub fn fit_variance_filter(train: &Matrix, threshold: f64) -> Result<FittedTransform> {
    TransformSpec::VarianceFilter { threshold }.validate()?;
    if train.n_rows() < 2 {
        return Err(Error::Degenerate(
            "variance_filter requires at least 2 training rows".into(),
        ));
    }
    let kept: Vec<usize> = column_variances(train)
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > threshold)
        .map(|(j, _)| j)
        .collect();
    if kept.is_empty() {
        return Err(Error::Degenerate(
            "variance_filter left an empty feature set".into(),
        ));
    }
    Ok(FittedTransform::new(
        FittedParams::Selection {
            kept,
            input_dim: train.n_cols(),
        },
        train,
    ))
}

/// Fit a correlation filter. While any surviving pair's absolute Pearson
/// correlation exceeds `threshold`, the member of the strongest such pair
/// with the larger mean absolute correlation to the other survivors is
/// dropped; ties drop the higher index.
pub fn fit_correlation_filter(train: &Matrix, threshold: f64) -> Result<FittedTransform> {
    TransformSpec::CorrelationFilter { threshold }.validate()?;
    if train.n_rows() < 2 {
        return Err(Error::Degenerate(
            "correlation_filter requires at least 2 training rows".into(),
        ));
    }
    let d = train.n_cols();
    if d == 0 {
        return Err(Error::Degenerate(
            "correlation_filter left an empty feature set".into(),
        ));
    }
    let columns: Vec<Vec<f64>> = (0..d).map(|j| train.column(j)).collect();
    let mut corr = vec![vec![0.0; d]; d];
    for i in 0..d {
        corr[i][i] = 1.0;
        for j in i + 1..d {
            let r = crate::analysis::pearson_pair(&columns[i], &columns[j]).abs();
            corr[i][j] = r;
            corr[j][i] = r;
        }
    }

    let mut alive: Vec<usize> = (0..d).collect();
    loop {
        let mut worst: Option<(f64, usize, usize)> = None;
        for (a, &i) in alive.iter().enumerate() {
            for &j in &alive[a + 1..] {
                let r = corr[i][j];
                if r > threshold && worst.map_or(true, |(best, _, _)| r > best) {
                    worst = Some((r, i, j));
                }
            }
        }
        let Some((_, i, j)) = worst else { break };
        let mean_to_rest = |f: usize| {
            let others: Vec<f64> = alive
                .iter()
                .filter(|&&o| o != f)
                .map(|&o| corr[f][o])
                .collect();
            others.iter().sum::<f64>() / others.len() as f64
        };
        let (mi, mj) = (mean_to_rest(i), mean_to_rest(j));
        let drop = if mi > mj {
            i
        } else if mj > mi {
            j
        } else {
            i.max(j)
        };
        alive.retain(|&f| f != drop);
    }

    Ok(FittedTransform::new(
        FittedParams::Selection {
            kept: alive,
            input_dim: d,
        },
        train,
    ))
}

/// Apply a fitted transform to any matrix with the matching feature count.
pub fn apply_transform(fitted: &FittedTransform, x: &Matrix) -> Result<Matrix> {
    if x.n_cols() != fitted.input_dim() {
        return Err(Error::Dimension(format!(
            "transform fitted on {} features, input has {}",
            fitted.input_dim(),
            x.n_cols()
        )));
    }
    match &fitted.params {
        FittedParams::Standardize { mode, stats } => {
            let mut out = Matrix::zeros(x.n_rows(), x.n_cols());
            for i in 0..x.n_rows() {
                for (j, (a, b)) in stats.iter().enumerate() {
                    let v = x.get(i, j);
                    let scaled = match mode {
                        StandardizeMode::Zscore => {
                            if *b == 0.0 {
                                0.0
                            } else {
                                (v - a) / b
                            }
                        }
                        StandardizeMode::Minmax => {
                            let range = b - a;
                            if range == 0.0 {
                                0.0
                            } else {
                                (v - a) / range
                            }
                        }
                    };
                    out.set(i, j, scaled);
                }
            }
            Ok(out)
        }
        FittedParams::Selection { kept, .. } => Ok(x.select_cols(kept)),
        FittedParams::Pca {
            mean, components, ..
        } => {
            let k = components.n_rows();
            let mut out = Matrix::zeros(x.n_rows(), k);
            for i in 0..x.n_rows() {
                for c in 0..k {
                    let mut dot = 0.0;
                    for (j, m) in mean.iter().enumerate() {
                        dot += (x.get(i, j) - m) * components.get(c, j);
                    }
                    out.set(i, c, dot);
                }
            }
            Ok(out)
        }
    }
}

/// Reconstruct inputs from PCA scores (the inverse projection).
pub fn pca_reconstruct(fitted: &FittedTransform, scores: &Matrix) -> Result<Matrix> {
    let FittedParams::Pca {
        mean, components, ..
    } = &fitted.params
    else {
        return Err(Error::Config("reconstruction requires a pca transform".into()));
    };
    if scores.n_cols() != components.n_rows() {
        return Err(Error::Dimension(format!(
            "pca has {} components, scores have {}",
            components.n_rows(),
            scores.n_cols()
        )));
    }
    let d = mean.len();
    let mut out = Matrix::zeros(scores.n_rows(), d);
    for i in 0..scores.n_rows() {
        for (j, m) in mean.iter().enumerate() {
            let mut v = *m;
            for c in 0..components.n_rows() {
                v += scores.get(i, c) * components.get(c, j);
            }
            out.set(i, j, v);
        }
    }
    Ok(out)
}

/// Dispatch fitting for the fit/apply transform kinds. Window and resample
/// steps restructure rows and are orchestrated by the evaluation engine, not
/// fitted here.
pub fn fit_transform(spec: &TransformSpec, train: &Matrix) -> Result<FittedTransform> {
    spec.validate()?;
    match spec {
        TransformSpec::Zscore => fit_standardize(train, StandardizeMode::Zscore),
        TransformSpec::Minmax => fit_standardize(train, StandardizeMode::Minmax),
        TransformSpec::VarianceFilter { threshold } => fit_variance_filter(train, *threshold),
        TransformSpec::CorrelationFilter { threshold } => {
            fit_correlation_filter(train, *threshold)
        }
        TransformSpec::Pca {
            components,
            variance_ratio,
        } => fit_pca(train, *components, *variance_ratio),
        TransformSpec::Window { .. } => Err(Error::Config(
            "window restructures the dataset before cross-validation and cannot be fitted on a matrix".into(),
        )),
        TransformSpec::Resample { .. } => Err(Error::Config(
            "resample changes row counts and is applied to training folds by the evaluation engine".into(),
        )),
    }
}

/// Slide fixed-width windows over every source sequence of a grouped
/// dataset, flattening each window into one row.
///
/// Window labels come from the window's last row; the group id is carried
/// over so cross-validation can keep a sequence's windows together.
pub fn make_windows(dataset: &Dataset, width: usize, stride: usize) -> Result<Dataset> {
    TransformSpec::Window { width, stride }.validate()?;
    let Some(group_ids) = &dataset.group_ids else {
        return Err(Error::Dataset(
            "windowing requires a dataset with a group column".into(),
        ));
    };

    // bucket row indices per group, preserving file order within and across
    let mut order: Vec<usize> = Vec::new();
    let mut rows_by_group: std::collections::HashMap<usize, Vec<usize>> =
        std::collections::HashMap::new();
    for (i, &g) in group_ids.iter().enumerate() {
        let bucket = rows_by_group.entry(g).or_default();
        if bucket.is_empty() {
            order.push(g);
        }
        bucket.push(i);
    }

    let d = dataset.n_features();
    let mut features = Matrix::zeros(0, width * d);
    let mut labels: Vec<usize> = Vec::new();
    let mut groups: Vec<usize> = Vec::new();
    let mut buf = vec![0.0; width * d];
    for &g in &order {
        let rows = &rows_by_group[&g];
        if rows.len() < width {
            return Err(Error::Dataset(format!(
                "group {} has {} rows, shorter than window width {}",
                g,
                rows.len(),
                width
            )));
        }
        let mut start = 0;
        while start + width <= rows.len() {
            for (p, &row) in rows[start..start + width].iter().enumerate() {
                buf[p * d..(p + 1) * d].copy_from_slice(dataset.features.row(row));
            }
            features.push_row(&buf);
            if let Some(ls) = &dataset.labels {
                labels.push(ls[rows[start + width - 1]]);
            }
            groups.push(g);
            start += stride;
        }
    }

    let feature_meta: Vec<FeatureSpec> = (0..width)
        .flat_map(|p| {
            dataset.feature_meta.iter().map(move |spec| FeatureSpec {
                name: format!("{}_w{}", spec.name, p),
                kind: spec.kind,
            })
        })
        .collect();

    // drop classes that lost every row, remapping indices monotonically
    let (labels, class_names) = if dataset.labels.is_some() {
        let c = dataset.class_names.len();
        let mut used = vec![false; c];
        for &l in &labels {
            used[l] = true;
        }
        let mut remap = vec![usize::MAX; c];
        let mut names = Vec::new();
        for (old, name) in dataset.class_names.iter().enumerate() {
            if used[old] {
                remap[old] = names.len();
                names.push(name.clone());
            }
        }
        (
            Some(labels.iter().map(|&l| remap[l]).collect::<Vec<_>>()),
            names,
        )
    } else {
        (None, Vec::new())
    };

    Ok(Dataset {
        features,
        labels,
        class_names,
        feature_meta,
        group_ids: Some(groups),
        origin: format!("{}#window(w={},s={})", dataset.origin, width, stride),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::FeatureKind;

    fn matrix(rows: &[Vec<f64>]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    #[test]
    fn zscore_centers_and_scales() {
        let train = matrix(&[vec![1.0], vec![2.0], vec![3.0]]);
        let ft = fit_standardize(&train, StandardizeMode::Zscore).unwrap();
        let out = apply_transform(&ft, &train).unwrap();
        assert!((out.get(0, 0) + 1.224745).abs() < 1e-6);
        assert!(out.get(1, 0).abs() < 1e-12);
        assert!((out.get(2, 0) - 1.224745).abs() < 1e-6);
    }

    #[test]
    fn zscore_constant_feature_maps_to_zero() {
        let train = matrix(&[vec![4.0], vec![4.0]]);
        let ft = fit_standardize(&train, StandardizeMode::Zscore).unwrap();
        let test = matrix(&[vec![9.0]]);
        let out = apply_transform(&ft, &test).unwrap();
        assert_eq!(out.get(0, 0), 0.0);
    }

    #[test]
    fn zscore_maps_train_mean_to_zero() {
        let train = matrix(&[vec![1.0, 10.0], vec![3.0, 20.0]]);
        let ft = fit_standardize(&train, StandardizeMode::Zscore).unwrap();
        let out = apply_transform(&ft, &matrix(&[vec![2.0, 15.0]])).unwrap();
        assert_eq!(out.row(0), &[0.0, 0.0]);
    }

    #[test]
    fn minmax_maps_to_unit_range() {
        let train = matrix(&[vec![2.0], vec![4.0], vec![6.0]]);
        let ft = fit_standardize(&train, StandardizeMode::Minmax).unwrap();
        let out = apply_transform(&ft, &train).unwrap();
        assert_eq!(out.column(0), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn variance_filter_keeps_features_above_threshold() {
        // column variances are exactly {0, 0.5, 2}
        let train = matrix(&[
            vec![7.0, 0.0, 0.0],
            vec![7.0, 1.0, 2.0],
            vec![7.0, 1.0, 2.0],
            vec![7.0, 2.0, 4.0],
        ]);
        let ft = fit_variance_filter(&train, 0.4).unwrap();
        let FittedParams::Selection { kept, .. } = &ft.params else {
            panic!("expected selection");
        };
        assert_eq!(kept, &[1, 2]);
        let out = apply_transform(&ft, &matrix(&[vec![7.0, 5.0, 6.0]])).unwrap();
        assert_eq!(out.row(0), &[5.0, 6.0]);
    }

    #[test]
    fn variance_filter_drops_constant_at_zero_threshold() {
        let train = matrix(&[vec![3.0, 1.0], vec![3.0, 2.0]]);
        let ft = fit_variance_filter(&train, 0.0).unwrap();
        let FittedParams::Selection { kept, .. } = &ft.params else {
            panic!()
        };
        assert_eq!(kept, &[1]);
    }

    #[test]
    fn variance_filter_identity_on_varying_data() {
        let train = matrix(&[vec![1.0, 5.0], vec![2.0, 6.0]]);
        let ft = fit_variance_filter(&train, 0.0).unwrap();
        let FittedParams::Selection { kept, .. } = &ft.params else {
            panic!()
        };
        assert_eq!(kept, &[0, 1]);
    }

    #[test]
    fn variance_filter_rejects_empty_result() {
        let train = matrix(&[vec![3.0], vec![3.0]]);
        let err = fit_variance_filter(&train, 0.0).unwrap_err();
        assert!(err.to_string().contains("empty feature set"), "{}", err);
    }

    #[test]
    fn correlation_filter_drops_higher_index_on_tie() {
        let train = matrix(&[vec![1.0, 1.0], vec![2.0, 2.0], vec![3.0, 3.0]]);
        let ft = fit_correlation_filter(&train, 0.9).unwrap();
        let FittedParams::Selection { kept, .. } = &ft.params else {
            panic!()
        };
        assert_eq!(kept, &[0]);
    }

    #[test]
    fn correlation_filter_drops_the_aggregate_feature_first() {
        // f2 = f0 + f1, so f2 carries the largest mean correlation
        let train = matrix(&[
            vec![1.0, 0.5, 1.5],
            vec![2.0, -0.5, 1.5],
            vec![3.0, 1.5, 4.5],
            vec![4.0, 0.0, 4.0],
            vec![5.0, 2.0, 7.0],
            vec![6.0, 1.0, 7.0],
        ]);
        let ft = fit_correlation_filter(&train, 0.8).unwrap();
        let FittedParams::Selection { kept, .. } = &ft.params else {
            panic!()
        };
        assert!(!kept.contains(&2), "kept={:?}", kept);
        assert!(kept.contains(&0) && kept.contains(&1), "kept={:?}", kept);
    }

    #[test]
    fn correlation_filter_identity_at_threshold_one() {
        let train = matrix(&[vec![1.0, 1.0], vec![2.0, 2.0], vec![3.0, 3.0]]);
        let ft = fit_correlation_filter(&train, 1.0).unwrap();
        let FittedParams::Selection { kept, .. } = &ft.params else {
            panic!()
        };
        assert_eq!(kept, &[0, 1]);
    }

    #[test]
    fn apply_rejects_dimension_mismatch() {
        let train = matrix(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        let ft = fit_standardize(&train, StandardizeMode::Zscore).unwrap();
        assert!(apply_transform(&ft, &matrix(&[vec![1.0]])).is_err());
    }

    #[test]
    fn apply_is_deterministic_and_never_mutates() {
        let train = matrix(&[vec![1.0, 9.0], vec![4.0, 3.0], vec![2.0, 5.0]]);
        for spec in [
            TransformSpec::Zscore,
            TransformSpec::Minmax,
            TransformSpec::VarianceFilter { threshold: 0.0 },
            TransformSpec::CorrelationFilter { threshold: 0.9 },
            TransformSpec::Pca {
                components: Some(2),
                variance_ratio: None,
            },
        ] {
            let ft = fit_transform(&spec, &train).unwrap();
            let before = ft.digest();
            let a = apply_transform(&ft, &train).unwrap();
            let b = apply_transform(&ft, &train).unwrap();
            assert_eq!(a, b, "{:?}", spec);
            assert_eq!(ft.digest(), before, "{:?}", spec);
        }
    }

    #[test]
    fn fit_records_training_fingerprint() {
        let train = matrix(&[vec![1.0], vec![2.0]]);
        let ft = fit_standardize(&train, StandardizeMode::Zscore).unwrap();
        assert_eq!(ft.fitted_on.rows, 2);
        assert_eq!(ft.fitted_on.digest, train.digest());
    }

    #[test]
    fn window_and_resample_specs_are_not_matrix_transforms() {
        let train = matrix(&[vec![1.0], vec![2.0]]);
        assert!(fit_transform(
            &TransformSpec::Window {
                width: 2,
                stride: 1
            },
            &train
        )
        .is_err());
        assert!(fit_transform(
            &TransformSpec::Resample {
                method: ResampleMethod::Undersample,
                seed: None
            },
            &train
        )
        .is_err());
    }

    fn grouped_dataset(
        rows: &[Vec<f64>],
        labels: Vec<usize>,
        groups: Vec<usize>,
        n_classes: usize,
    ) -> Dataset {
        Dataset {
            features: matrix(rows),
            labels: Some(labels),
            class_names: (0..n_classes).map(|i| format!("c{}", i)).collect(),
            feature_meta: (0..rows[0].len())
                .map(|j| FeatureSpec {
                    name: format!("f{}", j),
                    kind: FeatureKind::Numeric,
                })
                .collect(),
            group_ids: Some(groups),
            origin: "test".into(),
        }
    }

    #[test]
    fn windows_slide_within_one_group() {
        let ds = grouped_dataset(
            &[vec![1.0], vec![2.0], vec![3.0], vec![4.0]],
            vec![0, 0, 1, 1],
            vec![0, 0, 0, 0],
            2,
        );
        let windowed = make_windows(&ds, 2, 1).unwrap();
        assert_eq!(windowed.n_rows(), 3);
        assert_eq!(windowed.n_features(), 2);
        assert_eq!(windowed.features.row(0), &[1.0, 2.0]);
        assert_eq!(windowed.features.row(2), &[3.0, 4.0]);
        // label of the last row in each window
        assert_eq!(windowed.labels, Some(vec![0, 1, 1]));
    }

    #[test]
    fn unit_window_is_identity_up_to_metadata() {
        let ds = grouped_dataset(
            &[vec![1.0, 5.0], vec![2.0, 6.0], vec![3.0, 7.0]],
            vec![0, 1, 0],
            vec![0, 0, 1],
            2,
        );
        let windowed = make_windows(&ds, 1, 1).unwrap();
        assert_eq!(windowed.features, ds.features);
        assert_eq!(windowed.labels, ds.labels);
        assert_eq!(windowed.group_ids, ds.group_ids);
    }

    #[test]
    fn window_count_follows_floor_formula() {
        let ds = grouped_dataset(
            &(0..8).map(|i| vec![i as f64]).collect::<Vec<_>>(),
            vec![0; 8],
            vec![0, 0, 0, 1, 1, 1, 1, 1],
            1,
        );
        let windowed = make_windows(&ds, 3, 2).unwrap();
        // groups of lengths 3 and 5: 1 + 2 windows
        assert_eq!(windowed.n_rows(), 3);
        assert_eq!(windowed.group_ids, Some(vec![0, 1, 1]));
        // no window mixes rows from two groups
        assert_eq!(windowed.features.row(0), &[0.0, 1.0, 2.0]);
        assert_eq!(windowed.features.row(1), &[3.0, 4.0, 5.0]);
        assert_eq!(windowed.features.row(2), &[5.0, 6.0, 7.0]);
    }

    #[test]
    fn short_group_error_names_the_group() {
        let ds = grouped_dataset(
            &[vec![1.0], vec![2.0], vec![3.0]],
            vec![0, 0, 0],
            vec![0, 0, 1],
            1,
        );
        let err = make_windows(&ds, 2, 1).unwrap_err();
        assert!(err.to_string().contains("group 1"), "{}", err);
    }

    #[test]
    fn windowing_compacts_vanished_classes() {
        // class 0 appears only as the first row of a 2-row group; with w=2
        // the single window takes its label from the last row (class 1)
        let ds = grouped_dataset(
            &[vec![1.0], vec![2.0]],
            vec![0, 1],
            vec![0, 0],
            2,
        );
        let windowed = make_windows(&ds, 2, 1).unwrap();
        assert_eq!(windowed.labels, Some(vec![0]));
        assert_eq!(windowed.class_names, vec!["c1"]);
    }
}
