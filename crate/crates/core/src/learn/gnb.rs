//! Gaussian naive Bayes. Per-class feature variances get a smoothing floor
//! proportional to the largest overall feature variance so that a feature
//! constant within one class cannot zero out the density.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

use super::FittedModel;

const SMOOTHING: f64 = 1e-9;

pub fn train(x: &Matrix, y: &[usize], n_classes: usize) -> Result<FittedModel> {
    let n = x.n_rows();
    let d = x.n_cols();

    let max_var = (0..d)
        .map(|j| population_variance(&x.column(j)))
        .fold(0.0f64, f64::max);
    if max_var == 0.0 {
        return Err(Error::Degenerate(
            "gnb requires at least one varying feature".into(),
        ));
    }
    let epsilon = SMOOTHING * max_var;

    let mut counts = vec![0usize; n_classes];
    let mut means = Matrix::zeros(n_classes, d);
    for (i, &c) in y.iter().enumerate() {
        counts[c] += 1;
        for j in 0..d {
            means.set(c, j, means.get(c, j) + x.get(i, j));
        }
    }
    for c in 0..n_classes {
        if counts[c] == 0 {
            return Err(Error::Degenerate(format!(
                "class {} has no training rows",
                c
            )));
        }
        for j in 0..d {
            means.set(c, j, means.get(c, j) / counts[c] as f64);
        }
    }

    let mut variances = Matrix::zeros(n_classes, d);
    for (i, &c) in y.iter().enumerate() {
        for j in 0..d {
            let dev = x.get(i, j) - means.get(c, j);
            variances.set(c, j, variances.get(c, j) + dev * dev);
        }
    }
    for c in 0..n_classes {
        for j in 0..d {
            variances.set(c, j, variances.get(c, j) / counts[c] as f64 + epsilon);
        }
    }

    let priors: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
    Ok(FittedModel::Gnb {
        priors,
        means,
        variances,
        n_classes,
    })
}

fn population_variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n
}

pub fn scores(
    priors: &[f64],
    means: &Matrix,
    variances: &Matrix,
    n_classes: usize,
    x: &Matrix,
) -> Matrix {
    let d = means.n_cols();
    let mut out = Matrix::zeros(x.n_rows(), n_classes);
    for (i, query) in x.rows().enumerate() {
        let mut log_post = vec![0.0f64; n_classes];
        for c in 0..n_classes {
            let mut lp = priors[c].ln();
            for j in 0..d {
                let var = variances.get(c, j);
                let dev = query[j] - means.get(c, j);
                lp += -0.5 * (2.0 * PI * var).ln() - dev * dev / (2.0 * var);
            }
            log_post[c] = lp;
        }
        // normalize in log space to keep tiny densities from underflowing
        let peak = log_post.iter().cloned().fold(f64::MIN, f64::max);
        let weights: Vec<f64> = log_post.iter().map(|&lp| (lp - peak).exp()).collect();
        let total: f64 = weights.iter().sum();
        for c in 0..n_classes {
            out.set(i, c, weights[c] / total);
        }
    }
    out
}
