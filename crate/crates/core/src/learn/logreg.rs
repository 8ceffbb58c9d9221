//! Multinomial logistic regression trained by full-batch gradient descent
//! from a zero start. The l2 penalty applies to weights only, never the
//! intercepts.

use crate::error::Result;
use crate::matrix::Matrix;

use super::{FittedModel, LogregParams};

pub fn train(params: &LogregParams, x: &Matrix, y: &[usize], n_classes: usize) -> Result<FittedModel> {
    let n = x.n_rows();
    let d = x.n_cols();
    let mut weights = Matrix::zeros(n_classes, d);
    let mut bias = vec![0.0f64; n_classes];

    for _ in 0..params.max_iters {
        let probs = softmax_rows(&weights, &bias, x);
        let mut grad_w = Matrix::zeros(n_classes, d);
        let mut grad_b = vec![0.0f64; n_classes];
        for i in 0..n {
            let row = x.row(i);
            for c in 0..n_classes {
                let delta = probs.get(i, c) - if y[i] == c { 1.0 } else { 0.0 };
                grad_b[c] += delta;
                for j in 0..d {
                    grad_w.set(c, j, grad_w.get(c, j) + delta * row[j]);
                }
            }
        }
        let scale = 1.0 / n as f64;
        let mut grad_norm = 0.0f64;
        for c in 0..n_classes {
            grad_b[c] *= scale;
            grad_norm = grad_norm.max(grad_b[c].abs());
            for j in 0..d {
                let g = grad_w.get(c, j) * scale + params.l2 * weights.get(c, j);
                grad_w.set(c, j, g);
                grad_norm = grad_norm.max(g.abs());
            }
        }
        if grad_norm < params.tol {
            break;
        }
        for c in 0..n_classes {
            bias[c] -= params.learning_rate * grad_b[c];
            for j in 0..d {
                weights.set(c, j, weights.get(c, j) - params.learning_rate * grad_w.get(c, j));
            }
        }
    }

    Ok(FittedModel::Logreg {
        weights,
        bias,
        n_classes,
    })
}

fn softmax_rows(weights: &Matrix, bias: &[f64], x: &Matrix) -> Matrix {
    let n_classes = bias.len();
    let mut out = Matrix::zeros(x.n_rows(), n_classes);
    for (i, row) in x.rows().enumerate() {
        let logits: Vec<f64> = (0..n_classes)
            .map(|c| {
                bias[c]
                    + weights
                        .row(c)
                        .iter()
                        .zip(row)
                        .map(|(w, v)| w * v)
                        .sum::<f64>()
            })
            .collect();
        let peak = logits.iter().cloned().fold(f64::MIN, f64::max);
        let exps: Vec<f64> = logits.iter().map(|&z| (z - peak).exp()).collect();
        let total: f64 = exps.iter().sum();
        for c in 0..n_classes {
            out.set(i, c, exps[c] / total);
        }
    }
    out
}

pub fn scores(weights: &Matrix, bias: &[f64], _n_classes: usize, x: &Matrix) -> Matrix {
    softmax_rows(weights, bias, x)
}
