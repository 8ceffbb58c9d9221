//! Principal component analysis via symmetric Jacobi eigendecomposition of
//! the feature covariance matrix. Feature counts are expected to be small
//! relative to row counts, so the d by d decomposition is cheap.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::transform::{FittedParams, FittedTransform, TransformSpec};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns
/// eigenvalues and matching eigenvectors (as rows), unsorted.
fn jacobi_eigen(sym: &Matrix) -> (Vec<f64>, Matrix) {
    let d = sym.n_rows();
    let mut a: Vec<Vec<f64>> = (0..d).map(|i| sym.row(i).to_vec()).collect();
    // v holds eigenvectors as columns while iterating
    let mut v = vec![vec![0.0; d]; d];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }

    let scale: f64 = (0..d).map(|i| a[i][i].abs()).fold(1e-300, f64::max);
    let tol = 1e-14 * scale;
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..d {
            for q in p + 1..d {
                off += a[p][q].abs();
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                if a[p][q].abs() <= tol * 1e-2 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..d {
                    let (aip, aiq) = (a[i][p], a[i][q]);
                    a[i][p] = c * aip - s * aiq;
                    a[i][q] = s * aip + c * aiq;
                }
                for j in 0..d {
                    let (apj, aqj) = (a[p][j], a[q][j]);
                    a[p][j] = c * apj - s * aqj;
                    a[q][j] = s * apj + c * aqj;
                }
                for row in v.iter_mut() {
                    let (vip, viq) = (row[p], row[q]);
                    row[p] = c * vip - s * viq;
                    row[q] = s * vip + c * viq;
                }
            }
        }
    }

    let eigenvalues: Vec<f64> = (0..d).map(|i| a[i][i]).collect();
    // transpose: return eigenvectors as rows
    let mut vectors = Matrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            vectors.set(i, j, v[j][i]);
        }
    }
    (eigenvalues, vectors)
}

/// Fit PCA on a training matrix, keeping either a fixed component count or
/// the smallest count whose cumulative explained-variance ratio reaches the
/// requested level.
pub fn fit_pca(
    train: &Matrix,
    components: Option<usize>,
    variance_ratio: Option<f64>,
) -> Result<FittedTransform> {
    TransformSpec::Pca {
        components,
        variance_ratio,
    }
    .validate()?;
    let n = train.n_rows();
    let d = train.n_cols();
    if n < 2 {
        return Err(Error::Degenerate(
            "pca requires at least 2 training rows".into(),
        ));
    }
    if let Some(k) = components {
        if k > d {
            return Err(Error::Config(format!(
                "pca components {} exceed feature count {}",
                k, d
            )));
        }
    }

    let nf = n as f64;
    let mean: Vec<f64> = (0..d)
        .map(|j| train.column(j).iter().sum::<f64>() / nf)
        .collect();
    let mut cov = Matrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let mut sum = 0.0;
            for r in 0..n {
                sum += (train.get(r, i) - mean[i]) * (train.get(r, j) - mean[j]);
            }
            let c = sum / nf;
            cov.set(i, j, c);
            cov.set(j, i, c);
        }
    }

    let (eigenvalues, vectors) = jacobi_eigen(&cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eigenvalues[b].partial_cmp(&eigenvalues[a]).unwrap());
    let sorted_values: Vec<f64> = order.iter().map(|&i| eigenvalues[i].max(0.0)).collect();
    let total: f64 = sorted_values.iter().sum();
    if total <= 0.0 {
        return Err(Error::Degenerate(
            "pca found no variance to explain".into(),
        ));
    }
    let ratios: Vec<f64> = sorted_values.iter().map(|v| v / total).collect();

    let k = match (components, variance_ratio) {
        (Some(k), _) => k,
        (None, Some(r)) => {
            let mut cum = 0.0;
            let mut k = d;
            for (i, ratio) in ratios.iter().enumerate() {
                cum += ratio;
                if cum >= r - 1e-12 {
                    k = i + 1;
                    break;
                }
            }
            k
        }
        (None, None) => unreachable!("validated"),
    };

    let mut comp = Matrix::zeros(k, d);
    for (row, &src) in order[..k].iter().enumerate() {
        let vec = vectors.row(src);
        // sign convention: the largest-magnitude entry (first on ties) is positive
        let mut lead = 0.0;
        let mut lead_abs = -1.0;
        for &val in vec {
            if val.abs() > lead_abs {
                lead_abs = val.abs();
                lead = val;
            }
        }
        let flip = if lead < 0.0 { -1.0 } else { 1.0 };
        for j in 0..d {
            comp.set(row, j, flip * vec[j]);
        }
    }

    Ok(FittedTransform {
        params: FittedParams::Pca {
            mean,
            components: comp,
            explained: ratios[..k].to_vec(),
            input_dim: d,
        },
        fitted_on: crate::transform::FitStamp {
            rows: n,
            digest: train.digest(),
        },
    })
}
