//! k-nearest-neighbor voting. Neighbor order is total: distance first, then
//! training row index, so equal distances never make results run-dependent.

use crate::error::{Error, Result};
use crate::matrix::Matrix;

use super::{squared_distance, FittedModel};

pub fn train(k: usize, x: &Matrix, y: &[usize], n_classes: usize) -> Result<FittedModel> {
    if k > x.n_rows() {
        return Err(Error::Degenerate(format!(
            "knn k={} exceeds {} training rows",
            k,
            x.n_rows()
        )));
    }
    Ok(FittedModel::Knn {
        k,
        train_x: x.clone(),
        train_y: y.to_vec(),
        n_classes,
    })
}

/// The k nearest training rows to `query` as (distance, train index) pairs.
fn neighbors(k: usize, train_x: &Matrix, query: &[f64]) -> Vec<(f64, usize)> {
    let mut all: Vec<(f64, usize)> = (0..train_x.n_rows())
        .map(|i| (squared_distance(train_x.row(i), query).sqrt(), i))
        .collect();
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    all.truncate(k);
    all
}

pub fn scores(
    k: usize,
    train_x: &Matrix,
    train_y: &[usize],
    n_classes: usize,
    x: &Matrix,
) -> Matrix {
    let mut out = Matrix::zeros(x.n_rows(), n_classes);
    for (i, query) in x.rows().enumerate() {
        for (_, idx) in neighbors(k, train_x, query) {
            let c = train_y[idx];
            out.set(i, c, out.get(i, c) + 1.0 / k as f64);
        }
    }
    out
}

pub fn predict(
    k: usize,
    train_x: &Matrix,
    train_y: &[usize],
    n_classes: usize,
    x: &Matrix,
) -> Vec<usize> {
    x.rows()
        .map(|query| {
            let mut votes = vec![0usize; n_classes];
            let mut dist_sum = vec![0.0f64; n_classes];
            for (d, idx) in neighbors(k, train_x, query) {
                votes[train_y[idx]] += 1;
                dist_sum[train_y[idx]] += d;
            }
            let top = *votes.iter().max().expect("at least one class");
            // among classes with the most votes, the one whose voters sit
            // closest wins; exact distance ties fall to the lowest class
            (0..n_classes)
                .filter(|&c| votes[c] == top)
                .min_by(|&a, &b| dist_sum[a].partial_cmp(&dist_sum[b]).unwrap())
                .expect("at least one tied class")
        })
        .collect()
}
