//! Class-balance resampling. These are the only transforms that change row
//! counts, and the evaluation engine applies them to training folds only.
//! Output order is fixed (originals first, synthetics appended) so that a
//! seed fully determines the result.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::Rng;

/// How to balance class counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResampleMethod {
    Undersample,
    Oversample,
    Smote,
}

const SMOTE_NEIGHBORS: usize = 5;

fn class_rows(labels: &[usize]) -> Result<Vec<Vec<usize>>> {
    let n_classes = labels.iter().max().map(|m| m + 1).unwrap_or(0);
    if n_classes < 2 {
        return Err(Error::Degenerate(
            "resampling requires at least 2 classes".into(),
        ));
    }
    let mut by_class = vec![Vec::new(); n_classes];
    for (i, &l) in labels.iter().enumerate() {
        by_class[l].push(i);
    }
    if let Some(empty) = by_class.iter().position(|rows| rows.is_empty()) {
        return Err(Error::Degenerate(format!(
            "class {} has no rows to resample",
            empty
        )));
    }
    Ok(by_class)
}

/// Balance `(x, y)` with the given method. Sampling decisions are driven
/// entirely by `seed`.
pub fn resample(
    x: &Matrix,
    y: &[usize],
    method: ResampleMethod,
    seed: u64,
) -> Result<(Matrix, Vec<usize>)> {
    if x.n_rows() != y.len() {
        return Err(Error::Dimension(format!(
            "resample features have {} rows, labels have {}",
            x.n_rows(),
            y.len()
        )));
    }
    let by_class = class_rows(y)?;
    let counts: Vec<usize> = by_class.iter().map(|rows| rows.len()).collect();
    let mut rng = Rng::new(seed);

    match method {
        ResampleMethod::Undersample => {
            let target = *counts.iter().min().expect("at least one class");
            let mut keep: Vec<usize> = Vec::new();
            for rows in &by_class {
                if rows.len() == target {
                    keep.extend_from_slice(rows);
                } else {
                    let mut pool = rows.clone();
                    rng.shuffle(&mut pool);
                    let mut chosen: Vec<usize> = pool[..target].to_vec();
                    chosen.sort_unstable();
                    keep.extend(chosen);
                }
            }
            // kept originals come out in their original relative order
            keep.sort_unstable();
            Ok((x.select_rows(&keep), keep.iter().map(|&i| y[i]).collect()))
        }
        ResampleMethod::Oversample => {
            let target = *counts.iter().max().expect("at least one class");
            let mut out = x.clone();
            let mut labels = y.to_vec();
            for (class, rows) in by_class.iter().enumerate() {
                for _ in rows.len()..target {
                    let pick = rows[rng.gen_range(rows.len())];
                    out.push_row(x.row(pick));
                    labels.push(class);
                }
            }
            Ok((out, labels))
        }
        ResampleMethod::Smote => {
            let target = *counts.iter().max().expect("at least one class");
            for (class, rows) in by_class.iter().enumerate() {
                if rows.len() < target && rows.len() < 2 {
                    return Err(Error::Degenerate(format!(
                        "smote cannot synthesize from singleton class {}",
                        class
                    )));
                }
            }
            let mut out = x.clone();
            let mut labels = y.to_vec();
            for (class, rows) in by_class.iter().enumerate() {
                if rows.len() >= target {
                    continue;
                }
                let k = SMOTE_NEIGHBORS.min(rows.len() - 1);
                let neighbors = nearest_neighbors(x, rows, k);
                for _ in rows.len()..target {
                    let base_idx = rng.gen_range(rows.len());
                    let neighbor_idx = neighbors[base_idx][rng.gen_range(k)];
                    let u = rng.next_f64();
                    let base = x.row(rows[base_idx]);
                    let nn = x.row(neighbor_idx);
                    let synthetic: Vec<f64> = base
                        .iter()
                        .zip(nn)
                        .map(|(b, n)| b + u * (n - b))
                        .collect();
                    out.push_row(&synthetic);
                    labels.push(class);
                }
            }
            Ok((out, labels))
        }
    }
}

/// For each listed row, its k nearest same-class neighbors by Euclidean
/// distance (ties broken toward the lower row index).
fn nearest_neighbors(x: &Matrix, rows: &[usize], k: usize) -> Vec<Vec<usize>> {
    rows.iter()
        .map(|&a| {
            let mut dists: Vec<(f64, usize)> = rows
                .iter()
                .filter(|&&b| b != a)
                .map(|&b| {
                    let d: f64 = x
                        .row(a)
                        .iter()
                        .zip(x.row(b))
                        .map(|(p, q)| (p - q) * (p - q))
                        .sum();
                    (d, b)
                })
                .collect();
            dists.sort_by(|l, r| l.0.partial_cmp(&r.0).unwrap().then(l.1.cmp(&r.1)));
            dists[..k].iter().map(|&(_, b)| b).collect()
        })
        .collect()
}
