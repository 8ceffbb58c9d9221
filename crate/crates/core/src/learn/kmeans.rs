//! Lloyd's algorithm with k-means++ seeding. Every random draw comes from
//! the caller's seed, assignment ties go to the lowest centroid index, and
//! an empty cluster keeps its previous centroid, so the outcome is a pure
//! function of (params, seed, data).

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::Rng;

use super::{squared_distance, KmeansParams};

pub fn cluster(params: &KmeansParams, seed: u64, x: &Matrix) -> Result<Vec<i64>> {
    let n = x.n_rows();
    if params.k > n {
        return Err(Error::Degenerate(format!(
            "kmeans k={} exceeds {} rows",
            params.k, n
        )));
    }
    let mut rng = Rng::new(seed);
    let mut centers = plus_plus_init(params.k, x, &mut rng);
    let mut assignment = vec![0usize; n];
    let mut prev_inertia = f64::INFINITY;

    for _ in 0..params.max_iters {
        let inertia = assign(x, &centers, &mut assignment);
        assert!(
            inertia <= prev_inertia + 1e-9 * (1.0 + prev_inertia.abs().min(1e12)),
            "kmeans inertia rose from {} to {}",
            prev_inertia,
            inertia
        );
        prev_inertia = inertia;

        let new_centers = recompute_centers(x, &assignment, &centers);
        let shift = centers
            .iter()
            .zip(&new_centers)
            .map(|(old, new)| squared_distance(old, new).sqrt())
            .fold(0.0f64, f64::max);
        centers = new_centers;
        if shift < params.tol {
            break;
        }
    }

    // labels must describe the final centroids
    let inertia = assign(x, &centers, &mut assignment);
    assert!(
        inertia <= prev_inertia + 1e-9 * (1.0 + prev_inertia.abs().min(1e12)),
        "kmeans inertia rose from {} to {}",
        prev_inertia,
        inertia
    );
    Ok(assignment.into_iter().map(|a| a as i64).collect())
}

/// k-means++: first center uniform, each next center drawn with probability
/// proportional to its squared distance from the nearest chosen center.
fn plus_plus_init(k: usize, x: &Matrix, rng: &mut Rng) -> Vec<Vec<f64>> {
    let n = x.n_rows();
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
    centers.push(x.row(rng.gen_range(n)).to_vec());
    let mut d2: Vec<f64> = (0..n)
        .map(|i| squared_distance(x.row(i), &centers[0]))
        .collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let r = rng.next_f64() * total;
            let mut cum = 0.0;
            let mut chosen = None;
            for (i, &w) in d2.iter().enumerate() {
                cum += w;
                if cum > r {
                    chosen = Some(i);
                    break;
                }
            }
            // rounding can leave r at the very top; take the last mass point
            chosen.unwrap_or_else(|| {
                d2.iter().rposition(|&w| w > 0.0).expect("positive total")
            })
        } else {
            // every point coincides with a center already
            rng.gen_range(n)
        };
        let center = x.row(pick).to_vec();
        for i in 0..n {
            d2[i] = d2[i].min(squared_distance(x.row(i), &center));
        }
        centers.push(center);
    }
    centers
}

fn assign(x: &Matrix, centers: &[Vec<f64>], assignment: &mut [usize]) -> f64 {
    let mut inertia = 0.0;
    for (i, row) in x.rows().enumerate() {
        let mut best = 0usize;
        let mut best_d2 = squared_distance(row, &centers[0]);
        for (c, center) in centers.iter().enumerate().skip(1) {
            let d2 = squared_distance(row, center);
            if d2 < best_d2 {
                best = c;
                best_d2 = d2;
            }
        }
        assignment[i] = best;
        inertia += best_d2;
    }
    inertia
}

fn recompute_centers(x: &Matrix, assignment: &[usize], old: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = x.n_cols();
    let mut sums = vec![vec![0.0f64; d]; old.len()];
    let mut counts = vec![0usize; old.len()];
    for (i, row) in x.rows().enumerate() {
        counts[assignment[i]] += 1;
        for j in 0..d {
            sums[assignment[i]][j] += row[j];
        }
    }
    sums.into_iter()
        .zip(counts)
        .zip(old)
        .map(|((sum, count), prev)| {
            if count == 0 {
                prev.clone()
            } else {
                sum.into_iter().map(|s| s / count as f64).collect()
            }
        })
        .collect()
}
