//! DBSCAN with Euclidean eps-neighborhoods. A point's neighborhood includes
//! itself, so min_pts counts the point. Cluster ids follow first-discovery
//! order over ascending row indices, which makes labels deterministic.

use std::collections::VecDeque;

use crate::matrix::Matrix;

use super::{squared_distance, DbscanParams};

const UNVISITED: i64 = -2;
pub const NOISE: i64 = -1;

pub fn cluster(params: &DbscanParams, x: &Matrix) -> Vec<i64> {
    let n = x.n_rows();
    let eps2 = params.eps * params.eps;
    let neighborhood = |i: usize| -> Vec<usize> {
        (0..n)
            .filter(|&j| squared_distance(x.row(i), x.row(j)) <= eps2)
            .collect()
    };

    let mut labels = vec![UNVISITED; n];
    let mut next_cluster: i64 = 0;
    for p in 0..n {
        if labels[p] != UNVISITED {
            continue;
        }
        let seeds = neighborhood(p);
        if seeds.len() < params.min_pts {
            labels[p] = NOISE;
            continue;
        }
        let id = next_cluster;
        next_cluster += 1;
        labels[p] = id;
        let mut queue: VecDeque<usize> = seeds.into();
        while let Some(q) = queue.pop_front() {
            if labels[q] == NOISE {
                // border point reclaimed by the cluster
                labels[q] = id;
            }
            if labels[q] != UNVISITED {
                continue;
            }
            labels[q] = id;
            let reach = neighborhood(q);
            if reach.len() >= params.min_pts {
                queue.extend(reach);
            }
        }
    }
    labels
}

#[cfg(test)]
mod tests {
    use super::super::test_util::matrix;
    use super::super::{cluster, Algorithm, ModelSpec};

    fn dbscan_spec(eps: f64, min_pts: usize) -> ModelSpec {
        ModelSpec::new(Algorithm::Dbscan, 0)
            .with_param("eps", serde_json::Value::from(eps))
            .with_param("min_pts", min_pts.into())
    }

    #[test]
    fn two_blobs_and_an_outlier() {
        let x = matrix(&[
            vec![0.0],
            vec![0.5],
            vec![1.0],
            vec![100.0],
            vec![100.5],
            vec![101.0],
            vec![500.0],
        ]);
        let labels = cluster(&dbscan_spec(0.6, 2), &x).unwrap();
        assert_eq!(labels, vec![0, 0, 0, 1, 1, 1, -1]);
    }

    #[test]
    fn ids_follow_first_discovery_order() {
        // the second blob appears first in row order, so it gets id 0
        let x = matrix(&[
            vec![100.0],
            vec![100.4],
            vec![0.0],
            vec![0.4],
        ]);
        let labels = cluster(&dbscan_spec(0.5, 2), &x).unwrap();
        assert_eq!(labels, vec![0, 0, 1, 1]);
    }

    #[test]
    fn min_pts_one_promotes_everything() {
        let x = matrix(&[vec![0.0], vec![10.0], vec![20.0]]);
        let labels = cluster(&dbscan_spec(1.0, 1), &x).unwrap();
        assert_eq!(labels, vec![0, 1, 2]);
    }

    #[test]
    fn border_point_joins_the_first_cluster_that_reaches_it() {
        // only row 1 is core; rows 0 and 2 are border points it reaches
        let x = matrix(&[vec![0.0], vec![0.8], vec![1.6], vec![10.0]]);
        let labels = cluster(&dbscan_spec(0.9, 3), &x).unwrap();
        assert_eq!(labels[0], 0);
        assert_eq!(labels[1], 0);
        assert_eq!(labels[2], 0);
        assert_eq!(labels[3], -1);
    }

    #[test]
    fn all_noise_when_eps_is_tiny() {
        let x = matrix(&[vec![0.0], vec![5.0], vec![10.0]]);
        let labels = cluster(&dbscan_spec(0.1, 2), &x).unwrap();
        assert_eq!(labels, vec![-1, -1, -1]);
    }
}
