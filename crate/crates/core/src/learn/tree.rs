//! CART decision tree with Gini impurity. Candidate thresholds are the
//! midpoints between consecutive distinct feature values; the first best
//! split in (feature, threshold) scan order wins, which pins down the tree
//! exactly for any input.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::matrix::Matrix;

use super::{FittedModel, TreeParams};

/// Tree storage is a flat arena; child fields index into it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        counts: Vec<usize>,
    },
}

pub fn train(params: &TreeParams, x: &Matrix, y: &[usize], n_classes: usize) -> Result<FittedModel> {
    let rows: Vec<usize> = (0..x.n_rows()).collect();
    let mut nodes = Vec::new();
    build(params, x, y, n_classes, &rows, 0, &mut nodes);
    Ok(FittedModel::Tree {
        nodes,
        n_features: x.n_cols(),
        n_classes,
    })
}

fn class_counts(y: &[usize], rows: &[usize], n_classes: usize) -> Vec<usize> {
    let mut counts = vec![0usize; n_classes];
    for &r in rows {
        counts[y[r]] += 1;
    }
    counts
}

fn gini(counts: &[usize], total: usize) -> f64 {
    let n = total as f64;
    1.0 - counts
        .iter()
        .map(|&c| {
            let p = c as f64 / n;
            p * p
        })
        .sum::<f64>()
}

/// Builds the subtree over `rows` and returns its node index.
fn build(
    params: &TreeParams,
    x: &Matrix,
    y: &[usize],
    n_classes: usize,
    rows: &[usize],
    depth: usize,
    nodes: &mut Vec<TreeNode>,
) -> usize {
    let counts = class_counts(y, rows, n_classes);
    let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
    if pure || depth >= params.max_depth || rows.len() < params.min_samples_split {
        nodes.push(TreeNode::Leaf { counts });
        return nodes.len() - 1;
    }

    let parent_gini = gini(&counts, rows.len());
    let mut best: Option<(f64, usize, f64)> = None;
    for feature in 0..x.n_cols() {
        let mut values: Vec<f64> = rows.iter().map(|&r| x.get(r, feature)).collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        values.dedup();
        for pair in values.windows(2) {
            let threshold = (pair[0] + pair[1]) / 2.0;
            let mut left_counts = vec![0usize; n_classes];
            let mut left_n = 0usize;
            for &r in rows {
                if x.get(r, feature) <= threshold {
                    left_counts[y[r]] += 1;
                    left_n += 1;
                }
            }
            let right_n = rows.len() - left_n;
            if left_n == 0 || right_n == 0 {
                continue;
            }
            let right_counts: Vec<usize> = counts
                .iter()
                .zip(&left_counts)
                .map(|(&t, &l)| t - l)
                .collect();
            let weighted = (left_n as f64 * gini(&left_counts, left_n)
                + right_n as f64 * gini(&right_counts, right_n))
                / rows.len() as f64;
            let gain = parent_gini - weighted;
            // strict improvement keeps the earliest (feature, threshold)
            if gain > 0.0 && best.map_or(true, |(g, _, _)| gain > g) {
                best = Some((gain, feature, threshold));
            }
        }
    }

    let Some((_, feature, threshold)) = best else {
        nodes.push(TreeNode::Leaf { counts });
        return nodes.len() - 1;
    };

    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
        .iter()
        .partition(|&&r| x.get(r, feature) <= threshold);

    let slot = nodes.len();
    nodes.push(TreeNode::Leaf { counts: Vec::new() });
    let left = build(params, x, y, n_classes, &left_rows, depth + 1, nodes);
    let right = build(params, x, y, n_classes, &right_rows, depth + 1, nodes);
    nodes[slot] = TreeNode::Split {
        feature,
        threshold,
        left,
        right,
    };
    slot
}

pub fn scores(nodes: &[TreeNode], n_classes: usize, x: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(x.n_rows(), n_classes);
    for (i, query) in x.rows().enumerate() {
        let mut at = 0usize;
        loop {
            match &nodes[at] {
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if query[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
                TreeNode::Leaf { counts } => {
                    let total: usize = counts.iter().sum();
                    for c in 0..n_classes {
                        out.set(i, c, counts[c] as f64 / total as f64);
                    }
                    break;
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::test_util::matrix;
    use super::super::{predict, predict_scores, train, Algorithm, FittedModel, ModelSpec};
    use super::*;

    fn tree_spec() -> ModelSpec {
        ModelSpec::new(Algorithm::Tree, 0)
    }

    fn nodes_of(model: &FittedModel) -> &[TreeNode] {
        match model {
            FittedModel::Tree { nodes, .. } => nodes,
            _ => unreachable!(),
        }
    }

    #[test]
    fn uniform_labels_make_a_single_leaf() {
        let x = matrix(&[vec![0.0], vec![5.0], vec![9.0]]);
        let y = vec![1, 1, 1];
        let model = train(&tree_spec(), &x, &y).unwrap();
        assert_eq!(nodes_of(&model).len(), 1);
        assert_eq!(predict(&model, &x).unwrap(), y);
    }

    #[test]
    fn midpoint_split_separates_two_blobs() {
        let x = matrix(&[vec![1.0], vec![2.0], vec![8.0], vec![9.0]]);
        let y = vec![0, 0, 1, 1];
        let model = train(&tree_spec(), &x, &y).unwrap();
        match &nodes_of(&model)[0] {
            TreeNode::Split {
                feature, threshold, ..
            } => {
                assert_eq!(*feature, 0);
                // ties on gain resolve to the earliest threshold, 1.5 and 8.5
                // both give gain but 5.0 separates perfectly
                assert_eq!(*threshold, 5.0);
            }
            _ => panic!("expected a split at the root"),
        }
        let q = matrix(&[vec![3.0], vec![7.0]]);
        assert_eq!(predict(&model, &q).unwrap(), vec![0, 1]);
    }

    #[test]
    fn leaf_scores_are_class_frequencies() {
        // a constant feature leaves no split, so the root leaf holds [0,0,1]
        let x = matrix(&[vec![1.0], vec![1.0], vec![1.0]]);
        let y = vec![0, 0, 1];
        let model = train(&tree_spec(), &x, &y).unwrap();
        assert_eq!(nodes_of(&model).len(), 1);
        let s = predict_scores(&model, &matrix(&[vec![1.0]])).unwrap();
        assert!((s.get(0, 0) - 2.0 / 3.0).abs() < 1e-12);
        assert!((s.get(0, 1) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn tie_breaks_prefer_lowest_feature_and_threshold() {
        // feature 0 and feature 1 both separate the classes perfectly;
        // feature 0 must win, and its earliest perfect threshold
        let x = matrix(&[vec![0.0, 10.0], vec![1.0, 11.0], vec![5.0, 20.0], vec![6.0, 21.0]]);
        let y = vec![0, 0, 1, 1];
        let model = train(&tree_spec(), &x, &y).unwrap();
        match &nodes_of(&model)[0] {
            TreeNode::Split { feature, threshold, .. } => {
                assert_eq!(*feature, 0);
                assert_eq!(*threshold, 3.0);
            }
            _ => panic!("expected a split"),
        }
    }

    #[test]
    fn min_samples_split_stops_growth() {
        let x = matrix(&[vec![0.0], vec![1.0], vec![2.0], vec![3.0]]);
        let y = vec![0, 1, 0, 1];
        let spec = tree_spec().with_param("min_samples_split", 5.into());
        let model = train(&spec, &x, &y).unwrap();
        assert_eq!(nodes_of(&model).len(), 1);
    }

    #[test]
    fn max_depth_limits_the_tree() {
        let x = matrix(&[vec![0.0], vec![1.0], vec![2.0], vec![3.0]]);
        let y = vec![0, 1, 0, 1];
        let spec = tree_spec().with_param("max_depth", 1.into());
        let model = train(&spec, &x, &y).unwrap();
        // a stump: one split, two leaves
        let splits = nodes_of(&model)
            .iter()
            .filter(|n| matches!(n, TreeNode::Split { .. }))
            .count();
        assert!(splits <= 1);
        for node in nodes_of(&model) {
            if let TreeNode::Split { left, right, .. } = node {
                assert!(matches!(nodes_of(&model)[*left], TreeNode::Leaf { .. }));
                assert!(matches!(nodes_of(&model)[*right], TreeNode::Leaf { .. }));
            }
        }
    }

    #[test]
    fn deep_tree_fits_alternating_labels() {
        let x = matrix(&[vec![0.0], vec![1.0], vec![2.0], vec![3.0]]);
        let y = vec![0, 1, 0, 1];
        let model = train(&tree_spec(), &x, &y).unwrap();
        assert_eq!(predict(&model, &x).unwrap(), y);
    }
}
