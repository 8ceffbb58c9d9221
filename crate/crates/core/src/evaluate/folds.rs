//! Fold planning. Stratified assignment deals each class round-robin after
//! a seeded shuffle; grouped assignment deals whole groups, trading exact
//! stratification for atomic groups.

use crate::error::{Error, Result};
use crate::rng::Rng;

/// A cross-validation partition: fold index per row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    pub k: usize,
    pub assignments: Vec<usize>,
    pub run_index: usize,
    pub seed: u64,
}

impl FoldPlan {
    pub fn with_run_index(mut self, run_index: usize) -> Self {
        self.run_index = run_index;
        self
    }

    pub fn test_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == fold)
            .collect()
    }

    pub fn train_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] != fold)
            .collect()
    }
}

/// Build a fold plan over `y`. Without groups, each class's rows are
/// shuffled and dealt round-robin, so per-class fold counts differ by at
/// most one. With groups, whole groups are shuffled and dealt instead.
pub fn stratified_folds(
    y: &[usize],
    k: usize,
    seed: u64,
    groups: Option<&[usize]>,
) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::Config("fold count must be at least 2".into()));
    }
    if y.is_empty() {
        return Err(Error::Degenerate("cannot fold an empty dataset".into()));
    }
    let mut rng = Rng::new(seed);
    let mut assignments = vec![0usize; y.len()];

    match groups {
        None => {
            let n_classes = y.iter().max().expect("nonempty") + 1;
            for class in 0..n_classes {
                let mut rows: Vec<usize> =
                    (0..y.len()).filter(|&i| y[i] == class).collect();
                if rows.is_empty() {
                    continue;
                }
                if rows.len() < k {
                    return Err(Error::Degenerate(format!(
                        "class {} has {} rows, smaller than fold count {}",
                        class,
                        rows.len(),
                        k
                    )));
                }
                rng.shuffle(&mut rows);
                for (i, &row) in rows.iter().enumerate() {
                    assignments[row] = i % k;
                }
            }
        }
        Some(group_ids) => {
            if group_ids.len() != y.len() {
                return Err(Error::Dimension(format!(
                    "labels have {} rows, groups have {}",
                    y.len(),
                    group_ids.len()
                )));
            }
            let mut order: Vec<usize> = Vec::new();
            for &g in group_ids {
                if !order.contains(&g) {
                    order.push(g);
                }
            }
            if order.len() < k {
                return Err(Error::Degenerate(format!(
                    "only {} groups, smaller than fold count {}",
                    order.len(),
                    k
                )));
            }
            rng.shuffle(&mut order);
            for (i, &row_group) in group_ids.iter().enumerate() {
                let pos = order
                    .iter()
                    .position(|&g| g == row_group)
                    .expect("every row group is in the order");
                assignments[i] = pos % k;
            }
        }
    }

    Ok(FoldPlan {
        k,
        assignments,
        run_index: 0,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn per_fold_class_counts(plan: &FoldPlan, y: &[usize]) -> Vec<Vec<usize>> {
        let n_classes = y.iter().max().unwrap() + 1;
        let mut counts = vec![vec![0usize; n_classes]; plan.k];
        for (i, &fold) in plan.assignments.iter().enumerate() {
            counts[fold][y[i]] += 1;
        }
        counts
    }

    #[test]
    fn six_zeros_four_ones_split_evenly() {
        let y = [vec![0usize; 6], vec![1usize; 4]].concat();
        let plan = stratified_folds(&y, 2, 9, None).unwrap();
        for fold in per_fold_class_counts(&plan, &y) {
            assert_eq!(fold, vec![3, 2]);
        }
    }

    #[test]
    fn k_equals_n_is_leave_one_out() {
        let y = vec![0usize; 5];
        let plan = stratified_folds(&y, 5, 3, None).unwrap();
        let mut folds: Vec<usize> = plan.assignments.clone();
        folds.sort_unstable();
        assert_eq!(folds, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn groups_stay_whole() {
        let y = vec![0, 0, 1, 1, 0, 1];
        let groups = vec![7, 7, 8, 8, 9, 9];
        let plan = stratified_folds(&y, 3, 11, Some(&groups)).unwrap();
        // one whole group per fold
        for fold in 0..3 {
            let members: HashSet<usize> = plan
                .test_rows(fold)
                .iter()
                .map(|&i| groups[i])
                .collect();
            assert_eq!(members.len(), 1);
            assert_eq!(plan.test_rows(fold).len(), 2);
        }
    }

    #[test]
    fn small_class_is_rejected() {
        let y = vec![0, 0, 0, 1];
        let err = stratified_folds(&y, 2, 0, None).unwrap_err();
        assert!(
            err.to_string().contains("smaller than fold count"),
            "{}",
            err
        );
    }

    #[test]
    fn too_few_groups_is_rejected() {
        let y = vec![0, 1, 0, 1];
        let groups = vec![1, 1, 2, 2];
        let err = stratified_folds(&y, 3, 0, Some(&groups)).unwrap_err();
        assert!(err.to_string().contains("groups"), "{}", err);
    }

    #[test]
    fn k_below_two_is_rejected() {
        assert!(stratified_folds(&[0, 0], 1, 0, None).is_err());
    }

    #[test]
    fn plans_partition_and_stratify_across_random_inputs() {
        let mut rng = crate::rng::Rng::new(2024);
        for trial in 0..60 {
            let k = 2 + (trial % 4);
            let n_classes = 2 + (trial % 3);
            // every class gets at least k rows, then some extra
            let mut y: Vec<usize> = (0..n_classes).flat_map(|c| vec![c; k]).collect();
            for _ in 0..rng.gen_range(25) {
                y.push(rng.gen_range(n_classes));
            }
            rng.shuffle(&mut y);
            let plan = stratified_folds(&y, k, trial as u64, None).unwrap();
            assert_eq!(plan.assignments.len(), y.len());
            assert!(plan.assignments.iter().all(|&f| f < k));
            // test folds are disjoint and exhaustive
            let total: usize = (0..k).map(|f| plan.test_rows(f).len()).sum();
            assert_eq!(total, y.len());
            // per-class counts differ by at most one across folds
            let counts = per_fold_class_counts(&plan, &y);
            for class in 0..n_classes {
                let per_fold: Vec<usize> = counts.iter().map(|f| f[class]).collect();
                let lo = per_fold.iter().min().unwrap();
                let hi = per_fold.iter().max().unwrap();
                assert!(hi - lo <= 1, "class {} spread {:?}", class, per_fold);
            }
        }
    }

    #[test]
    fn grouped_plans_never_split_a_group() {
        let mut rng = crate::rng::Rng::new(77);
        for trial in 0..40 {
            let k = 2 + (trial % 3);
            let n_groups = k + rng.gen_range(5);
            let mut y = Vec::new();
            let mut groups = Vec::new();
            for g in 0..n_groups {
                let len = 1 + rng.gen_range(4);
                for _ in 0..len {
                    y.push(rng.gen_range(2));
                    groups.push(g);
                }
            }
            let plan = stratified_folds(&y, k, trial as u64, Some(&groups)).unwrap();
            let mut fold_of_group = std::collections::HashMap::new();
            for (i, &fold) in plan.assignments.iter().enumerate() {
                let prev = fold_of_group.insert(groups[i], fold);
                if let Some(p) = prev {
                    assert_eq!(p, fold, "group {} split across folds", groups[i]);
                }
            }
            // group counts per fold differ by at most one
            let mut per_fold = vec![0usize; k];
            for (_, &fold) in fold_of_group.iter() {
                per_fold[fold] += 1;
            }
            let lo = per_fold.iter().min().unwrap();
            let hi = per_fold.iter().max().unwrap();
            assert!(hi - lo <= 1);
        }
    }

    #[test]
    fn same_seed_same_plan() {
        let y: Vec<usize> = (0..30).map(|i| i % 3).collect();
        let a = stratified_folds(&y, 5, 4, None).unwrap();
        let b = stratified_folds(&y, 5, 4, None).unwrap();
        assert_eq!(a, b);
        let c = stratified_folds(&y, 5, 5, None).unwrap();
        assert_ne!(a.assignments, c.assignments);
    }
}
