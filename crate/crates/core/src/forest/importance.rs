use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ensemble::{loss, RandomForest};
use crate::error::{Error, Result};
use crate::seeding;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    /// Mean increase in per-tree out-of-bag error when the feature is permuted.
    /// Raw values; may be slightly negative.
    pub importance: Vec<f64>,
    /// 1-based rank per feature (1 = most important; ties keep feature order).
    pub rank: Vec<usize>,
}

impl ImportanceReport {
    fn from_scores(importance: Vec<f64>) -> Self {
        let mut order: Vec<usize> = (0..importance.len()).collect();
        order.sort_by(|&a, &b| importance[b].total_cmp(&importance[a]));
        let mut rank = vec![0; importance.len()];
        for (r, &f) in order.iter().enumerate() {
            rank[f] = r + 1;
        }
        Self { importance, rank }
    }

    /// Importance with negative values clipped to zero, for display.
    pub fn clipped(&self) -> Vec<f64> {
        self.importance.iter().map(|v| v.max(0.0)).collect()
    }

    /// Feature indices from most to least important.
    pub fn ordered(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.rank.len()).collect();
        order.sort_by_key(|&f| self.rank[f]);
        order
    }
}

/// Permutation importance on out-of-bag rows.
///
/// For every tree and feature, the feature's values are shuffled among that
/// tree's out-of-bag rows and the tree's error on those rows is recomputed;
/// the importance is the increase averaged over trees with non-empty
/// out-of-bag sets.
pub fn variable_importance(
    forest: &RandomForest,
    data: &[Vec<f64>],
    targets: &[f64],
    seed: u64,
) -> Result<ImportanceReport> {
    if data.len() != forest.n_train || targets.len() != forest.n_train {
        return Err(Error::invalid(format!(
            "forest was trained on {} rows, got {}",
            forest.n_train,
            data.len()
        )));
    }
    let task = forest.task;
    let per_tree: Vec<Option<Vec<f64>>> = forest
        .trees
        .par_iter()
        .zip(&forest.oob_rows)
        .enumerate()
        .map(|(k, (tree, oob))| {
            if oob.is_empty() {
                return None;
            }
            let rows: Vec<usize> = oob.iter().map(|&i| i as usize).collect();
            let base: f64 = rows
                .iter()
                .map(|&i| loss(task, tree.predict(&data[i]), targets[i]))
                .sum::<f64>()
                / rows.len() as f64;
            let mut buf = vec![0.0; forest.n_features];
            let increases = (0..forest.n_features)
                .map(|f| {
                    let mut rng = seeding::derived_rng(seed, "importance", (k * forest.n_features + f) as u64);
                    let mut donors = rows.clone();
                    donors.shuffle(&mut rng);
                    let permuted: f64 = rows
                        .iter()
                        .zip(&donors)
                        .map(|(&i, &d)| {
                            buf.copy_from_slice(&data[i]);
                            buf[f] = data[d][f];
                            loss(task, tree.predict(&buf), targets[i])
                        })
                        .sum::<f64>()
                        / rows.len() as f64;
                    permuted - base
                })
                .collect();
            Some(increases)
        })
        .collect();
    let mut sum = vec![0.0; forest.n_features];
    let mut used = 0usize;
    for inc in per_tree.into_iter().flatten() {
        used += 1;
        for (s, v) in sum.iter_mut().zip(inc) {
            *s += v;
        }
    }
    if used == 0 {
        return Ok(ImportanceReport::from_scores(sum));
    }
    Ok(ImportanceReport::from_scores(
        sum.into_iter().map(|s| s / used as f64).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::{fit_forest, ForestParams, Task};
    use rand::Rng;

    #[test]
    fn unused_feature_has_zero_importance_and_signal_ranks_first() {
        let mut rng = seeding::rng(1);
        let x: Vec<Vec<f64>> = (0..600)
            .map(|_| {
                vec![
                    rng.random::<f64>(),
                    rng.random::<f64>(),
                    rng.random::<f64>(),
                    rng.random::<f64>(),
                    0.25, // constant: no tree can split on it
                ]
            })
            .collect();
        let y: Vec<f64> = x.iter().map(|r| 3.0 * r[2] + 0.3 * r[0]).collect();
        let f = fit_forest(&x, &y, Task::Regression, &ForestParams::default(), 2).unwrap();
        let rep = variable_importance(&f, &x, &y, 3).unwrap();
        assert_eq!(rep.importance[4], 0.0);
        assert_eq!(rep.rank[2], 1);
        assert_eq!(rep.ordered()[0], 2);
        assert!(rep.clipped().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn ranks_are_a_permutation() {
        let r = ImportanceReport::from_scores(vec![0.1, -0.2, 0.5, 0.1]);
        assert_eq!(r.rank, vec![2, 4, 1, 3]);
        assert_eq!(r.clipped(), vec![0.1, 0.0, 0.5, 0.1]);
    }
}
