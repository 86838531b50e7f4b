use serde::{Deserialize, Serialize};

use super::ensemble::RandomForest;
use crate::error::{Error, Result};

/// Co-occurrence counts of rows in terminal nodes, summed over trees.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProximityMatrix {
    pub n: usize,
    pub n_trees: usize,
    /// Row-major `n × n` counts.
    pub counts: Vec<u32>,
}

impl ProximityMatrix {
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.counts[i * self.n + j]
    }

    /// Counts divided by the number of trees.
    pub fn normalized(&self) -> Vec<f64> {
        let k = self.n_trees as f64;
        self.counts.iter().map(|&c| c as f64 / k).collect()
    }
}

/// Run every row down every tree; rows sharing a leaf gain one proximity.
pub fn proximity(forest: &RandomForest, data: &[Vec<f64>]) -> Result<ProximityMatrix> {
    if let Some(bad) = data.iter().find(|r| r.len() != forest.n_features) {
        return Err(Error::Arity {
            expected: forest.n_features,
            got: bad.len(),
        });
    }
    let n = data.len();
    let mut counts = vec![0u32; n * n];
    let mut by_leaf: Vec<Vec<usize>> = Vec::new();
    for tree in &forest.trees {
        by_leaf.clear();
        by_leaf.resize(tree.nodes.len(), Vec::new());
        for (i, row) in data.iter().enumerate() {
            by_leaf[tree.leaf_index(row)].push(i);
        }
        for members in &by_leaf {
            for &a in members {
                for &b in members {
                    counts[a * n + b] += 1;
                }
            }
        }
    }
    Ok(ProximityMatrix {
        n,
        n_trees: forest.trees.len(),
        counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::{fit_forest, ForestParams, Task};
    use crate::seeding;
    use rand::Rng;

    #[test]
    fn diagonal_symmetry_and_duplicates() {
        let mut rng = seeding::rng(5);
        let mut x: Vec<Vec<f64>> = (0..40)
            .map(|_| (0..4).map(|_| rng.random::<f64>()).collect())
            .collect();
        x.push(x[3].clone());
        let y: Vec<f64> = x.iter().map(|r| r[0] * 2.0 + r[1]).collect();
        let params = ForestParams {
            n_trees: 12,
            min_node: 3,
            ..ForestParams::default()
        };
        let f = fit_forest(&x, &y, Task::Regression, &params, 1).unwrap();
        let p = proximity(&f, &x).unwrap();
        for i in 0..p.n {
            assert_eq!(p.get(i, i), 12);
            for j in 0..p.n {
                assert_eq!(p.get(i, j), p.get(j, i));
            }
        }
        assert_eq!(p.get(3, 40), 12);
        assert!(p.normalized().iter().all(|v| (0.0..=1.0).contains(v)));
    }
}
