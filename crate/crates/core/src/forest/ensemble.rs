use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{argmax_smallest, check_inputs, grow_on_sample, DecisionTree, FeatureKind, Task, TreeParams};
use crate::error::{Error, Result};
use crate::seeding;

/// Forest hyper-parameters. Defaults: 70 trees, terminal nodes of at least
/// 7 cases, 3 features tried per split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub min_node: usize,
    pub m_try: usize,
    /// Draw a bootstrap per tree. Turning this off trains every tree on the
    /// full sample, which is only useful for testing.
    #[serde(default = "default_true")]
    pub bootstrap: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub feature_kinds: Vec<FeatureKind>,
}

fn default_true() -> bool {
    true
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 70,
            min_node: 7,
            m_try: 3,
            bootstrap: true,
            feature_kinds: Vec::new(),
        }
    }
}

impl ForestParams {
    pub fn validate(&self, n_features: usize) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::invalid("a forest needs at least one tree"));
        }
        if self.min_node == 0 {
            return Err(Error::invalid("min_node must be at least 1"));
        }
        if self.m_try == 0 {
            return Err(Error::invalid("m_try must be at least 1"));
        }
        if self.bootstrap && self.m_try >= n_features {
            return Err(Error::invalid(format!(
                "m_try {} must be smaller than the number of features {n_features}",
                self.m_try
            )));
        }
        if self.m_try > n_features {
            return Err(Error::invalid(format!(
                "m_try {} exceeds the number of features {n_features}",
                self.m_try
            )));
        }
        if !self.feature_kinds.is_empty() && self.feature_kinds.len() != n_features {
            return Err(Error::Arity {
                expected: n_features,
                got: self.feature_kinds.len(),
            });
        }
        Ok(())
    }

    fn tree_params(&self) -> TreeParams {
        TreeParams {
            m_try: self.m_try,
            min_node: self.min_node,
            feature_kinds: self.feature_kinds.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub params: ForestParams,
    pub task: Task,
    pub n_features: usize,
    pub n_train: usize,
    pub seed: u64,
    pub trees: Vec<DecisionTree>,
    /// Training rows left out of each tree's bootstrap.
    pub oob_rows: Vec<Vec<u32>>,
}

/// Grow `params.n_trees` trees, each on its own bootstrap of `data`.
///
/// Tree `k` draws from a stream seeded by `(seed, k)`, so the forest does not
/// depend on how many threads grow it.
pub fn fit_forest(
    data: &[Vec<f64>],
    targets: &[f64],
    task: Task,
    params: &ForestParams,
    seed: u64,
) -> Result<RandomForest> {
    let m = check_inputs(data, targets, task)?;
    params.validate(m)?;
    let n = data.len();
    let tree_params = params.tree_params();
    let grown: Vec<(DecisionTree, Vec<u32>)> = (0..params.n_trees)
        .into_par_iter()
        .map(|k| {
            let mut rng = seeding::derived_rng(seed, "tree", k as u64);
            let (sample, oob) = if params.bootstrap {
                let mut in_bag = vec![false; n];
                let sample: Vec<usize> = (0..n)
                    .map(|_| {
                        let i = rng.random_range(0..n);
                        in_bag[i] = true;
                        i
                    })
                    .collect();
                let oob = (0..n as u32).filter(|&i| !in_bag[i as usize]).collect();
                (sample, oob)
            } else {
                ((0..n).collect(), Vec::new())
            };
            let tree = grow_on_sample(data, targets, sample, task, &tree_params, &mut rng);
            (tree, oob)
        })
        .collect();
    let (trees, oob_rows) = grown.into_iter().unzip();
    Ok(RandomForest {
        params: params.clone(),
        task,
        n_features: m,
        n_train: n,
        seed,
        trees,
        oob_rows,
    })
}

/// Combine per-tree outputs: mean for regression, majority vote with the
/// smallest label winning ties for classification.
pub(crate) fn aggregate(task: Task, outputs: impl IntoIterator<Item = f64>) -> Option<f64> {
    match task {
        Task::Regression => {
            let (mut sum, mut count) = (0.0, 0usize);
            for v in outputs {
                sum += v;
                count += 1;
            }
            (count > 0).then(|| sum / count as f64)
        }
        Task::Classification { n_classes } => {
            let mut votes = vec![0u32; n_classes];
            let mut any = false;
            for v in outputs {
                votes[v as usize] += 1;
                any = true;
            }
            any.then(|| argmax_smallest(&votes) as f64)
        }
    }
}

pub(crate) fn loss(task: Task, predicted: f64, actual: f64) -> f64 {
    match task {
        Task::Regression => (predicted - actual).powi(2),
        Task::Classification { .. } => f64::from(u8::from(predicted != actual)),
    }
}

impl RandomForest {
    fn check_arity(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_features {
            return Err(Error::Arity {
                expected: self.n_features,
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        self.check_arity(x)?;
        Ok(aggregate(self.task, self.trees.iter().map(|t| t.predict(x))).expect("at least one tree"))
    }

    pub fn predict_many(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
        rows.iter().map(|r| self.predict(r)).collect()
    }

    /// Mean fraction of training rows each tree left out of its bootstrap.
    pub fn oob_fraction(&self) -> f64 {
        if self.n_train == 0 {
            return 0.0;
        }
        self.oob_rows.iter().map(|o| o.len() as f64).sum::<f64>()
            / (self.oob_rows.len() * self.n_train) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OobEstimate {
    /// Misclassification rate or mean squared error.
    pub error: f64,
    pub rows_scored: usize,
    /// Rows that every tree had in its bootstrap.
    pub rows_skipped: usize,
}

/// Error of the forest on its own training data, each row predicted only by
/// the trees that did not see it.
pub fn oob_error(forest: &RandomForest, data: &[Vec<f64>], targets: &[f64]) -> Result<OobEstimate> {
    if data.len() != forest.n_train || targets.len() != forest.n_train {
        return Err(Error::invalid(format!(
            "forest was trained on {} rows, got {}",
            forest.n_train,
            data.len()
        )));
    }
    let mut per_row: Vec<Vec<f64>> = vec![Vec::new(); data.len()];
    for (tree, oob) in forest.trees.iter().zip(&forest.oob_rows) {
        for &i in oob {
            per_row[i as usize].push(tree.predict(&data[i as usize]));
        }
    }
    let mut total = 0.0;
    let mut scored = 0;
    for (i, outputs) in per_row.into_iter().enumerate() {
        if let Some(p) = aggregate(forest.task, outputs) {
            total += loss(forest.task, p, targets[i]);
            scored += 1;
        }
    }
    if scored == 0 {
        return Err(Error::Empty("no row has an out-of-bag tree"));
    }
    Ok(OobEstimate {
        error: total / scored as f64,
        rows_scored: scored,
        rows_skipped: data.len() - scored,
    })
}
