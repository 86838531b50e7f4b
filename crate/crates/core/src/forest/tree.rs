//! Unpruned CART trees.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeding;

/// What a tree predicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "type")]
pub enum Task {
    Regression,
    /// Targets are class labels `0..n_classes` stored as reals.
    Classification { n_classes: usize },
}

/// How a feature is split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    /// Threshold splits `x <= t`.
    #[default]
    Numeric,
    /// Integer codes; membership splits send a subset of codes left.
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitKind {
    Threshold(f64),
    /// Codes routed to the left child; unseen codes go right.
    Membership(Vec<i64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitRule {
    pub feature: usize,
    pub kind: SplitKind,
}

impl SplitRule {
    pub fn goes_left(&self, x: &[f64]) -> bool {
        let v = x[self.feature];
        match &self.kind {
            SplitKind::Threshold(t) => v <= *t,
            SplitKind::Membership(codes) => codes.contains(&(v.round() as i64)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Leaf {
    Mean(f64),
    Counts(Vec<u32>),
}

impl Leaf {
    /// Mean for regression, majority class (smallest label on ties) for classification.
    pub fn value(&self) -> f64 {
        match self {
            Leaf::Mean(m) => *m,
            Leaf::Counts(c) => argmax_smallest(c) as f64,
        }
    }
}

/// Index of the largest count; the smallest index wins ties.
pub(crate) fn argmax_smallest(counts: &[u32]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Node {
    Internal {
        rule: SplitRule,
        left: usize,
        right: usize,
    },
    Leaf(Leaf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    /// Features drawn (without replacement) at each node.
    pub m_try: usize,
    /// Nodes with fewer samples than this become leaves.
    pub min_node: usize,
    /// Per-feature split kind; empty means all numeric.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub feature_kinds: Vec<FeatureKind>,
}

impl TreeParams {
    pub fn new(m_try: usize, min_node: usize) -> Self {
        Self {
            m_try,
            min_node,
            feature_kinds: Vec::new(),
        }
    }

    fn kind(&self, feature: usize) -> FeatureKind {
        self.feature_kinds.get(feature).copied().unwrap_or_default()
    }
}

/// A binary tree stored as a node arena; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub task: Task,
    pub nodes: Vec<Node>,
}

impl DecisionTree {
    /// Arena index of the leaf `x` lands in.
    pub fn leaf_index(&self, x: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf(_) => return i,
                Node::Internal { rule, left, right } => {
                    i = if rule.goes_left(x) { *left } else { *right };
                }
            }
        }
    }

    pub fn leaf(&self, x: &[f64]) -> &Leaf {
        match &self.nodes[self.leaf_index(x)] {
            Node::Leaf(l) => l,
            Node::Internal { .. } => unreachable!("leaf_index returns leaves"),
        }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.leaf(x).value()
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf(_))).count()
    }

    /// Features used by at least one split.
    pub fn split_features(&self) -> Vec<usize> {
        let mut f: Vec<usize> = self
            .nodes
            .iter()
            .filter_map(|n| match n {
                Node::Internal { rule, .. } => Some(rule.feature),
                Node::Leaf(_) => None,
            })
            .collect();
        f.sort_unstable();
        f.dedup();
        f
    }
}

pub(crate) fn check_inputs(data: &[Vec<f64>], targets: &[f64], task: Task) -> Result<usize> {
    if data.is_empty() {
        return Err(Error::Empty("tree training sample"));
    }
    if data.len() != targets.len() {
        return Err(Error::Arity {
            expected: data.len(),
            got: targets.len(),
        });
    }
    let m = data[0].len();
    if let Some(row) = data.iter().find(|r| r.len() != m) {
        return Err(Error::Arity {
            expected: m,
            got: row.len(),
        });
    }
    if data.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::invalid("training features must be finite"));
    }
    if let Task::Classification { n_classes } = task {
        if n_classes == 0 {
            return Err(Error::invalid("classification needs at least one class"));
        }
        if let Some(bad) = targets
            .iter()
            .find(|&&t| t < 0.0 || t.fract() != 0.0 || t as usize >= n_classes)
        {
            return Err(Error::invalid(format!(
                "class label {bad} outside 0..{n_classes}"
            )));
        }
    } else if targets.iter().any(|t| !t.is_finite()) {
        return Err(Error::invalid("regression targets must be finite"));
    }
    Ok(m)
}

/// Grow one unpruned tree on every row of `data`.
pub fn grow_tree(
    data: &[Vec<f64>],
    targets: &[f64],
    task: Task,
    params: &TreeParams,
    seed: u64,
) -> Result<DecisionTree> {
    let m = check_inputs(data, targets, task)?;
    if params.m_try == 0 || params.m_try > m {
        return Err(Error::invalid(format!(
            "m_try {} must lie in 1..={m}",
            params.m_try
        )));
    }
    let sample: Vec<usize> = (0..data.len()).collect();
    Ok(grow_on_sample(
        data,
        targets,
        sample,
        task,
        params,
        &mut seeding::rng(seed),
    ))
}

/// Node-local sufficient statistics for one side of a candidate split.
#[derive(Clone)]
enum Stats {
    Reg { n: f64, sum: f64, sum_sq: f64 },
    Cls { n: f64, counts: Vec<f64> },
}

impl Stats {
    fn empty(task: Task) -> Self {
        match task {
            Task::Regression => Stats::Reg {
                n: 0.0,
                sum: 0.0,
                sum_sq: 0.0,
            },
            Task::Classification { n_classes } => Stats::Cls {
                n: 0.0,
                counts: vec![0.0; n_classes],
            },
        }
    }

    fn add(&mut self, y: f64, sign: f64) {
        match self {
            Stats::Reg { n, sum, sum_sq } => {
                *n += sign;
                *sum += sign * y;
                *sum_sq += sign * y * y;
            }
            Stats::Cls { n, counts } => {
                *n += sign;
                counts[y as usize] += sign;
            }
        }
    }

    /// Node impurity times node size: SSE for regression, n·Gini for classification.
    fn weighted_impurity(&self) -> f64 {
        match self {
            Stats::Reg { n, sum, sum_sq } => {
                if *n <= 0.0 {
                    0.0
                } else {
                    (sum_sq - sum * sum / n).max(0.0)
                }
            }
            Stats::Cls { n, counts } => {
                if *n <= 0.0 {
                    0.0
                } else {
                    n - counts.iter().map(|c| c * c).sum::<f64>() / n
                }
            }
        }
    }
}

/// Relative tolerance below which a gain is treated as no improvement, and
/// within which two gains count as tied (the earlier candidate is kept).
pub(crate) const GAIN_TOL: f64 = 1e-10;

struct Candidate {
    gain: f64,
    rule: SplitRule,
}

/// Threshold between consecutive distinct values `a < b`. For adjacent
/// doubles the midpoint rounds to `b`, which would send `b` left too, so `a`
/// is used instead.
fn midpoint(a: f64, b: f64) -> f64 {
    let m = 0.5 * (a + b);
    if m < b {
        m
    } else {
        a
    }
}

fn best_numeric(
    data: &[Vec<f64>],
    targets: &[f64],
    sample: &[usize],
    feature: usize,
    task: Task,
    parent_impurity: f64,
) -> Option<Candidate> {
    let mut pairs: Vec<(f64, f64)> = sample
        .iter()
        .map(|&i| (data[i][feature], targets[i]))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut left = Stats::empty(task);
    let mut right = Stats::empty(task);
    for &(_, y) in &pairs {
        right.add(y, 1.0);
    }
    let mut best: Option<Candidate> = None;
    for k in 0..pairs.len() - 1 {
        left.add(pairs[k].1, 1.0);
        right.add(pairs[k].1, -1.0);
        if pairs[k].0 == pairs[k + 1].0 {
            continue;
        }
        let gain = parent_impurity - left.weighted_impurity() - right.weighted_impurity();
        if best
            .as_ref()
            .is_none_or(|b| gain > b.gain + GAIN_TOL * parent_impurity.max(1e-300))
        {
            best = Some(Candidate {
                gain,
                rule: SplitRule {
                    feature,
                    kind: SplitKind::Threshold(midpoint(pairs[k].0, pairs[k + 1].0)),
                },
            });
        }
    }
    best
}

fn best_membership(
    data: &[Vec<f64>],
    targets: &[f64],
    sample: &[usize],
    feature: usize,
    task: Task,
    parent_impurity: f64,
    parent_counts: Option<&[f64]>,
) -> Option<Candidate> {
    let mut groups: std::collections::BTreeMap<i64, Stats> = std::collections::BTreeMap::new();
    for &i in sample {
        groups
            .entry(data[i][feature].round() as i64)
            .or_insert_with(|| Stats::empty(task))
            .add(targets[i], 1.0);
    }
    if groups.len() < 2 {
        return None;
    }
    // Order codes by target mean, or by the share of the node's most frequent
    // class (exact for two classes).
    let focus = parent_counts.map(|c| {
        let ci: Vec<u32> = c.iter().map(|&x| x as u32).collect();
        argmax_smallest(&ci)
    });
    let score = |s: &Stats| match s {
        Stats::Reg { n, sum, .. } => sum / n,
        Stats::Cls { n, counts } => counts[focus.expect("classification")] / n,
    };
    let mut ordered: Vec<(i64, Stats)> = groups.into_iter().collect();
    ordered.sort_by(|a, b| score(&a.1).total_cmp(&score(&b.1)).then(a.0.cmp(&b.0)));

    let mut left = Stats::empty(task);
    let mut right = Stats::empty(task);
    let absorb = |acc: &mut Stats, s: &Stats, sign: f64| match (acc, s) {
        (Stats::Reg { n, sum, sum_sq }, Stats::Reg { n: n2, sum: s2, sum_sq: q2 }) => {
            *n += sign * n2;
            *sum += sign * s2;
            *sum_sq += sign * q2;
        }
        (Stats::Cls { n, counts }, Stats::Cls { n: n2, counts: c2 }) => {
            *n += sign * n2;
            for (a, b) in counts.iter_mut().zip(c2) {
                *a += sign * b;
            }
        }
        _ => unreachable!("stats of one task"),
    };
    for (_, s) in &ordered {
        absorb(&mut right, s, 1.0);
    }
    let mut best: Option<Candidate> = None;
    for k in 0..ordered.len() - 1 {
        absorb(&mut left, &ordered[k].1, 1.0);
        absorb(&mut right, &ordered[k].1, -1.0);
        let gain = parent_impurity - left.weighted_impurity() - right.weighted_impurity();
        if best
            .as_ref()
            .is_none_or(|b| gain > b.gain + GAIN_TOL * parent_impurity.max(1e-300))
        {
            let mut codes: Vec<i64> = ordered[..=k].iter().map(|(c, _)| *c).collect();
            codes.sort_unstable();
            best = Some(Candidate {
                gain,
                rule: SplitRule {
                    feature,
                    kind: SplitKind::Membership(codes),
                },
            });
        }
    }
    best
}

/// Grow a tree on `sample` (row indices, duplicates allowed).
pub(crate) fn grow_on_sample<R: Rng>(
    data: &[Vec<f64>],
    targets: &[f64],
    sample: Vec<usize>,
    task: Task,
    params: &TreeParams,
    rng: &mut R,
) -> DecisionTree {
    let n_features = data[0].len();
    let mut nodes: Vec<Node> = Vec::new();
    // (arena slot, samples)
    let mut stack: Vec<(usize, Vec<usize>)> = Vec::new();
    nodes.push(Node::Leaf(Leaf::Mean(0.0)));
    stack.push((0, sample));

    while let Some((slot, sample)) = stack.pop() {
        let mut stats = Stats::empty(task);
        for &i in &sample {
            stats.add(targets[i], 1.0);
        }
        let leaf = match &stats {
            Stats::Reg { n, sum, .. } => Leaf::Mean(sum / n),
            Stats::Cls { counts, .. } => Leaf::Counts(counts.iter().map(|&c| c as u32).collect()),
        };
        let pure = match &stats {
            Stats::Reg { .. } => {
                let first = targets[sample[0]];
                sample.iter().all(|&i| targets[i] == first)
            }
            Stats::Cls { counts, .. } => counts.iter().filter(|&&c| c > 0.0).count() <= 1,
        };
        if sample.len() < params.min_node || pure {
            nodes[slot] = Node::Leaf(leaf);
            continue;
        }

        let parent = stats.weighted_impurity();
        let parent_counts = match &stats {
            Stats::Cls { counts, .. } => Some(counts.as_slice()),
            Stats::Reg { .. } => None,
        };
        let mut features: Vec<usize> = index::sample(rng, n_features, params.m_try).into_vec();
        features.sort_unstable();
        let mut best: Option<Candidate> = None;
        for &f in &features {
            let cand = match params.kind(f) {
                FeatureKind::Numeric => best_numeric(data, targets, &sample, f, task, parent),
                FeatureKind::Categorical => {
                    best_membership(data, targets, &sample, f, task, parent, parent_counts)
                }
            };
            if let Some(c) = cand {
                if best
                    .as_ref()
                    .is_none_or(|b| c.gain > b.gain + GAIN_TOL * parent.max(1e-300))
                {
                    best = Some(c);
                }
            }
        }
        match best {
            Some(c) if c.gain > GAIN_TOL * parent.max(1e-300) => {
                let (l, r): (Vec<usize>, Vec<usize>) =
                    sample.iter().partition(|&&i| c.rule.goes_left(&data[i]));
                let left = nodes.len();
                nodes.push(Node::Leaf(Leaf::Mean(0.0)));
                let right = nodes.len();
                nodes.push(Node::Leaf(Leaf::Mean(0.0)));
                nodes[slot] = Node::Internal {
                    rule: c.rule,
                    left,
                    right,
                };
                // Right pushed first so the left subtree is grown first.
                stack.push((right, r));
                stack.push((left, l));
            }
            _ => nodes[slot] = Node::Leaf(leaf),
        }
    }
    DecisionTree { task, nodes }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjacent_doubles_still_split_cleanly() {
        let a = 0.3_f64;
        let b = f64::from_bits(a.to_bits() + 1);
        let x = vec![vec![a], vec![a], vec![b], vec![b]];
        let y = vec![0.0, 0.0, 1.0, 1.0];
        let t = grow_tree(&x, &y, Task::Regression, &TreeParams::new(1, 1), 3).unwrap();
        assert_eq!(t.predict(&[a]), 0.0);
        assert_eq!(t.predict(&[b]), 1.0);
    }

    #[test]
    fn constant_targets_give_one_leaf() {
        let x: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, (i * 7 % 5) as f64]).collect();
        let y = vec![3.5; 20];
        let t = grow_tree(&x, &y, Task::Regression, &TreeParams::new(2, 1), 1).unwrap();
        assert_eq!(t.nodes.len(), 1);
        assert_eq!(t.predict(&[100.0, 0.0]), 3.5);
    }

    #[test]
    fn single_feature_identity_is_memorised() {
        let x: Vec<Vec<f64>> = [0.3, 0.1, 0.9, 0.5, 0.7, 0.2, 0.8, 0.4, 0.6, 0.0]
            .iter()
            .map(|&v| vec![v])
            .collect();
        let y: Vec<f64> = x.iter().map(|r| r[0]).collect();
        let t = grow_tree(&x, &y, Task::Regression, &TreeParams::new(1, 1), 7).unwrap();
        for (r, &target) in x.iter().zip(&y) {
            assert_eq!(t.predict(r), target);
        }
        assert_eq!(t.n_leaves(), 10);
    }

    #[test]
    fn min_node_stops_growth() {
        let x: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64]).collect();
        let y: Vec<f64> = (0..6).map(|i| i as f64).collect();
        let t = grow_tree(&x, &y, Task::Regression, &TreeParams::new(1, 7), 0).unwrap();
        assert_eq!(t.nodes.len(), 1);
        assert_eq!(t.predict(&[0.0]), 2.5);
    }

    #[test]
    fn classification_leaf_counts_and_tie_rule() {
        let x = vec![vec![0.0], vec![0.0], vec![0.0], vec![0.0]];
        let y = vec![1.0, 0.0, 1.0, 0.0];
        let t = grow_tree(&x, &y, Task::Classification { n_classes: 2 }, &TreeParams::new(1, 1), 0)
            .unwrap();
        assert_eq!(t.nodes, vec![Node::Leaf(Leaf::Counts(vec![2, 2]))]);
        assert_eq!(t.predict(&[0.0]), 0.0);
    }

    #[test]
    fn membership_split_separates_categories() {
        // Codes {0, 2} have target 1, codes {1, 3} target 0: no single threshold separates them.
        let codes = [0, 1, 2, 3, 0, 1, 2, 3];
        let x: Vec<Vec<f64>> = codes.iter().map(|&c| vec![c as f64]).collect();
        let y: Vec<f64> = codes.iter().map(|&c| if c % 2 == 0 { 1.0 } else { 0.0 }).collect();
        let params = TreeParams {
            feature_kinds: vec![FeatureKind::Categorical],
            ..TreeParams::new(1, 1)
        };
        let t = grow_tree(&x, &y, Task::Regression, &params, 0).unwrap();
        assert_eq!(t.nodes.len(), 3);
        match &t.nodes[0] {
            Node::Internal { rule, .. } => {
                assert_eq!(rule.kind, SplitKind::Membership(vec![1, 3]))
            }
            other => panic!("{other:?}"),
        }
        for (r, &target) in x.iter().zip(&y) {
            assert_eq!(t.predict(r), target);
        }
        let tc = grow_tree(&x, &y, Task::Classification { n_classes: 2 }, &params, 0).unwrap();
        assert_eq!(tc.nodes.len(), 3);
    }

    #[test]
    fn membership_matches_subset_enumeration() {
        // Regression on one categorical feature: the ordered scan must find the
        // best of all 2^(c-1) - 1 bipartitions.
        use rand::Rng;
        let mut rng = seeding::rng(3);
        for _ in 0..30 {
            let n = 24;
            let x: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random_range(0..5) as f64]).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let params = TreeParams {
                feature_kinds: vec![FeatureKind::Categorical],
                ..TreeParams::new(1, n + 1)
            };
            let sse = |idx: &[usize]| -> f64 {
                if idx.is_empty() {
                    return 0.0;
                }
                let m = idx.iter().map(|&i| y[i]).sum::<f64>() / idx.len() as f64;
                idx.iter().map(|&i| (y[i] - m).powi(2)).sum()
            };
            let all: Vec<usize> = (0..n).collect();
            let present: Vec<i64> = {
                let mut c: Vec<i64> = x.iter().map(|r| r[0] as i64).collect();
                c.sort();
                c.dedup();
                c
            };
            let mut best = f64::NEG_INFINITY;
            for mask in 1..(1u32 << present.len()) - 1 {
                let left: Vec<usize> = all
                    .iter()
                    .copied()
                    .filter(|&i| {
                        let pos = present.iter().position(|&c| c == x[i][0] as i64).unwrap();
                        mask >> pos & 1 == 1
                    })
                    .collect();
                let right: Vec<usize> = all.iter().copied().filter(|i| !left.contains(i)).collect();
                best = best.max(sse(&all) - sse(&left) - sse(&right));
            }
            let parent = {
                let mut s = Stats::empty(Task::Regression);
                all.iter().for_each(|&i| s.add(y[i], 1.0));
                s.weighted_impurity()
            };
            let cand = best_membership(&x, &y, &all, 0, Task::Regression, parent, None).unwrap();
            assert!((cand.gain - best).abs() < 1e-9, "{} vs {}", cand.gain, best);
            let _ = params;
        }
    }

    #[test]
    fn input_errors() {
        let p = TreeParams::new(1, 1);
        assert!(grow_tree(&[], &[], Task::Regression, &p, 0).is_err());
        assert!(grow_tree(&[vec![0.0]], &[0.0, 1.0], Task::Regression, &p, 0).is_err());
        assert!(grow_tree(&[vec![0.0]], &[2.0], Task::Classification { n_classes: 2 }, &p, 0).is_err());
        assert!(grow_tree(&[vec![0.0]], &[0.0], Task::Regression, &TreeParams::new(2, 1), 0).is_err());
    }
}
