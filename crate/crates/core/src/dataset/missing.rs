use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::seeding;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Mechanism {
    Mcar,
    Mar,
}

/// Which cells to blank and how.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissingnessPlan {
    pub mechanism: Mechanism,
    pub target_variables: Vec<String>,
    pub rate: f64,
    /// Observed variable whose rank drives removal under MAR.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mar_driver: Option<String>,
}

impl MissingnessPlan {
    pub fn mcar(targets: &[&str], rate: f64) -> Self {
        Self {
            mechanism: Mechanism::Mcar,
            target_variables: targets.iter().map(|s| s.to_string()).collect(),
            rate,
            mar_driver: None,
        }
    }

    pub fn mar(targets: &[&str], rate: f64, driver: &str) -> Self {
        Self {
            mechanism: Mechanism::Mar,
            target_variables: targets.iter().map(|s| s.to_string()).collect(),
            rate,
            mar_driver: Some(driver.to_string()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.target_variables.is_empty() {
            return Err(Error::invalid("missingness plan has no target variables"));
        }
        if !(self.rate > 0.0 && self.rate < 1.0) {
            return Err(Error::invalid(format!(
                "missingness rate {} is outside (0, 1)",
                self.rate
            )));
        }
        match (&self.mechanism, &self.mar_driver) {
            (Mechanism::Mar, None) => Err(Error::invalid("MAR plan needs a driver variable")),
            (Mechanism::Mar, Some(d)) if self.target_variables.contains(d) => Err(
                Error::invalid(format!("MAR driver `{d}` cannot also be a target")),
            ),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InjectionReport {
    /// Observed target cells eligible for removal.
    pub candidates: usize,
    pub removed: usize,
}

/// Average ranks (1-based, ties share the mean rank) of the observed values.
fn average_ranks(values: &[Option<i64>]) -> Vec<Option<f64>> {
    let mut order: Vec<usize> = (0..values.len()).filter(|&i| values[i].is_some()).collect();
    order.sort_by_key(|&i| values[i]);
    let mut ranks = vec![None; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let mean_rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = Some(mean_rank);
        }
        i = j + 1;
    }
    ranks
}

/// Blank observed target cells at random.
///
/// Under MCAR each target cell is removed with probability `rate`. Under MAR
/// the probability is `2·rate·(rank − ½)/n` of the driver's value in its
/// column (capped at 1), so the expected rate stays `rate` while higher driver
/// values lose more cells. Rows whose driver is itself missing use `rate`.
pub fn inject_missing(
    dataset: &Dataset,
    plan: &MissingnessPlan,
    seed: u64,
) -> Result<(Dataset, InjectionReport)> {
    plan.validate()?;
    let targets = plan
        .target_variables
        .iter()
        .map(|n| dataset.schema.require(n))
        .collect::<Result<Vec<_>>>()?;
    let row_scale: Vec<f64> = match plan.mechanism {
        Mechanism::Mcar => vec![1.0; dataset.n_rows()],
        Mechanism::Mar => {
            let driver = dataset
                .schema
                .require(plan.mar_driver.as_deref().expect("validated"))?;
            let column = dataset.column(driver);
            let observed = column.iter().filter(|c| c.is_some()).count().max(1) as f64;
            average_ranks(&column)
                .into_iter()
                .map(|r| r.map_or(1.0, |r| 2.0 * (r - 0.5) / observed))
                .collect()
        }
    };

    let mut rng = seeding::rng(seed);
    let mut out = dataset.clone();
    let mut report = InjectionReport {
        candidates: 0,
        removed: 0,
    };
    for (row, scale) in out.rows.iter_mut().zip(row_scale) {
        let p = (plan.rate * scale).min(1.0);
        for &v in &targets {
            if row[v].is_none() {
                continue;
            }
            report.candidates += 1;
            if rng.random::<f64>() < p {
                row[v] = None;
                report.removed += 1;
            }
        }
    }
    Ok((out, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_synthetic, SyntheticParams};

    fn data(n: usize) -> Dataset {
        generate_synthetic(n, 5, &SyntheticParams::default()).unwrap().0
    }

    #[test]
    fn tiny_rate_changes_nothing() {
        let d = data(200);
        let (out, report) = inject_missing(&d, &MissingnessPlan::mcar(&["Age"], 1e-12), 1).unwrap();
        assert_eq!(out, d);
        assert_eq!(report.removed, 0);
        assert_eq!(report.candidates, 200);
    }

    #[test]
    fn mcar_count_is_binomial() {
        let d = data(2500);
        let plan = MissingnessPlan::mcar(&["Age", "Edu", "Gra", "FathAge"], 0.1);
        for seed in 0..10 {
            let (out, report) = inject_missing(&d, &plan, seed).unwrap();
            assert_eq!(report.candidates, 10_000);
            assert_eq!(report.removed, out.missing_count());
            let dev = (report.removed as f64 - 1000.0).abs();
            assert!(dev <= 3.0 * 900f64.sqrt(), "seed {seed}: removed {}", report.removed);
        }
    }

    #[test]
    fn same_seed_same_mask_and_targets_only() {
        let d = data(300);
        let plan = MissingnessPlan::mcar(&["Edu"], 0.3);
        let (a, _) = inject_missing(&d, &plan, 9).unwrap();
        let (b, _) = inject_missing(&d, &plan, 9).unwrap();
        assert_eq!(a, b);
        for (ra, rd) in a.rows.iter().zip(&d.rows) {
            for v in 0..9 {
                if v != 2 {
                    assert_eq!(ra[v], rd[v]);
                }
            }
        }
    }

    #[test]
    fn mar_removes_more_at_high_driver_values() {
        let d = data(4000);
        let plan = MissingnessPlan::mar(&["Edu"], 0.2, "Age");
        let (out, report) = inject_missing(&d, &plan, 3).unwrap();
        let rate = report.removed as f64 / report.candidates as f64;
        assert!((rate - 0.2).abs() < 0.03, "rate {rate}");
        let mut ages: Vec<i64> = d.rows.iter().map(|r| r[1].unwrap()).collect();
        ages.sort();
        let median = ages[ages.len() / 2];
        let (mut lo, mut hi) = (0, 0);
        for (o, r) in out.rows.iter().zip(&d.rows) {
            if o[2].is_none() {
                if r[1].unwrap() > median {
                    hi += 1;
                } else {
                    lo += 1;
                }
            }
        }
        assert!(hi > 2 * lo, "hi {hi} lo {lo}");
    }

    #[test]
    fn plan_validation() {
        let d = data(10);
        assert!(inject_missing(&d, &MissingnessPlan::mcar(&["Age"], 0.0), 0).is_err());
        assert!(inject_missing(&d, &MissingnessPlan::mcar(&["Age"], 1.0), 0).is_err());
        assert!(inject_missing(&d, &MissingnessPlan::mcar(&[], 0.1), 0).is_err());
        assert!(inject_missing(&d, &MissingnessPlan::mar(&["Age"], 0.1, "Age"), 0).is_err());
        assert!(inject_missing(&d, &MissingnessPlan::mcar(&["Weight"], 0.1), 0).is_err());
    }

    #[test]
    fn ranks_average_ties() {
        let r = average_ranks(&[Some(5), None, Some(1), Some(5)]);
        assert_eq!(r, vec![Some(2.5), None, Some(1.0), Some(2.5)]);
    }
}
