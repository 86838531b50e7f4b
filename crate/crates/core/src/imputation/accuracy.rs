use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ImputedSet;
use crate::dataset::{names, Dataset};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableAccuracy {
    pub variable: String,
    pub imputed_cells: usize,
    /// `(r, fraction of imputed cells with |imputed − true| ≤ r)`.
    pub within: Vec<(i64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeAccuracy {
    pub label: String,
    pub variables: Vec<VariableAccuracy>,
}

/// Tolerances used for the ordinal variables.
pub fn default_ranges() -> BTreeMap<String, Vec<i64>> {
    let wide = vec![1, 2, 4, 6, 10];
    let narrow = vec![0, 1, 2, 3, 5];
    [
        (names::AGE, wide.clone()),
        (names::FATHER_AGE, wide),
        (names::EDUCATION, narrow.clone()),
        (names::GRAVIDITY, narrow.clone()),
        (names::PARITY, narrow),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

/// Fraction of pairs within `r` of each other (0 for empty input).
pub fn fraction_within(truth: &[i64], imputed: &[i64], r: i64) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    let hits = truth.iter().zip(imputed).filter(|(t, p)| (*t - *p).abs() <= r).count();
    hits as f64 / truth.len() as f64
}

/// Per-variable hit rates over the imputed cells of variables named in
/// `ranges` that the set actually imputed.
pub fn range_accuracy(
    set: &ImputedSet,
    truth: &Dataset,
    ranges: &BTreeMap<String, Vec<i64>>,
) -> Result<RangeAccuracy> {
    if truth.n_rows() != set.data.n_rows() || truth.schema != set.data.schema {
        return Err(Error::invalid("truth and imputed set differ in shape"));
    }
    let mut variables = Vec::new();
    for (v, spec) in set.data.schema.variables.iter().enumerate() {
        let Some(rs) = ranges.get(&spec.name) else { continue };
        let mut t = Vec::new();
        let mut p = Vec::new();
        for (r, mask) in set.imputed.iter().enumerate() {
            if mask[v] {
                let tv = truth.rows[r][v].ok_or_else(|| {
                    Error::Incomplete(format!("truth lacks {} in row {r}", spec.name))
                })?;
                t.push(tv);
                p.push(set.data.rows[r][v].expect("imputed sets are complete"));
            }
        }
        if t.is_empty() {
            continue;
        }
        variables.push(VariableAccuracy {
            variable: spec.name.clone(),
            imputed_cells: t.len(),
            within: rs.iter().map(|&r| (r, fraction_within(&t, &p, r))).collect(),
        });
    }
    Ok(RangeAccuracy {
        label: set.label.clone(),
        variables,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Schema;
    use crate::imputation::{blank_variables, impute_mean};

    #[test]
    fn hand_count() {
        assert!((fraction_within(&[10, 10, 10], &[10, 12, 20], 2) - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(fraction_within(&[], &[], 1), 0.0);
    }

    #[test]
    fn exact_imputation_scores_one_everywhere_and_fractions_grow() {
        let rows = (0..20).map(|i| vec![1 + i % 9, 20 + i, 5, 2, 1, 30 + i, 0, 0, 0]).collect();
        let d = Dataset::from_complete(Schema::survey(), rows).unwrap();
        let holed = blank_variables(&d, &[names::AGE.into()]).unwrap();
        let mut set = impute_mean(&d, &holed).unwrap();
        let acc = range_accuracy(&set, &d, &default_ranges()).unwrap();
        let fr: Vec<f64> = acc.variables[0].within.iter().map(|w| w.1).collect();
        assert!(fr.windows(2).all(|w| w[0] <= w[1]));
        set.data = d.clone();
        let perfect = range_accuracy(&set, &d, &default_ranges()).unwrap();
        assert!(perfect.variables[0].within.iter().all(|w| w.1 == 1.0));
    }
}
