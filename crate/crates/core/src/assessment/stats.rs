use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean squared difference between two equal-length vectors.
pub fn mse(targets: &[f64], predictions: &[f64]) -> Result<f64> {
    if targets.is_empty() {
        return Err(Error::Empty("mse needs at least one element"));
    }
    if targets.len() != predictions.len() {
        return Err(Error::Arity {
            expected: targets.len(),
            got: predictions.len(),
        });
    }
    let s: f64 = targets.iter().zip(predictions).map(|(t, p)| (t - p).powi(2)).sum();
    Ok(s / targets.len() as f64)
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample variance (n − 1 denominator); 0 for a single value.
pub fn variance(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() - 1) as f64
}

/// Quantile of an ascending-sorted sample by linear interpolation between
/// order statistics at position `(n − 1)p` (zero-based).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn sorted(x: &[f64]) -> Vec<f64> {
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// Pearson correlation; `None` when either side has zero variance.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    let (ma, mb) = (mean(a), mean(b));
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma).powi(2);
        vb += (y - mb).powi(2);
    }
    if va == 0.0 || vb == 0.0 {
        return None;
    }
    Some((cov / (va * vb).sqrt()).clamp(-1.0, 1.0))
}

/// Two-sample Kolmogorov-Smirnov statistic `sup |F_a − F_b|`.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("ks_statistic needs two nonempty samples"));
    }
    let (sa, sb) = (sorted(a), sorted(b));
    let (na, nb) = (sa.len() as f64, sb.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < sa.len() && j < sb.len() {
        let x = sa[i].min(sb[j]);
        while i < sa.len() && sa[i] <= x {
            i += 1;
        }
        while j < sb.len() && sb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// `k` matched quantile pairs at probabilities `(i − 0.5)/k`.
pub fn qq_points(a: &[f64], b: &[f64], k: usize) -> Result<Vec<(f64, f64)>> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("qq_points needs two nonempty samples"));
    }
    if k < 2 {
        return Err(Error::invalid("qq_points needs k >= 2"));
    }
    let (sa, sb) = (sorted(a), sorted(b));
    Ok((1..=k)
        .map(|i| {
            let p = (i as f64 - 0.5) / k as f64;
            (quantile_sorted(&sa, p), quantile_sorted(&sb, p))
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub std_dev: f64,
    pub variance: f64,
}

pub fn describe(x: &[f64]) -> Result<Summary> {
    if x.is_empty() {
        return Err(Error::Empty("describe needs at least one value"));
    }
    let s = sorted(x);
    let var = variance(x);
    Ok(Summary {
        mean: mean(x),
        q1: quantile_sorted(&s, 0.25),
        median: quantile_sorted(&s, 0.5),
        q3: quantile_sorted(&s, 0.75),
        std_dev: var.sqrt(),
        variance: var,
    })
}

/// Mean over records of `|x − μ_T| / σ_T`, with the target's moments.
/// `None` when the target has zero variance.
pub fn mahalanobis_univariate(target: &[f64], comparison: &[f64]) -> Option<f64> {
    let sd = variance(target).sqrt();
    if sd == 0.0 || comparison.is_empty() {
        return None;
    }
    let mu = mean(target);
    Some(comparison.iter().map(|x| (x - mu).abs() / sd).sum::<f64>() / comparison.len() as f64)
}

/// Mean over records of `|P_i − T_i| / σ_T`: zero when the sets agree
/// record by record. `None` when the target has zero variance.
pub fn mahalanobis_paired(target: &[f64], comparison: &[f64]) -> Option<f64> {
    let sd = variance(target).sqrt();
    if sd == 0.0 || comparison.is_empty() || target.len() != comparison.len() {
        return None;
    }
    Some(target.iter().zip(comparison).map(|(t, p)| (p - t).abs() / sd).sum::<f64>() / comparison.len() as f64)
}

/// Mean over comparison rows of `sqrt((x − μ)ᵀ Σ⁻¹ (x − μ))`, with mean and
/// sample covariance from the target rows. `None` if the covariance is singular.
pub fn mahalanobis_multivariate(target: &[Vec<f64>], comparison: &[Vec<f64>]) -> Option<f64> {
    let n = target.len();
    let d = target.first()?.len();
    if n < 2 || d == 0 || comparison.is_empty() {
        return None;
    }
    let x = DMatrix::from_fn(n, d, |i, j| target[i][j]);
    let mu: DVector<f64> = x.row_mean().transpose();
    let centred = DMatrix::from_fn(n, d, |i, j| x[(i, j)] - mu[j]);
    let cov = centred.transpose() * &centred / (n - 1) as f64;
    let chol = cov.cholesky()?;
    let total: f64 = comparison
        .iter()
        .map(|row| {
            let diff = DVector::from_fn(d, |j, _| row[j] - mu[j]);
            diff.dot(&chol.solve(&diff)).max(0.0).sqrt()
        })
        .sum();
    Some(total / comparison.len() as f64)
}

/// Statistical comparison of one variable's column against the target's.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatImpactReport {
    pub summary: Summary,
    /// MSE over every record.
    pub mse: f64,
    /// MSE over imputed records only, when a mask was given.
    pub mse_imputed: Option<f64>,
    /// Mean distance of comparison values from the target distribution.
    pub mahalanobis: Option<f64>,
    /// Mean record-by-record distance in target standard deviations.
    pub mahalanobis_paired: Option<f64>,
    /// Pearson correlation with the target column, in percent.
    pub correlation: Option<f64>,
    /// `100 · max |P − T| / max(T, 1)`.
    pub max_pct_deviation: f64,
    /// True when some target value below 1 hit the `max(T, 1)` guard.
    pub deviation_guarded: bool,
}

pub fn stat_impact(target: &[f64], comparison: &[f64]) -> Result<StatImpactReport> {
    stat_impact_masked(target, comparison, None)
}

pub fn stat_impact_masked(
    target: &[f64],
    comparison: &[f64],
    imputed: Option<&[bool]>,
) -> Result<StatImpactReport> {
    let overall = mse(target, comparison)?;
    let mse_imputed = match imputed {
        Some(mask) => {
            if mask.len() != target.len() {
                return Err(Error::Arity {
                    expected: target.len(),
                    got: mask.len(),
                });
            }
            let (t, p): (Vec<f64>, Vec<f64>) = target
                .iter()
                .zip(comparison)
                .zip(mask)
                .filter(|(_, &m)| m)
                .map(|((t, p), _)| (*t, *p))
                .unzip();
            if t.is_empty() {
                None
            } else {
                Some(mse(&t, &p)?)
            }
        }
        None => None,
    };
    let mut max_dev: f64 = 0.0;
    let mut guarded = false;
    for (t, p) in target.iter().zip(comparison) {
        if t.abs() < 1.0 {
            guarded = true;
        }
        max_dev = max_dev.max(100.0 * (p - t).abs() / t.max(1.0));
    }
    Ok(StatImpactReport {
        summary: describe(comparison)?,
        mse: overall,
        mse_imputed,
        mahalanobis: mahalanobis_univariate(target, comparison),
        mahalanobis_paired: mahalanobis_paired(target, comparison),
        correlation: pearson(target, comparison).map(|r| 100.0 * r),
        max_pct_deviation: max_dev,
        deviation_guarded: guarded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures() {
        assert_eq!(mse(&[1.0, 2.0], &[2.0, 4.0]).unwrap(), 2.5);
        assert!(mse(&[], &[]).is_err());
        let x: Vec<f64> = (1..=100).map(f64::from).collect();
        let s = describe(&x).unwrap();
        assert!((s.q1 - 25.75).abs() < 1e-9 && (s.median - 50.5).abs() < 1e-9 && (s.q3 - 75.25).abs() < 1e-9);
        assert!((ks_statistic(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(ks_statistic(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), 1.0);
        let r = stat_impact(&[1.0; 4], &[3.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(r.max_pct_deviation, 200.0);
        assert_eq!(r.mahalanobis, None);
        assert_eq!(r.correlation, None);
    }

    #[test]
    fn qq_on_zero_to_nine() {
        let a: Vec<f64> = (0..10).map(f64::from).collect();
        let q = qq_points(&a, &a, 3).unwrap();
        assert_eq!(q, vec![(1.5, 1.5), (4.5, 4.5), (7.5, 7.5)]);
    }

    #[test]
    fn multivariate_reduces_to_univariate_in_one_dimension() {
        let t: Vec<f64> = vec![1.0, 3.0, 4.0, 8.0, 9.0];
        let c = vec![2.0, 5.0, 7.0];
        let rows = |v: &[f64]| v.iter().map(|x| vec![*x]).collect::<Vec<_>>();
        let m = mahalanobis_multivariate(&rows(&t), &rows(&c)).unwrap();
        assert!((m - mahalanobis_univariate(&t, &c).unwrap()).abs() < 1e-12);
        let dup = vec![vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]];
        assert_eq!(mahalanobis_multivariate(&dup, &dup), None);
    }
}
