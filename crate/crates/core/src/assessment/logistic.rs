use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::stats::{describe, ks_statistic, mse, pearson};
use crate::dataset::{encode, names, Dataset};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrConfig {
    pub max_iterations: usize,
    /// Stop once the log-likelihood gradient norm falls below this.
    pub gradient_tolerance: f64,
    /// Coefficients are capped at this magnitude; reaching it signals separation.
    pub coefficient_cap: f64,
}

impl Default for LrConfig {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            gradient_tolerance: 1e-8,
            coefficient_cap: 30.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrModel {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn score(beta: &[f64], x: &[f64]) -> f64 {
    beta[0] + beta[1..].iter().zip(x).map(|(b, v)| b * v).sum::<f64>()
}

/// Log-likelihood of `beta = [intercept, coefficients…]`.
pub fn log_likelihood(beta: &[f64], features: &[Vec<f64>], labels: &[f64]) -> f64 {
    features
        .iter()
        .zip(labels)
        .map(|(x, &y)| {
            let z = score(beta, x);
            // log σ(z) = −log(1 + e^{−z}), written to avoid overflow.
            let log1pexp = |t: f64| if t > 0.0 { t + (-t).exp().ln_1p() } else { t.exp().ln_1p() };
            -(y * log1pexp(-z) + (1.0 - y) * log1pexp(z))
        })
        .sum()
}

/// Gradient of [`log_likelihood`] with respect to `beta`.
pub fn log_likelihood_gradient(beta: &[f64], features: &[Vec<f64>], labels: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; beta.len()];
    for (x, &y) in features.iter().zip(labels) {
        let r = y - logistic(score(beta, x));
        g[0] += r;
        for (gj, xj) in g[1..].iter_mut().zip(x) {
            *gj += r * xj;
        }
    }
    g
}

/// Maximum-likelihood logistic regression by Newton (IRLS) steps.
pub fn fit_lr(features: &[Vec<f64>], labels: &[f64], config: &LrConfig) -> Result<LrModel> {
    let n = features.len();
    if n == 0 {
        return Err(Error::Empty("logistic regression needs rows"));
    }
    let d = features[0].len();
    if features.iter().any(|r| r.len() != d) || labels.len() != n {
        return Err(Error::Arity {
            expected: n,
            got: labels.len(),
        });
    }
    if labels.iter().any(|&y| y != 0.0 && y != 1.0) {
        return Err(Error::invalid("logistic labels must be 0 or 1"));
    }
    if n <= d + 1 {
        return Err(Error::invalid("logistic regression needs more rows than parameters"));
    }
    let p = d + 1;
    let x = DMatrix::from_fn(n, p, |i, j| if j == 0 { 1.0 } else { features[i][j - 1] });
    let mut beta = vec![0.0; p];
    let mut warnings = Vec::new();
    let mut iterations = 0;
    let mut grad = log_likelihood_gradient(&beta, features, labels);
    let norm = |g: &[f64]| g.iter().map(|v| v * v).sum::<f64>().sqrt();
    while norm(&grad) >= config.gradient_tolerance && iterations < config.max_iterations {
        iterations += 1;
        let w: Vec<f64> = features
            .iter()
            .map(|r| {
                let m = logistic(score(&beta, r));
                (m * (1.0 - m)).max(1e-12)
            })
            .collect();
        let xw = DMatrix::from_fn(n, p, |i, j| x[(i, j)] * w[i]);
        let mut h = x.transpose() * xw;
        let g = DVector::from_column_slice(&grad);
        let step = match h.clone().cholesky() {
            Some(c) => c.solve(&g),
            None => {
                // Rank-deficient design: a small ridge keeps the step defined.
                for k in 0..p {
                    h[(k, k)] += 1e-8;
                }
                h.cholesky()
                    .ok_or_else(|| Error::invalid("logistic Hessian is not positive definite"))?
                    .solve(&g)
            }
        };
        let mut capped = false;
        for (b, s) in beta.iter_mut().zip(step.iter()) {
            *b += s;
            if b.abs() > config.coefficient_cap {
                *b = b.signum() * config.coefficient_cap;
                capped = true;
            }
        }
        grad = log_likelihood_gradient(&beta, features, labels);
        if capped {
            warnings.push(format!(
                "coefficients reached the cap {} (classes look separable)",
                config.coefficient_cap
            ));
            break;
        }
    }
    let gradient_norm = norm(&grad);
    Ok(LrModel {
        intercept: beta[0],
        coefficients: beta[1..].to_vec(),
        iterations,
        gradient_norm,
        converged: gradient_norm < config.gradient_tolerance,
        warnings,
    })
}

pub fn lr_predict_proba(model: &LrModel, x: &[f64]) -> Result<f64> {
    if x.len() != model.coefficients.len() {
        return Err(Error::Arity {
            expected: model.coefficients.len(),
            got: x.len(),
        });
    }
    let z = model.intercept + model.coefficients.iter().zip(x).map(|(b, v)| b * v).sum::<f64>();
    Ok(logistic(z))
}

/// The 13 encoded non-HIV columns of each row, and the HIV labels.
pub fn hiv_design(data: &Dataset) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let v = data.schema.require(names::HIV)?;
    if !data.is_complete() {
        return Err(Error::Incomplete("logistic design needs complete data".into()));
    }
    let span = data.schema.column_spans()[v].clone();
    let enc = encode(data)?;
    let x = enc
        .values
        .iter()
        .map(|r| {
            r.iter()
                .enumerate()
                .filter(|(j, _)| !span.contains(j))
                .map(|(_, &x)| x)
                .collect()
        })
        .collect();
    let y = data.rows.iter().map(|r| r[v].expect("complete") as f64).collect();
    Ok((x, y))
}

/// Table-style comparison of predicted probabilities (in percent).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrImpactReport {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub mean: f64,
    pub variance: f64,
    /// Correlation with the target set's probabilities, in percent.
    pub correlation: Option<f64>,
    pub ks: f64,
    pub mse: f64,
}

pub fn probabilities(model: &LrModel, features: &[Vec<f64>]) -> Result<Vec<f64>> {
    features
        .iter()
        .map(|x| lr_predict_proba(model, x).map(|p| 100.0 * p))
        .collect()
}

/// Compare the model's probabilities on `imputed` rows against those on the
/// same rows of `target`.
pub fn lr_impact(model: &LrModel, target: &[Vec<f64>], imputed: &[Vec<f64>]) -> Result<LrImpactReport> {
    if target.len() != imputed.len() {
        return Err(Error::Arity {
            expected: target.len(),
            got: imputed.len(),
        });
    }
    let pt = probabilities(model, target)?;
    let pi = probabilities(model, imputed)?;
    let s = describe(&pi)?;
    Ok(LrImpactReport {
        q1: s.q1,
        median: s.median,
        q3: s.q3,
        mean: s.mean,
        variance: s.variance,
        correlation: pearson(&pt, &pi).map(|r| 100.0 * r),
        ks: ks_statistic(&pt, &pi)?,
        mse: mse(&pt, &pi)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intercept_only_model_matches_the_base_rate() {
        let x: Vec<Vec<f64>> = vec![vec![]; 100];
        let y: Vec<f64> = (0..100).map(|i| f64::from(i < 30)).collect();
        let m = fit_lr(&x, &y, &LrConfig::default()).unwrap();
        assert!(m.converged);
        assert!((m.intercept - (0.3f64 / 0.7).ln()).abs() < 1e-9);
        assert!((lr_predict_proba(&m, &[]).unwrap() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn hand_probabilities() {
        let m = LrModel {
            intercept: 3f64.ln(),
            coefficients: vec![],
            iterations: 0,
            gradient_norm: 0.0,
            converged: true,
            warnings: vec![],
        };
        assert!((lr_predict_proba(&m, &[]).unwrap() - 0.75).abs() < 1e-15);
        let z = LrModel { intercept: 0.0, coefficients: vec![0.0, 0.0], ..m };
        assert_eq!(lr_predict_proba(&z, &[4.0, -2.0]).unwrap(), 0.5);
        assert!(lr_predict_proba(&z, &[1.0]).is_err());
    }

    #[test]
    fn separation_is_capped_with_a_warning() {
        let x: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64]).collect();
        let y: Vec<f64> = (0..20).map(|i| f64::from(i >= 10)).collect();
        let m = fit_lr(&x, &y, &LrConfig::default()).unwrap();
        assert!(!m.warnings.is_empty());
        assert!(m.coefficients.iter().chain([&m.intercept]).all(|b| b.is_finite() && b.abs() <= 30.0));
    }

    #[test]
    fn identical_inputs_have_no_impact() {
        let m = LrModel {
            intercept: -1.0,
            coefficients: vec![2.0],
            iterations: 0,
            gradient_norm: 0.0,
            converged: true,
            warnings: vec![],
        };
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64 / 10.0]).collect();
        let r = lr_impact(&m, &x, &x).unwrap();
        assert_eq!((r.ks, r.mse), (0.0, 0.0));
        assert!((r.correlation.unwrap() - 100.0).abs() < 1e-9);
    }
}
