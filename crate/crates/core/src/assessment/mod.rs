//! How much an imputed set differs from the complete target set: summary
//! statistics, a classifier's confusion counts and a logistic model's
//! predicted probabilities.

mod classify;
mod logistic;
mod stats;

use serde::{Deserialize, Serialize};

pub use classify::{confusion, fit_classifier, metrics, BinaryClassifier, ClassificationMetrics, ConfusionMatrix};
pub use logistic::{
    fit_lr, hiv_design, log_likelihood, log_likelihood_gradient, lr_impact, lr_predict_proba, probabilities,
    LrConfig, LrImpactReport, LrModel,
};
pub use stats::{
    describe, ks_statistic, mahalanobis_multivariate, mahalanobis_paired, mahalanobis_univariate, mean, mse, pearson, qq_points,
    quantile_sorted, stat_impact, stat_impact_masked, variance, StatImpactReport, Summary,
};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::imputation::ImputedSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableImpact {
    pub variable: String,
    pub report: StatImpactReport,
}

/// Statistical impact of one imputed set over a group of variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetStatReport {
    pub label: String,
    pub variables: Vec<VariableImpact>,
    /// MSE over every (record, variable) pair, in original units.
    pub combined_mse: f64,
    /// The same restricted to imputed cells.
    pub combined_mse_imputed: Option<f64>,
    /// Multivariate distance over the variables (covariance form).
    pub mahalanobis: Option<f64>,
}

fn column(d: &Dataset, v: usize) -> Result<Vec<f64>> {
    d.rows
        .iter()
        .map(|r| r[v].map(|x| x as f64).ok_or_else(|| Error::Incomplete("assessment needs complete sets".into())))
        .collect()
}

pub fn stat_impact_set(target: &Dataset, set: &ImputedSet, variables: &[String]) -> Result<SetStatReport> {
    if target.schema != set.data.schema || target.n_rows() != set.data.n_rows() {
        return Err(Error::invalid(format!("set {} is not row-aligned with the target", set.label)));
    }
    if variables.is_empty() {
        return Err(Error::Empty("no variables to assess"));
    }
    let mut reports = Vec::new();
    let (mut all_t, mut all_p, mut imp_t, mut imp_p) = (vec![], vec![], vec![], vec![]);
    let mut t_cols = Vec::new();
    let mut p_cols = Vec::new();
    for name in variables {
        let v = target.schema.require(name)?;
        let t = column(target, v)?;
        let p = column(&set.data, v)?;
        let mask: Vec<bool> = set.imputed.iter().map(|r| r[v]).collect();
        for ((tv, pv), m) in t.iter().zip(&p).zip(&mask) {
            all_t.push(*tv);
            all_p.push(*pv);
            if *m {
                imp_t.push(*tv);
                imp_p.push(*pv);
            }
        }
        reports.push(VariableImpact {
            variable: name.clone(),
            report: stat_impact_masked(&t, &p, Some(&mask))?,
        });
        t_cols.push(t);
        p_cols.push(p);
    }
    let rows = |cols: &[Vec<f64>]| -> Vec<Vec<f64>> {
        (0..target.n_rows()).map(|i| cols.iter().map(|c| c[i]).collect()).collect()
    };
    Ok(SetStatReport {
        label: set.label.clone(),
        variables: reports,
        combined_mse: mse(&all_t, &all_p)?,
        combined_mse_imputed: if imp_t.is_empty() { None } else { Some(mse(&imp_t, &imp_p)?) },
        mahalanobis: mahalanobis_multivariate(&rows(&t_cols), &rows(&p_cols)),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationBlock {
    pub label: String,
    pub confusion: ConfusionMatrix,
    pub metrics: ClassificationMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrBlock {
    pub label: String,
    pub report: LrImpactReport,
}

/// Plain aligned-column table for terminal reports.
#[derive(Debug, Clone, PartialEq)]
pub struct TextTable {
    pub title: String,
    pub header: Vec<String>,
    pub rows: Vec<(String, Vec<String>)>,
}

impl TextTable {
    pub fn new(title: impl Into<String>, header: Vec<String>) -> Self {
        Self {
            title: title.into(),
            header,
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, label: &str, cells: Vec<String>) {
        self.rows.push((label.to_string(), cells));
    }

    pub fn render(&self) -> String {
        let lw = self.rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
        let ncol = self.header.len();
        let widths: Vec<usize> = (0..ncol)
            .map(|c| {
                self.rows
                    .iter()
                    .filter_map(|r| r.1.get(c).map(String::len))
                    .chain([self.header[c].len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let mut out = format!("{}\n", self.title);
        let mut line = format!("{:lw$}", "");
        for (h, w) in self.header.iter().zip(&widths) {
            line.push_str(&format!("  {h:>w$}"));
        }
        out.push_str(line.trim_end());
        out.push('\n');
        for (label, cells) in &self.rows {
            let mut line = format!("{label:lw$}");
            for (c, w) in cells.iter().zip(&widths) {
                line.push_str(&format!("  {c:>w$}"));
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out
    }
}

fn fmt(x: f64) -> String {
    format!("{x:.3}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_string(), |v| format!("{v:.1}"))
}

/// One table per variable, one column per set.
pub fn stats_tables(reports: &[SetStatReport]) -> Vec<TextTable> {
    let Some(first) = reports.first() else { return Vec::new() };
    let header: Vec<String> = reports.iter().map(|r| r.label.clone()).collect();
    let mut tables: Vec<TextTable> = first
        .variables
        .iter()
        .enumerate()
        .map(|(i, vi)| {
            let cols: Vec<&StatImpactReport> = reports.iter().map(|r| &r.variables[i].report).collect();
            let mut t = TextTable::new(format!("Statistical impact: {}", vi.variable), header.clone());
            let summary = |f: fn(&Summary) -> f64| cols.iter().map(|c| fmt(f(&c.summary))).collect();
            t.row("Mean", summary(|s| s.mean));
            t.row("1st Quartile", summary(|s| s.q1));
            t.row("Median", summary(|s| s.median));
            t.row("3rd Quartile", summary(|s| s.q3));
            t.row("Standard Deviation", summary(|s| s.std_dev));
            t.row("Variance", summary(|s| s.variance));
            t.row("MSE", cols.iter().map(|c| fmt(c.mse)).collect());
            t.row("MSE (imputed cells)", cols.iter().map(|c| c.mse_imputed.map_or("n/a".into(), fmt)).collect());
            t.row("Mean Mahalanobis Distance", cols.iter().map(|c| c.mahalanobis.map_or("n/a".into(), fmt)).collect());
            t.row("Mean Paired Distance", cols.iter().map(|c| c.mahalanobis_paired.map_or("n/a".into(), fmt)).collect());
            t.row("Linear Correlation (%)", cols.iter().map(|c| fmt_opt(c.correlation)).collect());
            t.row(
                "Maximum Percentage Deviation (%)",
                cols.iter()
                    .map(|c| format!("{:.1}{}", c.max_pct_deviation, if c.deviation_guarded { "*" } else { "" }))
                    .collect(),
            );
            t
        })
        .collect();
    if first.variables.len() > 1 {
        let mut t = TextTable::new("Statistical impact: combined", header);
        t.row("Combined MSE", reports.iter().map(|r| fmt(r.combined_mse)).collect());
        t.row(
            "Combined MSE (imputed cells)",
            reports.iter().map(|r| r.combined_mse_imputed.map_or("n/a".into(), fmt)).collect(),
        );
        t.row("Mean Mahalanobis Distance", reports.iter().map(|r| r.mahalanobis.map_or("n/a".into(), fmt)).collect());
        tables.push(t);
    }
    tables
}

pub fn classification_table(blocks: &[ClassificationBlock]) -> TextTable {
    let mut t = TextTable::new(
        "Classification impact",
        blocks.iter().map(|b| b.label.clone()).collect(),
    );
    let pct = |f: fn(&ClassificationMetrics) -> f64| blocks.iter().map(|b| format!("{:.1}", 100.0 * f(&b.metrics))).collect();
    t.row("Accuracy (%)", pct(|m| m.accuracy));
    t.row("Sensitivity (%)", pct(|m| m.sensitivity));
    t.row("Precision (%)", pct(|m| m.precision));
    t.row("Specificity (%)", pct(|m| m.specificity));
    t.row("F Measure", blocks.iter().map(|b| format!("{:.2}", b.metrics.f_measure)).collect());
    let count = |f: fn(&ConfusionMatrix) -> u64| blocks.iter().map(|b| f(&b.confusion).to_string()).collect();
    t.row("TN", count(|c| c.tn));
    t.row("FP", count(|c| c.fp));
    t.row("FN", count(|c| c.fn_));
    t.row("TP", count(|c| c.tp));
    t
}

pub fn lr_table(blocks: &[LrBlock]) -> TextTable {
    let mut t = TextTable::new(
        "Logistic regression impact",
        blocks.iter().map(|b| b.label.clone()).collect(),
    );
    let col = |f: fn(&LrImpactReport) -> f64| blocks.iter().map(|b| format!("{:.1}", f(&b.report))).collect();
    t.row("1st Quartile", col(|r| r.q1));
    t.row("Median", col(|r| r.median));
    t.row("3rd Quartile", col(|r| r.q3));
    t.row("Mean", col(|r| r.mean));
    t.row("Variance", col(|r| r.variance));
    t.row("Linear Correlation (%)", blocks.iter().map(|b| fmt_opt(b.report.correlation)).collect());
    t.row("KS Test", blocks.iter().map(|b| format!("{:.3}", b.report.ks)).collect());
    t.row("Mean Squared Error", col(|r| r.mse));
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_synthetic, names, SyntheticParams};

    #[test]
    fn identical_sets_report_zero_deviation() {
        let (d, _) = generate_synthetic(200, 1, &SyntheticParams::default()).unwrap();
        let t = ImputedSet::target(&d).unwrap();
        let vars = vec![names::AGE.to_string(), names::FATHER_AGE.to_string()];
        let r = stat_impact_set(&d, &t, &vars).unwrap();
        assert_eq!(r.combined_mse, 0.0);
        assert_eq!(r.combined_mse_imputed, None);
        assert!(r.mahalanobis.unwrap() > 0.0);
        for v in &r.variables {
            assert_eq!(v.report.mse, 0.0);
            assert_eq!(v.report.max_pct_deviation, 0.0);
            assert!((v.report.correlation.unwrap() - 100.0).abs() < 1e-9);
        }
        let text: String = stats_tables(&[r]).iter().map(TextTable::render).collect();
        assert!(text.contains("Linear Correlation (%)"));
        assert!(text.contains("Combined MSE"));
    }

    #[test]
    fn table_columns_align() {
        let mut t = TextTable::new("x", vec!["A".into(), "BBBB".into()]);
        t.row("long label", vec!["1".into(), "2".into()]);
        t.row("s", vec!["333".into(), "4".into()]);
        let r = t.render();
        let lines: Vec<&str> = r.lines().collect();
        assert_eq!(lines[2].len(), lines[3].len());
    }
}
