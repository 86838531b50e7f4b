//! Imputation strategies and the labelled sets they produce.
//!
//! Every strategy fills only missing cells. Observed cells are copied
//! through untouched, and the result is made to satisfy the validity rules
//! (see [`conform`]).

mod aann;
mod accuracy;
mod baseline;
mod hybrid;
mod rf;

use serde::{Deserialize, Serialize};

use crate::dataset::encode::decode_value;
use crate::dataset::{names, Dataset, Schema};
use crate::error::{Error, Result};

pub use aann::{aann_ga_completed, impute_aann_ga, impute_aann_ga_set, impute_aann_ga_within, AannGaOutcome};
pub use accuracy::{default_ranges, fraction_within, range_accuracy, RangeAccuracy, VariableAccuracy};
pub use baseline::{impute_mean, impute_random};
pub use hybrid::{
    apply_correction, fit_correction, impute_aann_ga_rf, impute_rf_aann_ga, impute_rf_aann_ga_detailed, AannGaRfConfig,
    AannGaRfOutcome, CorrectionModel, RfAannGaTrace, RF_BOX_HALF_WIDTH,
};
pub use rf::{fit_rf_imputer, impute_rf, RfImputer, RfImputerConfig, VariableForest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// The complete reference set.
    Target,
    Rf,
    AannGa,
    RfAannGa,
    AannGaRf,
    Random,
    Mean,
}

impl Strategy {
    /// Label prefix, so `Rf` with pattern `2A` is `RF2A`.
    pub fn prefix(self) -> &'static str {
        match self {
            Strategy::Target => "T",
            Strategy::Rf => "RF",
            Strategy::AannGa => "AG",
            Strategy::RfAannGa => "RFAG",
            Strategy::AannGaRf => "AGRF",
            Strategy::Random => "R",
            Strategy::Mean => "M",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "target" => Strategy::Target,
            "rf" => Strategy::Rf,
            "aann-ga" => Strategy::AannGa,
            "rf-aann-ga" => Strategy::RfAannGa,
            "aann-ga-rf" => Strategy::AannGaRf,
            "random" => Strategy::Random,
            "mean" => Strategy::Mean,
            other => return Err(Error::invalid(format!("unknown strategy `{other}`"))),
        })
    }
}

/// Missing-variable patterns of the evaluation sets.
pub const PATTERNS: [(&str, &[&str]); 6] = [
    ("1A", &[names::AGE]),
    ("1B", &[names::EDUCATION]),
    ("1C", &[names::GRAVIDITY]),
    ("2A", &[names::AGE, names::FATHER_AGE]),
    ("3A", &[names::AGE, names::EDUCATION, names::FATHER_AGE]),
    ("4A", &[names::AGE, names::EDUCATION, names::FATHER_AGE, names::GRAVIDITY]),
];

pub fn pattern_variables(code: &str) -> Option<Vec<String>> {
    PATTERNS
        .iter()
        .find(|(c, _)| *c == code)
        .map(|(_, vars)| vars.iter().map(|v| v.to_string()).collect())
}

/// A parsed set label such as `T`, `RF2A` or `R1B`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetLabel {
    pub strategy: Strategy,
    /// Pattern code (`2A`); empty for the target set.
    pub pattern: String,
    pub variables: Vec<String>,
}

impl SetLabel {
    pub fn parse(label: &str) -> Result<Self> {
        if label == "T" {
            return Ok(Self {
                strategy: Strategy::Target,
                pattern: String::new(),
                variables: Vec::new(),
            });
        }
        // Longest prefix first so RFAG is not read as RF + "AG..".
        let mut strategies = [
            Strategy::RfAannGa,
            Strategy::AannGaRf,
            Strategy::Rf,
            Strategy::AannGa,
            Strategy::Random,
            Strategy::Mean,
        ];
        strategies.sort_by_key(|s| std::cmp::Reverse(s.prefix().len()));
        for s in strategies {
            if let Some(code) = label.strip_prefix(s.prefix()) {
                if let Some(variables) = pattern_variables(code) {
                    return Ok(Self {
                        strategy: s,
                        pattern: code.to_string(),
                        variables,
                    });
                }
            }
        }
        Err(Error::invalid(format!("unknown set label `{label}`")))
    }

    pub fn label(&self) -> String {
        format!("{}{}", self.strategy.prefix(), self.pattern)
    }
}

/// Blank every cell of `variables` (the whole column) in a copy of `dataset`.
pub fn blank_variables(dataset: &Dataset, variables: &[String]) -> Result<Dataset> {
    let idx = variables
        .iter()
        .map(|v| dataset.schema.require(v))
        .collect::<Result<Vec<_>>>()?;
    let mut out = dataset.clone();
    for row in &mut out.rows {
        for &i in &idx {
            row[i] = None;
        }
    }
    Ok(out)
}

/// Reference to a model file recorded in provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelRef {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: Option<u64>,
    #[serde(default)]
    pub config: serde_json::Value,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub models: Vec<ModelRef>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// A completed dataset plus what was imputed and how.
#[derive(Debug, Clone, PartialEq)]
pub struct ImputedSet {
    pub label: String,
    pub strategy: Strategy,
    /// Variables that had at least one missing cell.
    pub pattern: Vec<String>,
    pub data: Dataset,
    /// `true` for cells that were missing in the input.
    pub imputed: Vec<Vec<bool>>,
    pub provenance: Provenance,
}

/// JSON sidecar written next to an imputed CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetSidecar {
    pub label: String,
    pub strategy: Strategy,
    pub pattern: Vec<String>,
    pub imputed_cells: usize,
    pub provenance: Provenance,
}

impl ImputedSet {
    pub(crate) fn assemble(
        strategy: Strategy,
        incomplete: &Dataset,
        data: Dataset,
        provenance: Provenance,
    ) -> Self {
        let imputed: Vec<Vec<bool>> = incomplete
            .rows
            .iter()
            .map(|r| r.iter().map(Option::is_none).collect())
            .collect();
        let pattern = incomplete
            .schema
            .variables
            .iter()
            .enumerate()
            .filter(|(j, _)| imputed.iter().any(|r| r[*j]))
            .map(|(_, v)| v.name.clone())
            .collect();
        Self {
            label: strategy.prefix().to_string(),
            strategy,
            pattern,
            data,
            imputed,
            provenance,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// The complete set itself, labelled `T`.
    pub fn target(data: &Dataset) -> Result<Self> {
        if !data.is_complete() {
            return Err(Error::Incomplete("the target set must be complete".into()));
        }
        Ok(Self::assemble(Strategy::Target, data, data.clone(), Provenance::default()))
    }

    pub fn imputed_count(&self) -> usize {
        self.imputed.iter().flatten().filter(|&&m| m).count()
    }

    pub fn sidecar(&self) -> SetSidecar {
        SetSidecar {
            label: self.label.clone(),
            strategy: self.strategy,
            pattern: self.pattern.clone(),
            imputed_cells: self.imputed_count(),
            provenance: self.provenance.clone(),
        }
    }
}

/// Fill the missing cells of `incomplete` by decoding the matching entries of
/// a completed encoded matrix, then [`conform`] them.
pub(crate) fn decode_missing(incomplete: &Dataset, completed: &[Vec<f64>]) -> Dataset {
    let schema = &incomplete.schema;
    let spans = schema.column_spans();
    let rows = incomplete
        .rows
        .iter()
        .zip(completed)
        .map(|(row, enc)| {
            let mut out: Vec<Option<i64>> = row
                .iter()
                .zip(schema.variables.iter().zip(&spans))
                .map(|(cell, (spec, span))| {
                    cell.or_else(|| Some(decode_value(spec, &enc[span.clone()])))
                })
                .collect();
            let imputed: Vec<bool> = row.iter().map(Option::is_none).collect();
            conform(&mut out, &imputed, schema);
            out
        })
        .collect();
    Dataset {
        schema: schema.clone(),
        rows,
    }
}

/// Nudge imputed cells so the record passes the validity rules: an imputed
/// father's age is at least 13, and an imputed gravidity (or parity, when
/// only parity was imputed) is moved to restore gravidity ≥ parity.
/// Observed cells are never changed.
pub fn conform(row: &mut [Option<i64>], imputed: &[bool], schema: &Schema) {
    if let Some(f) = schema.index_of(names::FATHER_AGE) {
        if imputed[f] {
            row[f] = row[f].map(|v| v.max(13));
        }
    }
    if let (Some(g), Some(p)) = (schema.index_of(names::GRAVIDITY), schema.index_of(names::PARITY)) {
        if let (Some(gv), Some(pv)) = (row[g], row[p]) {
            if gv < pv {
                if imputed[g] {
                    row[g] = Some(pv.min(schema.variables[g].upper));
                    if imputed[p] {
                        row[p] = Some(pv.min(row[g].unwrap_or(pv)));
                    }
                } else if imputed[p] {
                    row[p] = Some(gv);
                }
            }
        }
    }
}

/// Encoded-space target for variable `var`: the scaled value for ordinals,
/// the class index for categorical and binary variables.
pub(crate) fn encoded_target(schema: &Schema, var: usize, value: i64) -> f64 {
    let spec = &schema.variables[var];
    if spec.is_categorical() {
        (value - spec.lower) as f64
    } else {
        let span = (spec.upper - spec.lower) as f64;
        if span == 0.0 {
            0.0
        } else {
            (value - spec.lower) as f64 / span
        }
    }
}

/// Write a prediction produced for [`encoded_target`] back into the encoded
/// columns of `var`.
pub(crate) fn write_prediction(schema: &Schema, var: usize, prediction: f64, out: &mut [f64]) {
    let spec = &schema.variables[var];
    if spec.is_categorical() {
        let class = (prediction.round() as i64).clamp(0, spec.upper - spec.lower);
        crate::dataset::encode::encode_value(spec, spec.lower + class, out);
    } else {
        out[0] = prediction.clamp(0.0, 1.0);
    }
}
