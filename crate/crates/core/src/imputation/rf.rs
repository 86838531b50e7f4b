use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{decode_missing, encoded_target, write_prediction, ImputedSet, Provenance, Strategy};
use crate::dataset::{encode, Dataset, EncodedMatrix, Schema};
use crate::error::{Error, Result};
use crate::forest::{fit_forest, ForestParams, RandomForest, Task};
use crate::seeding;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfImputerConfig {
    pub forest: ForestParams,
    /// Re-prediction rounds after mean initialisation.
    pub rounds: usize,
    /// Variables never used as forest inputs (HIV when HIV is the
    /// downstream task).
    #[serde(default)]
    pub excluded_inputs: Vec<String>,
}

impl Default for RfImputerConfig {
    fn default() -> Self {
        Self {
            forest: ForestParams::default(),
            rounds: 2,
            excluded_inputs: Vec::new(),
        }
    }
}

impl RfImputerConfig {
    pub fn excluding(mut self, variable: &str) -> Self {
        if !self.excluded_inputs.iter().any(|v| v == variable) {
            self.excluded_inputs.push(variable.to_string());
        }
        self
    }
}

/// The forest that predicts one schema variable from encoded columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableForest {
    pub variable: String,
    /// Encoded column indices fed to the forest, in order.
    pub inputs: Vec<usize>,
    pub forest: RandomForest,
}

impl VariableForest {
    fn features(&self, encoded: &[f64]) -> Vec<f64> {
        self.inputs.iter().map(|&j| encoded[j]).collect()
    }

    pub fn predict(&self, encoded: &[f64]) -> Result<f64> {
        self.forest.predict(&self.features(encoded))
    }
}

/// One forest per schema variable: regression for ordinals on the scaled
/// value, classification for categorical and binary variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfImputer {
    pub format: String,
    pub schema: Schema,
    pub config: RfImputerConfig,
    pub seed: u64,
    /// Training means of the encoded columns, used to initialise gaps.
    pub column_means: Vec<f64>,
    pub forests: Vec<VariableForest>,
}

pub const RF_IMPUTER_FORMAT: &str = "rfimpute.rf-imputer.v1";

pub fn fit_rf_imputer(train: &Dataset, config: &RfImputerConfig, seed: u64) -> Result<RfImputer> {
    if train.is_empty() {
        return Err(Error::Empty("imputer training set"));
    }
    if !train.is_complete() {
        return Err(Error::Incomplete(format!(
            "imputer training set has {} missing cells",
            train.missing_count()
        )));
    }
    let schema = &train.schema;
    let excluded = config
        .excluded_inputs
        .iter()
        .map(|v| schema.require(v))
        .collect::<Result<Vec<_>>>()?;
    let enc = encode(train)?;
    let spans = schema.column_spans();

    let mut forests = Vec::with_capacity(schema.len());
    for (v, spec) in schema.variables.iter().enumerate() {
        let inputs: Vec<usize> = spans
            .iter()
            .enumerate()
            .filter(|(u, _)| *u != v && !excluded.contains(u))
            .flat_map(|(_, s)| s.clone())
            .collect();
        let data: Vec<Vec<f64>> = enc
            .values
            .iter()
            .map(|row| inputs.iter().map(|&j| row[j]).collect())
            .collect();
        let targets: Vec<f64> = train
            .rows
            .iter()
            .map(|r| encoded_target(schema, v, r[v].expect("complete")))
            .collect();
        let task = if spec.is_categorical() {
            Task::Classification {
                n_classes: spec.cardinality(),
            }
        } else {
            Task::Regression
        };
        let forest = fit_forest(
            &data,
            &targets,
            task,
            &config.forest,
            seeding::derive_seed(seed, "rf-imputer", v as u64),
        )?;
        forests.push(VariableForest {
            variable: spec.name.clone(),
            inputs,
            forest,
        });
    }
    Ok(RfImputer {
        format: RF_IMPUTER_FORMAT.to_string(),
        schema: schema.clone(),
        config: config.clone(),
        seed,
        column_means: enc.column_means(),
        forests,
    })
}

impl RfImputer {
    /// Complete an encoded matrix: gaps start at the training means, then
    /// every missing variable of a row is re-predicted `config.rounds` times
    /// from the current values (all variables of a round see the previous
    /// round's values). Rows with every variable missing keep the means.
    pub fn complete_encoded(&self, enc: &EncodedMatrix) -> Result<Vec<Vec<f64>>> {
        if enc.schema != self.schema {
            return Err(Error::invalid("dataset schema differs from the imputer's"));
        }
        let spans = self.schema.column_spans();
        enc.values
            .par_iter()
            .zip(&enc.missing)
            .map(|(values, miss)| {
                let missing_vars: Vec<usize> =
                    (0..spans.len()).filter(|&v| miss[spans[v].start]).collect();
                let mut state: Vec<f64> = values
                    .iter()
                    .zip(miss)
                    .zip(&self.column_means)
                    .map(|((&x, &m), &mu)| if m { mu } else { x })
                    .collect();
                if missing_vars.is_empty() || missing_vars.len() == spans.len() {
                    return Ok(state);
                }
                for _ in 0..self.config.rounds {
                    let predictions = missing_vars
                        .iter()
                        .map(|&v| self.forests[v].predict(&state))
                        .collect::<Result<Vec<f64>>>()?;
                    for (&v, p) in missing_vars.iter().zip(predictions) {
                        write_prediction(&self.schema, v, p, &mut state[spans[v].clone()]);
                    }
                }
                Ok(state)
            })
            .collect()
    }
}

/// Impute every missing cell of `incomplete` with the per-variable forests.
pub fn impute_rf(imputer: &RfImputer, incomplete: &Dataset) -> Result<ImputedSet> {
    let enc = encode(incomplete)?;
    let completed = imputer.complete_encoded(&enc)?;
    let data = decode_missing(incomplete, &completed);
    let mut provenance = Provenance {
        seed: Some(imputer.seed),
        config: serde_json::to_value(&imputer.config)?,
        ..Provenance::default()
    };
    let all_missing: Vec<usize> = (0..incomplete.n_rows())
        .filter(|&r| incomplete.rows[r].iter().all(Option::is_none))
        .collect();
    if !all_missing.is_empty() {
        provenance.notes.push(format!(
            "rows with every variable missing were filled with training means: {all_missing:?}"
        ));
    }
    Ok(ImputedSet::assemble(Strategy::Rf, incomplete, data, provenance))
}
