use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::aann::{aann_ga_completed, impute_aann_ga_within, pick};
use super::rf::{RfImputer, VariableForest};
use super::{decode_missing, encoded_target, write_prediction, ImputedSet, Provenance, Strategy};
use crate::autoencoder::{AutoencoderConfig, AutoencoderNetwork, TrainTrace};
use crate::dataset::{encode, inject_missing, names, Dataset, MissingnessPlan, Partition, Schema};
use crate::error::{Error, Result};
use crate::forest::{fit_forest, ForestParams, Task};
use crate::optimizer::{GaConfig, SearchBox};
use crate::seeding::derive_seed;

/// Half-width of the GA box centred on each RF prediction.
pub const RF_BOX_HALF_WIDTH: f64 = 0.05;

/// Encoded intermediate values of an RF-AANN-GA run.
#[derive(Debug, Clone, PartialEq)]
pub struct RfAannGaTrace {
    /// RF-completed encoded rows (the box centres).
    pub rf: Vec<Vec<f64>>,
    /// GA-refined encoded rows.
    pub completed: Vec<Vec<f64>>,
    pub missing: Vec<Vec<bool>>,
}

/// RF predictions narrow the AANN-GA search: each missing gene is searched
/// over `[max(0, p − 0.05), min(1, p + 0.05)]` around its RF value `p`,
/// with the RF record itself seeded into the first generation.
pub fn impute_rf_aann_ga(
    rf: &RfImputer,
    network: &AutoencoderNetwork,
    ga: &GaConfig,
    incomplete: &Dataset,
    seed: u64,
) -> Result<ImputedSet> {
    impute_rf_aann_ga_detailed(rf, network, ga, incomplete, seed).map(|(set, _)| set)
}

pub fn impute_rf_aann_ga_detailed(
    rf: &RfImputer,
    network: &AutoencoderNetwork,
    ga: &GaConfig,
    incomplete: &Dataset,
    seed: u64,
) -> Result<(ImputedSet, RfAannGaTrace)> {
    let enc = encode(incomplete)?;
    let rf_rows = rf.complete_encoded(&enc)?;
    let completed = enc
        .values
        .par_iter()
        .zip(&enc.missing)
        .zip(&rf_rows)
        .enumerate()
        .map(|(r, ((values, miss), centre))| {
            let p = pick(centre, miss);
            let lower = p.iter().map(|v| (v - RF_BOX_HALF_WIDTH).max(0.0)).collect();
            let upper = p.iter().map(|v| (v + RF_BOX_HALF_WIDTH).min(1.0)).collect();
            let search_box = SearchBox::new(lower, upper)?;
            let cfg = ga.with_seed(derive_seed(seed, "rf-aann-ga", r as u64));
            match impute_aann_ga_within(network, &cfg, values, miss, &search_box, &[p]) {
                Err(Error::AllMissing(_)) => Err(Error::AllMissing(r)),
                other => other.map(|o| o.record),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let provenance = Provenance {
        seed: Some(seed),
        config: serde_json::json!({ "ga": ga, "rf": rf.config, "box_half_width": RF_BOX_HALF_WIDTH }),
        ..Provenance::default()
    };
    let set = ImputedSet::assemble(
        Strategy::RfAannGa,
        incomplete,
        decode_missing(incomplete, &completed),
        provenance,
    );
    Ok((
        set,
        RfAannGaTrace {
            rf: rf_rows,
            completed,
            missing: enc.missing,
        },
    ))
}

/// Forests that learn to correct AANN-GA output, one per variable that was
/// missing in the correction training set. Features are the AANN-GA
/// completed encoded record followed by one missing flag per variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionModel {
    pub format: String,
    pub schema: Schema,
    pub forests: Vec<Option<VariableForest>>,
}

pub const CORRECTION_FORMAT: &str = "rfimpute.correction.v1";

fn augmented(schema: &Schema, completed: &[f64], row: &[Option<i64>]) -> Vec<f64> {
    debug_assert_eq!(row.len(), schema.len());
    completed
        .iter()
        .copied()
        .chain(row.iter().map(|c| if c.is_none() { 1.0 } else { 0.0 }))
        .collect()
}

/// Train the correction forests on a set whose truth is known.
///
/// `completed` is the AANN-GA output for `incomplete`, row-aligned with
/// `truth`. Variable `v`'s forest trains on the rows where `v` was missing,
/// with the true value as target.
pub fn fit_correction(
    truth: &Dataset,
    incomplete: &Dataset,
    completed: &[Vec<f64>],
    forest: &ForestParams,
    seed: u64,
) -> Result<CorrectionModel> {
    let schema = &truth.schema;
    if incomplete.schema != *schema
        || incomplete.n_rows() != truth.n_rows()
        || completed.len() != truth.n_rows()
    {
        return Err(Error::invalid("correction inputs are not row-aligned"));
    }
    let width = schema.encoded_width() + schema.len();
    let mut forests = Vec::with_capacity(schema.len());
    for (v, spec) in schema.variables.iter().enumerate() {
        let rows: Vec<usize> = (0..truth.n_rows())
            .filter(|&r| incomplete.rows[r][v].is_none())
            .collect();
        if rows.is_empty() {
            forests.push(None);
            continue;
        }
        let data: Vec<Vec<f64>> = rows
            .iter()
            .map(|&r| augmented(schema, &completed[r], &incomplete.rows[r]))
            .collect();
        let targets = rows
            .iter()
            .map(|&r| {
                let t = truth.rows[r][v]
                    .ok_or_else(|| Error::Incomplete(format!("truth lacks {} in row {r}", spec.name)))?;
                Ok(encoded_target(schema, v, t))
            })
            .collect::<Result<Vec<f64>>>()?;
        let task = if spec.is_categorical() {
            Task::Classification {
                n_classes: spec.cardinality(),
            }
        } else {
            Task::Regression
        };
        let fitted = fit_forest(&data, &targets, task, forest, derive_seed(seed, "correction", v as u64))?;
        forests.push(Some(VariableForest {
            variable: spec.name.clone(),
            inputs: (0..width).collect(),
            forest: fitted,
        }));
    }
    Ok(CorrectionModel {
        format: CORRECTION_FORMAT.to_string(),
        schema: schema.clone(),
        forests,
    })
}

impl CorrectionModel {
    /// Replace the AANN-GA value of each missing variable by its forest's
    /// prediction. Variables without a forest keep the AANN-GA value.
    pub fn apply(&self, incomplete: &Dataset, completed: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        if incomplete.schema != self.schema || completed.len() != incomplete.n_rows() {
            return Err(Error::invalid("correction inputs are not row-aligned"));
        }
        let spans = self.schema.column_spans();
        incomplete
            .rows
            .par_iter()
            .zip(completed)
            .map(|(row, enc)| {
                let features = augmented(&self.schema, enc, row);
                let mut out = enc.clone();
                for (v, cell) in row.iter().enumerate() {
                    if let (None, Some(f)) = (cell, &self.forests[v]) {
                        let p = f.predict(&features)?;
                        write_prediction(&self.schema, v, p, &mut out[spans[v].clone()]);
                    }
                }
                Ok(out)
            })
            .collect()
    }
}

/// AANN-GA followed by a previously fitted correction model.
pub fn apply_correction(
    network: &AutoencoderNetwork,
    ga: &GaConfig,
    correction: &CorrectionModel,
    incomplete: &Dataset,
    column_means: &[f64],
    seed: u64,
) -> Result<ImputedSet> {
    let completed = aann_ga_completed(network, ga, incomplete, column_means, seed)?;
    let fixed = correction.apply(incomplete, &completed)?;
    let provenance = Provenance {
        seed: Some(seed),
        config: serde_json::to_value(ga)?,
        ..Provenance::default()
    };
    Ok(ImputedSet::assemble(
        Strategy::AannGaRf,
        incomplete,
        decode_missing(incomplete, &fixed),
        provenance,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AannGaRfConfig {
    pub autoencoder: AutoencoderConfig,
    pub ga: GaConfig,
    pub forest: ForestParams,
    pub plan: MissingnessPlan,
}

impl Default for AannGaRfConfig {
    fn default() -> Self {
        Self {
            autoencoder: AutoencoderConfig::default(),
            ga: GaConfig::default(),
            forest: ForestParams::default(),
            plan: MissingnessPlan::mcar(&[names::AGE, names::EDUCATION, names::GRAVIDITY], 0.1),
        }
    }
}

#[derive(Debug, Clone)]
pub struct AannGaRfOutcome {
    pub network: AutoencoderNetwork,
    pub trace: TrainTrace,
    pub correction: CorrectionModel,
    pub experiment_truth: Dataset,
    pub experiment_incomplete: Dataset,
    pub experiment_uncorrected: Vec<Vec<f64>>,
    pub experiment_corrected: Vec<Vec<f64>>,
    pub uncorrected: ImputedSet,
    pub corrected: ImputedSet,
}

/// The AANN-GA-RF pipeline over a four-way partition of complete data:
/// train the network on train/validation, blank cells of test and
/// experiment with `plan`, complete both with AANN-GA, learn corrections on
/// test, and apply them to experiment.
pub fn impute_aann_ga_rf(partition: &Partition, config: &AannGaRfConfig, seed: u64) -> Result<AannGaRfOutcome> {
    let sets = [
        &partition.train,
        &partition.validation,
        &partition.test,
        &partition.experiment,
    ];
    if sets.iter().any(|d| d.is_empty()) {
        return Err(Error::Empty("every partition must have rows"));
    }
    if sets.iter().any(|d| !d.is_complete()) {
        return Err(Error::Incomplete("partitions must be complete".into()));
    }
    let train_enc = encode(&partition.train)?;
    let val_enc = encode(&partition.validation)?;
    let (network, trace) = config.autoencoder.fit(
        train_enc.width(),
        &train_enc.values,
        &val_enc.values,
        derive_seed(seed, "aann-init", 0),
    )?;
    let means = train_enc.column_means();

    let (test_inc, _) = inject_missing(&partition.test, &config.plan, derive_seed(seed, "inject-test", 0))?;
    let (exp_inc, _) = inject_missing(&partition.experiment, &config.plan, derive_seed(seed, "inject-experiment", 0))?;
    let test_done = aann_ga_completed(&network, &config.ga, &test_inc, &means, derive_seed(seed, "ga-test", 0))?;
    let exp_done = aann_ga_completed(&network, &config.ga, &exp_inc, &means, derive_seed(seed, "ga-experiment", 0))?;

    let correction = fit_correction(
        &partition.test,
        &test_inc,
        &test_done,
        &config.forest,
        derive_seed(seed, "correction", 0),
    )?;
    let exp_fixed = correction.apply(&exp_inc, &exp_done)?;

    let provenance = Provenance {
        seed: Some(seed),
        config: serde_json::to_value(config)?,
        ..Provenance::default()
    };
    let uncorrected = ImputedSet::assemble(
        Strategy::AannGa,
        &exp_inc,
        decode_missing(&exp_inc, &exp_done),
        provenance.clone(),
    );
    let corrected = ImputedSet::assemble(
        Strategy::AannGaRf,
        &exp_inc,
        decode_missing(&exp_inc, &exp_fixed),
        provenance,
    );
    Ok(AannGaRfOutcome {
        network,
        trace,
        correction,
        experiment_truth: partition.experiment.clone(),
        experiment_incomplete: exp_inc,
        experiment_uncorrected: exp_done,
        experiment_corrected: exp_fixed,
        uncorrected,
        corrected,
    })
}
