use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{decode_missing, ImputedSet, Provenance, Strategy};
use crate::autoencoder::{assemble, AutoencoderNetwork};
use crate::dataset::{encode, Dataset};
use crate::error::{Error, Result};
use crate::optimizer::{run_ga_seeded, GaConfig, SearchBox};
use crate::seeding;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AannGaOutcome {
    /// The full encoded record with its gaps filled.
    pub record: Vec<f64>,
    /// Reconstruction error of `record`.
    pub error: f64,
    pub evaluations: usize,
}

/// Fill the `missing` entries of an encoded record by searching `[0, 1]` per
/// gene for the values that minimise the network's reconstruction error.
/// The column-mean candidate is always part of the first generation.
pub fn impute_aann_ga(
    network: &AutoencoderNetwork,
    ga: &GaConfig,
    record: &[f64],
    missing: &[bool],
    column_means: &[f64],
) -> Result<AannGaOutcome> {
    let n_missing = missing.iter().filter(|&&m| m).count();
    if column_means.len() != record.len() {
        return Err(Error::Arity {
            expected: record.len(),
            got: column_means.len(),
        });
    }
    let mean_candidate = pick(column_means, missing);
    impute_aann_ga_within(network, ga, record, missing, &SearchBox::unit(n_missing), &[mean_candidate])
}

/// As [`impute_aann_ga`] with an explicit search box over the missing genes
/// and explicit first-generation candidates.
pub fn impute_aann_ga_within(
    network: &AutoencoderNetwork,
    ga: &GaConfig,
    record: &[f64],
    missing: &[bool],
    search_box: &SearchBox,
    initial: &[Vec<f64>],
) -> Result<AannGaOutcome> {
    if record.len() != network.input_size() || missing.len() != record.len() {
        return Err(Error::Arity {
            expected: network.input_size(),
            got: record.len().min(missing.len()),
        });
    }
    let n_missing = missing.iter().filter(|&&m| m).count();
    if n_missing == record.len() {
        return Err(Error::AllMissing(0));
    }
    if n_missing == 0 {
        return Ok(AannGaOutcome {
            record: record.to_vec(),
            error: network.record_error(record),
            evaluations: 1,
        });
    }
    if search_box.dim() != n_missing {
        return Err(Error::Arity {
            expected: n_missing,
            got: search_box.dim(),
        });
    }
    let objective = |candidate: &[f64]| network.record_error(&assemble(record, candidate, missing));
    let result = run_ga_seeded(objective, search_box, ga, initial)?;
    Ok(AannGaOutcome {
        record: assemble(record, &result.best, missing),
        error: result.best_fitness,
        evaluations: result.evaluations,
    })
}

pub(crate) fn pick(values: &[f64], mask: &[bool]) -> Vec<f64> {
    values
        .iter()
        .zip(mask)
        .filter(|(_, &m)| m)
        .map(|(&v, _)| v)
        .collect()
}

/// Row-wise AANN-GA over a dataset, returning completed encoded rows. Row `r` searches with seed
/// `derive_seed(seed, "aann-ga", r)`, so rows can run in any order.
pub fn aann_ga_completed(
    network: &AutoencoderNetwork,
    ga: &GaConfig,
    incomplete: &Dataset,
    column_means: &[f64],
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let enc = encode(incomplete)?;
    if network.input_size() != enc.width() {
        return Err(Error::Arity {
            expected: enc.width(),
            got: network.input_size(),
        });
    }
    enc.values
        .par_iter()
        .zip(&enc.missing)
        .enumerate()
        .map(|(r, (values, miss))| {
            let cfg = ga.with_seed(seeding::derive_seed(seed, "aann-ga", r as u64));
            match impute_aann_ga(network, &cfg, values, miss, column_means) {
                Err(Error::AllMissing(_)) => Err(Error::AllMissing(r)),
                other => other.map(|o| o.record),
            }
        })
        .collect()
}

/// Impute every row of `incomplete` with [`impute_aann_ga`].
pub fn impute_aann_ga_set(
    network: &AutoencoderNetwork,
    ga: &GaConfig,
    incomplete: &Dataset,
    column_means: &[f64],
    seed: u64,
) -> Result<ImputedSet> {
    let completed = aann_ga_completed(network, ga, incomplete, column_means, seed)?;
    let provenance = Provenance {
        seed: Some(seed),
        config: serde_json::to_value(ga)?,
        ..Provenance::default()
    };
    Ok(ImputedSet::assemble(
        Strategy::AannGa,
        incomplete,
        decode_missing(incomplete, &completed),
        provenance,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autoencoder::{init_network, reconstruction_error, train, Activation, TrainConfig};

    fn rank_one_network() -> AutoencoderNetwork {
        let data: Vec<Vec<f64>> = (0..60)
            .map(|i| {
                let x = i as f64 / 120.0;
                vec![x, 2.0 * x]
            })
            .collect();
        let net = init_network(&[2, 1, 2], &[Activation::Linear, Activation::Linear], 3).unwrap();
        train(&net, &data, &data, &TrainConfig::default()).unwrap().0
    }

    #[test]
    fn recovers_the_missing_coordinate_on_rank_one_data() {
        let net = rank_one_network();
        for seed in 0..10 {
            let truth = 0.15 + 0.03 * seed as f64;
            let rec = [truth, f64::NAN];
            let out = impute_aann_ga(&net, &GaConfig::default().with_seed(seed), &rec, &[false, true], &[0.25, 0.5])
                .unwrap();
            assert!((out.record[1] - 2.0 * truth).abs() < 0.05, "seed {seed}: {:?}", out.record);
            assert_eq!(out.record[0], truth);
        }
    }

    #[test]
    fn never_worse_than_the_mean_candidate() {
        let net = init_network(&[4, 2, 4], &[Activation::Tanh, Activation::Linear], 8).unwrap();
        let means = [0.3, 0.6, 0.5, 0.2];
        let cfg = GaConfig { generations: 3, population: 4, ..GaConfig::default() };
        for r in 0..20 {
            let rec: Vec<f64> = (0..4).map(|j| ((r * 7 + j * 3) % 10) as f64 / 10.0).collect();
            let miss = [r % 2 == 0, true, false, r % 3 == 0];
            let out = impute_aann_ga(&net, &cfg.with_seed(r as u64), &rec, &miss, &means).unwrap();
            let mean_err = reconstruction_error(&net, &rec, &pick(&means, &miss), &miss).unwrap();
            assert!(out.error <= mean_err);
        }
    }

    #[test]
    fn trivial_cases() {
        let net = rank_one_network();
        let out = impute_aann_ga(&net, &GaConfig::default(), &[0.1, 0.2], &[false, false], &[0.0, 0.0]).unwrap();
        assert_eq!(out.record, vec![0.1, 0.2]);
        assert_eq!(out.evaluations, 1);
        assert!(matches!(
            impute_aann_ga(&net, &GaConfig::default(), &[0.1, 0.2], &[true, true], &[0.0, 0.0]),
            Err(Error::AllMissing(_))
        ));
    }
}
