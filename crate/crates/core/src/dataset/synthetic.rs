//! Seeded surrogate for the antenatal survey.
//!
//! Records follow the survey schema and carry planted dependencies:
//! parity trails gravidity by a small gap, the father's age tracks the
//! mother's, education depends on age, province and race, and HIV status is
//! drawn from a logistic model over encoded age, education and province bits
//! whose coefficients are returned with the data.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::{Normal, Poisson};
use serde::{Deserialize, Serialize};

use super::encode::encode_value;
use super::schema::names;
use super::{Dataset, Schema};
use crate::error::{Error, Result};
use crate::seeding;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticParams {
    pub province_weights: [f64; 9],
    /// Dominant race per province, drawn with `race_major_prob`.
    pub race_major: [i64; 9],
    pub race_major_prob: f64,
    pub age_mean: f64,
    pub age_sd: f64,
    pub education_base: f64,
    pub education_age_slope: f64,
    pub education_province_effect: [f64; 9],
    pub education_race_effect: [f64; 6],
    pub education_noise_sd: f64,
    /// Gravidity is `1 + Poisson(base + slope·(age − 12))`.
    pub gravidity_base: f64,
    pub gravidity_age_slope: f64,
    /// Probabilities of parity trailing gravidity by 0, 1, 2.
    pub parity_gap_probs: [f64; 3],
    pub father_offset: f64,
    pub father_noise_sd: f64,
    pub hiv_intercept: f64,
    pub hiv_age: f64,
    pub hiv_education: f64,
    pub hiv_province_bits: [f64; 4],
    pub rpr_rate: [f64; 9],
}

impl Default for SyntheticParams {
    fn default() -> Self {
        Self {
            province_weights: [0.08, 0.14, 0.06, 0.12, 0.18, 0.09, 0.13, 0.08, 0.12],
            race_major: [0, 0, 1, 0, 2, 0, 3, 0, 4],
            race_major_prob: 0.7,
            age_mean: 26.0,
            age_sd: 6.0,
            education_base: 8.0,
            education_age_slope: 0.15,
            education_province_effect: [0.5, -1.0, 1.5, 0.0, -1.5, 1.0, 2.0, -0.5, -1.0],
            education_race_effect: [-1.0, 0.5, 2.0, 1.5, 0.0, -0.5],
            education_noise_sd: 2.0,
            gravidity_base: 0.3,
            gravidity_age_slope: 0.07,
            parity_gap_probs: [0.85, 0.13, 0.02],
            father_offset: 4.5,
            father_noise_sd: 3.0,
            hiv_intercept: 1.0,
            hiv_age: -3.0,
            hiv_education: -2.5,
            hiv_province_bits: [1.0, -0.8, 0.7, 0.9],
            rpr_rate: [0.02, 0.05, 0.10, 0.03, 0.12, 0.04, 0.08, 0.06, 0.15],
        }
    }
}

/// The logistic model HIV labels are drawn from, over encoded columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedModel {
    pub intercept: f64,
    /// One coefficient per encoded column of the survey schema (HIV's own is 0).
    pub coefficients: Vec<f64>,
    pub column_names: Vec<String>,
}

impl PlantedModel {
    fn from_params(schema: &Schema, p: &SyntheticParams) -> Self {
        let spans = schema.column_spans();
        let mut coefficients = vec![0.0; schema.encoded_width()];
        let province = spans[schema.index_of(names::PROVINCE).expect("survey")].clone();
        coefficients[province].copy_from_slice(&p.hiv_province_bits);
        coefficients[spans[schema.index_of(names::AGE).expect("survey")].start] = p.hiv_age;
        coefficients[spans[schema.index_of(names::EDUCATION).expect("survey")].start] =
            p.hiv_education;
        Self {
            intercept: p.hiv_intercept,
            coefficients,
            column_names: schema.encoded_column_names(),
        }
    }

    /// Probability of HIV given an encoded record.
    pub fn probability(&self, encoded: &[f64]) -> f64 {
        let z = self.intercept
            + self
                .coefficients
                .iter()
                .zip(encoded)
                .map(|(b, x)| if *b == 0.0 { 0.0 } else { b * x })
                .sum::<f64>();
        1.0 / (1.0 + (-z).exp())
    }
}

fn check(p: &SyntheticParams) -> Result<()> {
    let prob_ok = |x: f64| (0.0..=1.0).contains(&x);
    if !prob_ok(p.race_major_prob) || !p.rpr_rate.iter().all(|&r| prob_ok(r)) {
        return Err(Error::invalid("synthetic probabilities must lie in [0, 1]"));
    }
    if p.age_sd <= 0.0 || p.education_noise_sd < 0.0 || p.father_noise_sd < 0.0 {
        return Err(Error::invalid("synthetic noise scales must be non-negative"));
    }
    if p.race_major.iter().any(|r| !(0..=5).contains(r)) {
        return Err(Error::invalid("race codes must lie in 0..=5"));
    }
    Ok(())
}

/// Draw `n` valid survey records.
pub fn generate_synthetic(
    n: usize,
    seed: u64,
    params: &SyntheticParams,
) -> Result<(Dataset, PlantedModel)> {
    if n == 0 {
        return Err(Error::Empty("synthetic dataset needs at least one record"));
    }
    check(params)?;
    let schema = Schema::survey();
    let planted = PlantedModel::from_params(&schema, params);
    let bad = |e: rand::distr::weighted::Error| Error::invalid(format!("weights: {e}"));
    let province_dist = WeightedIndex::new(params.province_weights).map_err(bad)?;
    let gap_dist = WeightedIndex::new(params.parity_gap_probs).map_err(bad)?;
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");

    let mut rng = seeding::rng(seed);
    let width = schema.encoded_width();
    let spans = schema.column_spans();
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let p_idx = province_dist.sample(&mut rng);
        let province = p_idx as i64 + 1;
        let race = if rng.random::<f64>() < params.race_major_prob {
            params.race_major[p_idx]
        } else {
            rng.random_range(0..=5)
        };
        let age = (params.age_mean + params.age_sd * std_normal.sample(&mut rng))
            .round()
            .clamp(12.0, 50.0) as i64;
        let education = (params.education_base
            + params.education_age_slope * (age as f64 - params.age_mean)
            + params.education_province_effect[p_idx]
            + params.education_race_effect[race as usize]
            + params.education_noise_sd * std_normal.sample(&mut rng))
        .round()
        .clamp(0.0, 13.0) as i64;
        let lambda = (params.gravidity_base + params.gravidity_age_slope * (age - 12) as f64)
            .max(1e-3);
        let extra: f64 = Poisson::new(lambda)
            .map_err(|e| Error::invalid(format!("poisson rate: {e}")))?
            .sample(&mut rng);
        let gravidity = (1 + extra as i64).min(12);
        let parity = (gravidity - gap_dist.sample(&mut rng) as i64).clamp(0, 9);
        let father = (age as f64
            + params.father_offset
            + params.father_noise_sd * std_normal.sample(&mut rng))
        .round()
        .clamp(13.0, 90.0) as i64;
        let rpr = i64::from(rng.random::<f64>() < params.rpr_rate[p_idx]);

        let mut record = [province, age, education, gravidity, parity, father, 0, rpr, race];
        let mut enc = vec![0.0; width];
        for ((spec, span), v) in schema.variables.iter().zip(&spans).zip(record) {
            encode_value(spec, v, &mut enc[span.clone()]);
        }
        record[6] = i64::from(rng.random::<f64>() < planted.probability(&enc));
        rows.push(record.map(Some).to_vec());
    }
    Ok((Dataset { schema, rows }, planted))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{encode, validate_record};

    fn pearson(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let ma = a.iter().sum::<f64>() / n;
        let mb = b.iter().sum::<f64>() / n;
        let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
        let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
        cov / (va * vb).sqrt()
    }

    #[test]
    fn every_record_is_valid() {
        let (d, _) = generate_synthetic(3000, 11, &SyntheticParams::default()).unwrap();
        assert_eq!(d.n_rows(), 3000);
        for r in &d.rows {
            assert!(validate_record(r, &d.schema).is_empty(), "{r:?}");
        }
    }

    #[test]
    fn gravidity_and_parity_correlate() {
        for seed in 0..10 {
            let (d, _) = generate_synthetic(5000, seed, &SyntheticParams::default()).unwrap();
            let r = pearson(&d.column_f64(3), &d.column_f64(4));
            assert!(r > 0.8, "seed {seed}: corr {r}");
        }
    }

    #[test]
    fn hiv_prevalence_matches_planted_model() {
        for seed in 0..10 {
            let (d, planted) = generate_synthetic(5000, seed, &SyntheticParams::default()).unwrap();
            let enc = encode(&d).unwrap();
            // Independent of the generator's draw: average the model's probability.
            let implied: f64 = enc
                .values
                .iter()
                .map(|row| {
                    let z: f64 = planted.intercept
                        + (0..14)
                            .filter(|&j| j != 9)
                            .map(|j| planted.coefficients[j] * row[j])
                            .sum::<f64>();
                    1.0 / (1.0 + (-z).exp())
                })
                .sum::<f64>()
                / 5000.0;
            let realised = d.column_f64(6).iter().sum::<f64>() / 5000.0;
            assert!((implied - realised).abs() < 0.03, "seed {seed}: {implied} vs {realised}");
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let p = SyntheticParams::default();
        assert_eq!(generate_synthetic(100, 4, &p).unwrap(), generate_synthetic(100, 4, &p).unwrap());
        assert_ne!(generate_synthetic(100, 4, &p).unwrap().0, generate_synthetic(100, 5, &p).unwrap().0);
    }

    #[test]
    fn rejects_empty_and_bad_params() {
        assert!(generate_synthetic(0, 1, &SyntheticParams::default()).is_err());
        let p = SyntheticParams {
            race_major_prob: 1.5,
            ..SyntheticParams::default()
        };
        assert!(generate_synthetic(10, 1, &p).is_err());
    }
}
