//! The two hybrids: RF-bounded AANN-GA, and AANN-GA with forest corrections.
//!
//! cargo run --release --example hybrid_imputation

use rfimpute::assessment::mse;
use rfimpute::dataset::{generate_synthetic, names, split, Dataset, SyntheticParams};
use rfimpute::imputation::{
    fit_rf_imputer, impute_aann_ga_rf, impute_rf_aann_ga, AannGaRfConfig, ImputedSet, RfImputerConfig,
};
use rfimpute::optimizer::GaConfig;

fn imputed_mse(set: &ImputedSet, truth: &Dataset) -> f64 {
    let (mut t, mut p) = (Vec::new(), Vec::new());
    for (r, row) in set.imputed.iter().enumerate() {
        for v in (0..row.len()).filter(|&v| row[v]) {
            t.push(truth.rows[r][v].unwrap() as f64);
            p.push(set.data.rows[r][v].unwrap() as f64);
        }
    }
    mse(&t, &p).unwrap_or(f64::NAN)
}

fn main() -> rfimpute::Result<()> {
    let (data, _) = generate_synthetic(3000, 9, &SyntheticParams::default())?;
    let p = split(&data, [0.4, 0.1, 0.25, 0.25], 1)?;

    let out = impute_aann_ga_rf(&p, &AannGaRfConfig::default(), 2)?;
    println!("AANN-GA       MSE {:.2}", imputed_mse(&out.uncorrected, &out.experiment_truth));
    println!("AANN-GA-RF    MSE {:.2}", imputed_mse(&out.corrected, &out.experiment_truth));

    let rf = fit_rf_imputer(&p.train, &RfImputerConfig::default().excluding(names::HIV), 3)?;
    let bounded = impute_rf_aann_ga(&rf, &out.network, &GaConfig::default(), &out.experiment_incomplete, 4)?;
    println!("RF-AANN-GA    MSE {:.2}", imputed_mse(&bounded, &out.experiment_truth));
    Ok(())
}
