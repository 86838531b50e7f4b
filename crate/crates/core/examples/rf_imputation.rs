//! Random-forest imputation against the mean and random baselines.
//!
//! cargo run --release --example rf_imputation

use rfimpute::dataset::{generate_synthetic, inject_missing, names, split, MissingnessPlan, SyntheticParams};
use rfimpute::imputation::{
    default_ranges, fit_rf_imputer, impute_mean, impute_random, impute_rf, range_accuracy, RfImputerConfig,
};

fn main() -> rfimpute::Result<()> {
    let (data, _) = generate_synthetic(4000, 3, &SyntheticParams::default())?;
    let p = split(&data, [0.5, 0.0, 0.0, 0.5], 1)?;
    let plan = MissingnessPlan::mcar(&[names::AGE, names::EDUCATION, names::GRAVIDITY], 0.1);
    let (holed, report) = inject_missing(&p.experiment, &plan, 2)?;
    println!("removed {} of {} cells", report.removed, report.candidates);

    let rf = fit_rf_imputer(&p.train, &RfImputerConfig::default().excluding(names::HIV), 3)?;
    let sets = [
        impute_rf(&rf, &holed)?,
        impute_mean(&p.train, &holed)?,
        impute_random(&p.train, &holed, 4)?,
    ];
    for set in &sets {
        let acc = range_accuracy(set, &p.experiment, &default_ranges())?;
        println!("{:?}", set.strategy);
        for v in &acc.variables {
            let within: Vec<String> = v.within.iter().map(|(r, f)| format!("±{r}: {:.0}%", 100.0 * f)).collect();
            println!("  {:<10} {}", v.variable, within.join("  "));
        }
    }
    Ok(())
}
