//! How much do imputed sets change downstream statistics and models?
//!
//! cargo run --release --example impact_assessment

use rfimpute::assessment::{fit_lr, hiv_design, lr_impact, lr_table, stat_impact_set, stats_tables, LrBlock, LrConfig};
use rfimpute::dataset::{generate_synthetic, names, split, SyntheticParams};
use rfimpute::imputation::{
    blank_variables, fit_rf_imputer, impute_random, impute_rf, pattern_variables, RfImputerConfig,
};

fn main() -> rfimpute::Result<()> {
    let (data, _) = generate_synthetic(5000, 4, &SyntheticParams::default())?;
    let p = split(&data, [0.5, 0.0, 0.0, 0.5], 1)?;
    let vars = pattern_variables("2A").expect("known pattern");
    let holed = blank_variables(&p.experiment, &vars)?;

    let rf = fit_rf_imputer(&p.train, &RfImputerConfig::default().excluding(names::HIV), 2)?;
    let sets = [
        impute_rf(&rf, &holed)?.with_label("RF2A"),
        impute_random(&p.train, &holed, 3)?.with_label("R2A"),
    ];

    let reports = sets
        .iter()
        .map(|s| stat_impact_set(&p.experiment, s, &vars))
        .collect::<rfimpute::Result<Vec<_>>>()?;
    for table in stats_tables(&reports) {
        println!("{}", table.render());
    }

    let (x, y) = hiv_design(&p.train)?;
    let lr = fit_lr(&x, &y, &LrConfig::default())?;
    let (tx, _) = hiv_design(&p.experiment)?;
    let mut blocks = Vec::new();
    for s in &sets {
        blocks.push(LrBlock {
            label: s.label.clone(),
            report: lr_impact(&lr, &tx, &hiv_design(&s.data)?.0)?,
        });
    }
    println!("{}", lr_table(&blocks).render());
    Ok(())
}
