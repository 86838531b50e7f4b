//! Fit a forest on the HIV classification task and inspect it.
//!
//! cargo run --release --example random_forest

use rfimpute::assessment::hiv_design;
use rfimpute::dataset::{generate_synthetic, SyntheticParams};
use rfimpute::forest::{fit_forest, oob_error, proximity, variable_importance, ForestParams, Task};

fn main() -> rfimpute::Result<()> {
    let (data, planted) = generate_synthetic(3000, 1, &SyntheticParams::default())?;
    let (x, y) = hiv_design(&data)?;
    let params = ForestParams::default();
    let forest = fit_forest(&x, &y, Task::Classification { n_classes: 2 }, &params, 11)?;

    let oob = oob_error(&forest, &x, &y)?;
    println!("{} trees, out-of-bag error {:.3}", params.n_trees, oob.error);
    println!("mean out-of-bag share per tree {:.3}", forest.oob_fraction());

    let importance = variable_importance(&forest, &x, &y, 12)?;
    let names: Vec<&String> = planted.column_names.iter().filter(|n| !n.starts_with("HIV")).collect();
    println!("most important encoded columns:");
    for f in importance.ordered().into_iter().take(4) {
        println!("  {:<12} {:+.4}", names[f], importance.importance[f]);
    }

    let prox = proximity(&forest, &x[..5])?;
    println!("proximity of record 0 to records 0..5: {:?}", &prox.counts[..5]);
    Ok(())
}
