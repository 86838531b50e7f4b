//! Real-coded GA on a box-constrained objective.
//!
//! cargo run --example ga_search

use rfimpute::optimizer::{run_ga, GaConfig, SearchBox};

fn main() -> rfimpute::Result<()> {
    let target = [0.2, 0.9, 0.5];
    let objective = |v: &[f64]| v.iter().zip(&target).map(|(a, b)| (a - b).powi(2)).sum::<f64>();

    let result = run_ga(objective, &SearchBox::unit(3), &GaConfig::default().with_seed(5))?;
    println!("best {:?}", result.best.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>());
    println!("fitness {:.2e} after {} evaluations", result.best_fitness, result.evaluations);
    for (g, f) in result.trace.iter().enumerate().step_by(20) {
        println!("generation {g:>3}: {f:.3e}");
    }

    // A box that excludes the optimum pins the answer to its edge.
    let narrow = SearchBox::new(vec![0.0, 0.0, 0.0], vec![0.1, 1.0, 1.0])?;
    let edge = run_ga(objective, &narrow, &GaConfig::default().with_seed(5))?;
    println!("restricted best first coordinate {:.4}", edge.best[0]);
    Ok(())
}
