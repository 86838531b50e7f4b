//! Run every step end to end, then replay the manifest.
//!
//! cargo run --release --example full_pipeline -- [out_dir]

use std::path::PathBuf;

use rfimpute::pipeline::{replay, run_pipeline, RunConfig};

fn main() -> rfimpute::Result<()> {
    let out = std::env::args().nth(1).map_or_else(|| std::env::temp_dir().join("rfimpute-demo"), PathBuf::from);
    let mut config = RunConfig::new(2024);
    config.sets = ["T", "RF1A", "R1A", "RF2A", "R2A", "M2A", "AGRF2A"].map(String::from).to_vec();

    let manifest = run_pipeline(&config, &out.join("run"))?;
    for step in &manifest.steps {
        println!("{:>2} {:<16} -> {}", step.index, step.step.name(), step.outputs[0].path.display());
    }
    let report = replay(&manifest, &out.join("replay"))?;
    println!("replayed {} steps, {} outputs identical", report.steps, report.outputs_checked);
    Ok(())
}
