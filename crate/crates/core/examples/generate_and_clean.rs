//! Generate a synthetic survey, break a few records, and clean them.
//!
//! cargo run --example generate_and_clean

use rfimpute::dataset::{clean, generate_synthetic, names, validate_record, SyntheticParams};

fn main() -> rfimpute::Result<()> {
    let (mut data, planted) = generate_synthetic(1000, 7, &SyntheticParams::default())?;
    println!("{} records, {} variables", data.n_rows(), data.schema.variables.len());
    println!("planted HIV intercept {:.2}", planted.intercept);

    let age = data.schema.require(names::AGE)?;
    let gra = data.schema.require(names::GRAVIDITY)?;
    let par = data.schema.require(names::PARITY)?;
    data.rows[0][age] = Some(70);
    data.rows[1][gra] = Some(1);
    data.rows[1][par] = Some(4);
    for r in 0..2 {
        println!("record {r}: {:?}", validate_record(&data.rows[r], &data.schema));
    }

    // Offending cells become missing; everything else is kept.
    let cleaned = clean(&data);
    println!("missing cells after cleaning: {}", cleaned.missing_count());
    println!("complete records: {}", cleaned.complete_rows().n_rows());
    Ok(())
}
