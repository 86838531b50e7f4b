//! Train the autoencoder on encoded survey records with early stopping.
//!
//! cargo run --release --example autoencoder_training

use rfimpute::autoencoder::AutoencoderConfig;
use rfimpute::dataset::{encode, generate_synthetic, split, SyntheticParams};

fn main() -> rfimpute::Result<()> {
    let (data, _) = generate_synthetic(3000, 2, &SyntheticParams::default())?;
    let p = split(&data, [0.6, 0.2, 0.0, 0.2], 3)?;
    let (train, val, test) = (encode(&p.train)?, encode(&p.validation)?, encode(&p.experiment)?);

    let config = AutoencoderConfig::default();
    let (net, trace) = config.fit(train.width(), &train.values, &val.values, 4)?;
    println!("{}-{}-{} network", train.width(), config.hidden, train.width());
    for (cycle, t, v) in trace.cycles.iter().step_by(50) {
        println!("cycle {cycle:>3}: train {t:.5} validation {v:.5}");
    }
    println!("kept cycle {}", trace.selected_cycle);
    println!("held-out reconstruction MSE {:.5}", net.loss(&test.values)?);
    Ok(())
}
