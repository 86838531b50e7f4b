//! Autoassociative (input = target) feed-forward networks with a bottleneck
//! hidden layer, trained by scaled conjugate gradient with early stopping.

mod network;
mod scg;
mod train;

use serde::{Deserialize, Serialize};

pub use network::{init_network, reconstruction_error, Activation, AutoencoderNetwork, Layer};
pub use train::{train, TrainConfig, TrainTrace};

pub(crate) use network::assemble;

/// Architecture plus training settings; defaults give the 14-11-14 linear network
/// trained for up to 400 cycles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutoencoderConfig {
    pub hidden: usize,
    pub activations: [Activation; 2],
    pub train: TrainConfig,
}

impl Default for AutoencoderConfig {
    fn default() -> Self {
        Self {
            hidden: 11,
            activations: [Activation::Linear, Activation::Linear],
            train: TrainConfig::default(),
        }
    }
}

impl AutoencoderConfig {
    /// Initialise a network for `width` inputs and train it.
    pub fn fit(
        &self,
        width: usize,
        train_set: &[Vec<f64>],
        validation_set: &[Vec<f64>],
        seed: u64,
    ) -> crate::Result<(AutoencoderNetwork, TrainTrace)> {
        let net = init_network(&[width, self.hidden, width], &self.activations, seed)?;
        train(&net, train_set, validation_set, &self.train)
    }
}
