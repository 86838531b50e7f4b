use std::io::Write as _;

use serde::{Deserialize, Serialize};

use super::network::AutoencoderNetwork;
use super::scg::{Scg, ScgSettings};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub max_cycles: usize,
    /// Stop after this many cycles without a new validation minimum.
    pub patience: Option<usize>,
    /// Finite-difference step for the curvature probe.
    pub sigma0: f64,
    /// Initial trust-region scaling.
    pub lambda0: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            max_cycles: 400,
            patience: None,
            sigma0: 1e-4,
            lambda0: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    /// `(cycle, train_loss, validation_loss)`; cycle 0 is the initial network.
    pub cycles: Vec<(usize, f64, f64)>,
    pub selected_cycle: usize,
}

impl TrainTrace {
    pub fn to_csv(&self) -> String {
        let mut out = Vec::new();
        writeln!(out, "cycle,train_loss,val_loss").expect("vec write");
        for (c, t, v) in &self.cycles {
            writeln!(out, "{c},{t},{v}").expect("vec write");
        }
        String::from_utf8(out).expect("ascii")
    }

    pub fn selected(&self) -> (usize, f64, f64) {
        self.cycles[self.selected_cycle]
    }
}

/// Full-batch scaled-conjugate-gradient training with early stopping: the
/// returned network carries the weights of the cycle with the lowest
/// validation loss.
pub fn train(
    network: &AutoencoderNetwork,
    train_set: &[Vec<f64>],
    validation_set: &[Vec<f64>],
    config: &TrainConfig,
) -> Result<(AutoencoderNetwork, TrainTrace)> {
    if config.max_cycles == 0 {
        return Err(Error::invalid("max_cycles must be at least 1"));
    }
    if train_set.is_empty() || validation_set.is_empty() {
        return Err(Error::Empty("training and validation sets"));
    }
    if train_set
        .iter()
        .chain(validation_set)
        .flatten()
        .any(|v| !v.is_finite())
    {
        return Err(Error::Incomplete("training data contains missing values".into()));
    }
    let mut work = network.clone();
    work.loss(train_set)?;
    work.loss(validation_set)?;

    let mut eval = |p: &[f64]| {
        let mut net = network.clone();
        net.set_params(p);
        net.loss_and_gradient(train_set).expect("shapes checked")
    };
    let settings = ScgSettings {
        sigma0: config.sigma0,
        lambda0: config.lambda0,
    };
    let mut opt = Scg::new(settings, network.params(), &mut eval);
    if !opt.f.is_finite() {
        return Err(Error::Divergence { cycle: 0 });
    }
    let val0 = network.loss(validation_set)?;
    let mut cycles = vec![(0, opt.f, val0)];
    let mut best = (0usize, val0, network.params());

    for cycle in 1..=config.max_cycles {
        let f = opt.step(&mut eval);
        if !f.is_finite() {
            return Err(Error::Divergence { cycle });
        }
        work.set_params(&opt.x);
        let val = work.loss(validation_set)?;
        if !val.is_finite() {
            return Err(Error::Divergence { cycle });
        }
        cycles.push((cycle, f, val));
        if val < best.1 {
            best = (cycle, val, opt.x.clone());
        }
        if config.patience.is_some_and(|p| cycle - best.0 >= p) || opt.converged() {
            break;
        }
    }
    work.set_params(&best.2);
    Ok((
        work,
        TrainTrace {
            cycles,
            selected_cycle: best.0,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autoencoder::{init_network, Activation};

    #[test]
    fn rank_one_data_is_reconstructed() {
        let data: Vec<Vec<f64>> = (0..40)
            .map(|i| {
                let x = i as f64 / 80.0;
                vec![x, 2.0 * x]
            })
            .collect();
        let net = init_network(&[2, 1, 2], &[Activation::Linear, Activation::Linear], 1).unwrap();
        let (trained, trace) = train(&net, &data, &data, &TrainConfig::default()).unwrap();
        let mse = trained.loss(&data).unwrap();
        assert!(mse < 1e-3, "mse {mse}");
        assert!(trace.selected().1 <= trace.cycles[0].1);
    }

    #[test]
    fn selected_cycle_minimises_validation_loss() {
        let data: Vec<Vec<f64>> = (0..30)
            .map(|i| {
                let t = i as f64 / 30.0;
                vec![t, (t * 5.0).sin() * 0.5 + 0.5, 1.0 - t]
            })
            .collect();
        let (train_set, val_set) = data.split_at(20);
        let net = init_network(&[3, 1, 3], &[Activation::Tanh, Activation::Linear], 2).unwrap();
        let cfg = TrainConfig { max_cycles: 60, ..TrainConfig::default() };
        let (trained, trace) = train(&net, train_set, val_set, &cfg).unwrap();
        let min = trace.cycles.iter().map(|c| c.2).fold(f64::INFINITY, f64::min);
        assert_eq!(trace.selected().2, min);
        assert!((trained.loss(val_set).unwrap() - min).abs() < 1e-12);
        assert!(trace.to_csv().starts_with("cycle,train_loss,val_loss\n0,"));
    }

    #[test]
    fn deterministic_and_validated() {
        let data = vec![vec![0.1, 0.2, 0.3], vec![0.5, 0.4, 0.3], vec![0.9, 0.1, 0.0]];
        let net = init_network(&[3, 2, 3], &[Activation::Linear, Activation::Linear], 5).unwrap();
        let cfg = TrainConfig { max_cycles: 20, ..TrainConfig::default() };
        assert_eq!(train(&net, &data, &data, &cfg).unwrap(), train(&net, &data, &data, &cfg).unwrap());
        assert!(train(&net, &[], &data, &cfg).is_err());
        assert!(train(&net, &data, &data, &TrainConfig { max_cycles: 0, ..cfg.clone() }).is_err());
        let holes = vec![vec![0.1, f64::NAN, 0.3]];
        assert!(train(&net, &holes, &data, &cfg).is_err());
    }

    #[test]
    fn divergence_is_reported_with_cycle() {
        let data = vec![vec![1e200, 1e200, 1e200]];
        let net = init_network(&[3, 2, 3], &[Activation::Linear, Activation::Linear], 5).unwrap();
        match train(&net, &data, &data, &TrainConfig::default()) {
            Err(Error::Divergence { .. }) => {}
            other => panic!("{other:?}"),
        }
    }
}
