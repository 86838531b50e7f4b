use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeding;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Linear,
    Tanh,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Linear => z,
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative expressed through the activation's output.
    fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Linear => 1.0,
            Activation::Tanh => 1.0 - a * a,
        }
    }
}

/// Fully connected layer; `weights` is `n_out × n_in`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub n_in: usize,
    pub n_out: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl Layer {
    fn forward_into(&self, input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend((0..self.n_out).map(|o| {
            let w = &self.weights[o * self.n_in..(o + 1) * self.n_in];
            let z = self.bias[o] + w.iter().zip(input).map(|(a, b)| a * b).sum::<f64>();
            self.activation.apply(z)
        }));
    }

    fn n_params(&self) -> usize {
        self.weights.len() + self.bias.len()
    }
}

/// A feed-forward network whose output layer reproduces its input layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutoencoderNetwork {
    pub layers: Vec<Layer>,
}

fn check_shape(sizes: &[usize], activations: &[Activation]) -> Result<()> {
    if sizes.len() < 3 {
        return Err(Error::invalid("an autoencoder needs input, hidden and output layers"));
    }
    if activations.len() != sizes.len() - 1 {
        return Err(Error::invalid(format!(
            "{} layer sizes need {} activations, got {}",
            sizes.len(),
            sizes.len() - 1,
            activations.len()
        )));
    }
    let input = sizes[0];
    if sizes[sizes.len() - 1] != input {
        return Err(Error::invalid("output size must equal input size"));
    }
    if let Some(&h) = sizes[1..sizes.len() - 1].iter().find(|&&h| h == 0 || h >= input) {
        return Err(Error::invalid(format!(
            "hidden layer of {h} nodes is not a bottleneck for {input} inputs"
        )));
    }
    Ok(())
}

/// Random weights in `±1/sqrt(fan_in)`, zero biases.
pub fn init_network(
    sizes: &[usize],
    activations: &[Activation],
    seed: u64,
) -> Result<AutoencoderNetwork> {
    check_shape(sizes, activations)?;
    let mut rng = seeding::rng(seed);
    let layers = sizes
        .windows(2)
        .zip(activations)
        .map(|(w, &activation)| {
            let (n_in, n_out) = (w[0], w[1]);
            let scale = 1.0 / (n_in as f64).sqrt();
            Layer {
                n_in,
                n_out,
                weights: (0..n_in * n_out)
                    .map(|_| rng.random_range(-scale..=scale))
                    .collect(),
                bias: vec![0.0; n_out],
                activation,
            }
        })
        .collect();
    Ok(AutoencoderNetwork { layers })
}

impl AutoencoderNetwork {
    /// All-zero weights and biases.
    pub fn zeros(sizes: &[usize], activations: &[Activation]) -> Result<Self> {
        check_shape(sizes, activations)?;
        let layers = sizes
            .windows(2)
            .zip(activations)
            .map(|(w, &activation)| Layer {
                n_in: w[0],
                n_out: w[1],
                weights: vec![0.0; w[0] * w[1]],
                bias: vec![0.0; w[1]],
                activation,
            })
            .collect();
        Ok(Self { layers })
    }

    pub fn input_size(&self) -> usize {
        self.layers[0].n_in
    }

    pub fn sizes(&self) -> Vec<usize> {
        std::iter::once(self.input_size())
            .chain(self.layers.iter().map(|l| l.n_out))
            .collect()
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(Layer::n_params).sum()
    }

    /// Weights then biases, layer by layer.
    pub fn params(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.n_params());
        for l in &self.layers {
            p.extend_from_slice(&l.weights);
            p.extend_from_slice(&l.bias);
        }
        p
    }

    pub fn set_params(&mut self, params: &[f64]) {
        assert_eq!(params.len(), self.n_params(), "parameter vector length");
        let mut at = 0;
        for l in &mut self.layers {
            let nw = l.weights.len();
            l.weights.copy_from_slice(&params[at..at + nw]);
            at += nw;
            let nb = l.bias.len();
            l.bias.copy_from_slice(&params[at..at + nb]);
            at += nb;
        }
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_size() {
            return Err(Error::Arity {
                expected: self.input_size(),
                got: x.len(),
            });
        }
        Ok(self.forward_unchecked(x))
    }

    pub(crate) fn forward_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let mut a = x.to_vec();
        let mut next = Vec::new();
        for l in &self.layers {
            l.forward_into(&a, &mut next);
            std::mem::swap(&mut a, &mut next);
        }
        a
    }

    /// Squared input-output discrepancy summed over components.
    pub(crate) fn record_error(&self, x: &[f64]) -> f64 {
        self.forward_unchecked(x)
            .iter()
            .zip(x)
            .map(|(y, v)| (v - y).powi(2))
            .sum()
    }

    /// Mean squared reconstruction loss over every entry of the batch.
    pub fn loss(&self, batch: &[Vec<f64>]) -> Result<f64> {
        if batch.is_empty() {
            return Err(Error::Empty("batch"));
        }
        let d = self.input_size();
        let mut total = 0.0;
        for x in batch {
            if x.len() != d {
                return Err(Error::Arity { expected: d, got: x.len() });
            }
            total += self.record_error(x);
        }
        Ok(total / (batch.len() * d) as f64)
    }

    /// Loss and its exact gradient with respect to [`params`](Self::params).
    pub fn loss_and_gradient(&self, batch: &[Vec<f64>]) -> Result<(f64, Vec<f64>)> {
        if batch.is_empty() {
            return Err(Error::Empty("batch"));
        }
        let d = self.input_size();
        let scale = 1.0 / (batch.len() * d) as f64;
        let mut grad = vec![0.0; self.n_params()];
        let offsets: Vec<usize> = self
            .layers
            .iter()
            .scan(0, |at, l| {
                let o = *at;
                *at += l.n_params();
                Some(o)
            })
            .collect();
        let mut total = 0.0;
        let mut acts: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len() + 1);
        for x in batch {
            if x.len() != d {
                return Err(Error::Arity { expected: d, got: x.len() });
            }
            acts.clear();
            acts.push(x.clone());
            for l in &self.layers {
                let mut out = Vec::with_capacity(l.n_out);
                l.forward_into(acts.last().expect("input"), &mut out);
                acts.push(out);
            }
            let y = acts.last().expect("output");
            let mut upstream: Vec<f64> = y
                .iter()
                .zip(x)
                .map(|(yo, xo)| {
                    let r = yo - xo;
                    total += r * r;
                    2.0 * r * scale
                })
                .collect();
            for (li, l) in self.layers.iter().enumerate().rev() {
                let out = &acts[li + 1];
                let input = &acts[li];
                let delta: Vec<f64> = upstream
                    .iter()
                    .zip(out)
                    .map(|(g, &a)| g * l.activation.derivative_from_output(a))
                    .collect();
                let base = offsets[li];
                for o in 0..l.n_out {
                    let row = base + o * l.n_in;
                    for i in 0..l.n_in {
                        grad[row + i] += delta[o] * input[i];
                    }
                    grad[base + l.weights.len() + o] += delta[o];
                }
                if li > 0 {
                    upstream = (0..l.n_in)
                        .map(|i| (0..l.n_out).map(|o| l.weights[o * l.n_in + i] * delta[o]).sum())
                        .collect();
                }
            }
        }
        Ok((total * scale, grad))
    }
}

/// Reconstruction error `Σ (x − f(x))²` of a record whose missing
/// entries (`missing[j] == true`) are filled, in order, from `candidate`.
pub fn reconstruction_error(
    network: &AutoencoderNetwork,
    known: &[f64],
    candidate: &[f64],
    missing: &[bool],
) -> Result<f64> {
    if known.len() != network.input_size() || missing.len() != known.len() {
        return Err(Error::Arity {
            expected: network.input_size(),
            got: known.len().min(missing.len()),
        });
    }
    let n_missing = missing.iter().filter(|&&m| m).count();
    if candidate.len() != n_missing {
        return Err(Error::Arity {
            expected: n_missing,
            got: candidate.len(),
        });
    }
    Ok(network.record_error(&assemble(known, candidate, missing)))
}

pub(crate) fn assemble(known: &[f64], candidate: &[f64], missing: &[bool]) -> Vec<f64> {
    let mut fill = candidate.iter();
    known
        .iter()
        .zip(missing)
        .map(|(&k, &m)| if m { *fill.next().expect("candidate length") } else { k })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_is_deterministic_and_checks_bottleneck() {
        let acts = [Activation::Linear, Activation::Linear];
        let a = init_network(&[14, 11, 14], &acts, 3).unwrap();
        assert_eq!(a, init_network(&[14, 11, 14], &acts, 3).unwrap());
        assert_ne!(a, init_network(&[14, 11, 14], &acts, 4).unwrap());
        assert!(init_network(&[14, 14, 14], &acts, 3).is_err());
        assert!(init_network(&[14, 11, 13], &acts, 3).is_err());
        assert!(init_network(&[14, 11, 14], &acts[..1], 3).is_err());
        let bound = 1.0 / 14f64.sqrt();
        assert!(a.layers[0].weights.iter().all(|w| w.abs() <= bound));
    }

    #[test]
    fn zero_weights_output_the_bias() {
        let mut net = AutoencoderNetwork::zeros(&[3, 2, 3], &[Activation::Tanh, Activation::Linear]).unwrap();
        assert_eq!(net.forward(&[0.0; 3]).unwrap(), vec![0.0; 3]);
        net.layers[1].bias = vec![0.1, -0.2, 0.3];
        assert_eq!(net.forward(&[0.4, 0.5, 0.6]).unwrap(), vec![0.1, -0.2, 0.3]);
        assert!(net.forward(&[0.0; 2]).is_err());
    }

    #[test]
    fn hand_reconstruction_error() {
        // Output is the constant (0.2, 0.6) for any input.
        let mut net = AutoencoderNetwork::zeros(&[2, 1, 2], &[Activation::Linear, Activation::Linear]).unwrap();
        net.layers[1].bias = vec![0.2, 0.6];
        let e = reconstruction_error(&net, &[0.2, f64::NAN], &[0.8], &[false, true]).unwrap();
        assert!((e - 0.04).abs() < 1e-12);
        assert!(reconstruction_error(&net, &[0.2, 0.8], &[0.8], &[false, false]).is_err());
    }

    #[test]
    fn params_round_trip() {
        let mut net = init_network(&[4, 2, 4], &[Activation::Tanh, Activation::Linear], 1).unwrap();
        let p = net.params();
        assert_eq!(p.len(), 4 * 2 + 2 + 2 * 4 + 4);
        let mut q = p.clone();
        q[0] += 1.0;
        net.set_params(&q);
        assert_eq!(net.params(), q);
    }

    #[test]
    fn zero_loss_has_zero_gradient() {
        // Linear 2-1-2 network that maps (t, t) to itself.
        let mut net = AutoencoderNetwork::zeros(&[2, 1, 2], &[Activation::Linear, Activation::Linear]).unwrap();
        net.layers[0].weights = vec![0.5, 0.5];
        net.layers[1].weights = vec![1.0, 1.0];
        let batch = vec![vec![0.3, 0.3], vec![0.9, 0.9]];
        let (l, g) = net.loss_and_gradient(&batch).unwrap();
        assert!(l.abs() < 1e-30);
        assert!(g.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn duplicated_batch_has_same_gradient() {
        let net = init_network(&[5, 3, 5], &[Activation::Tanh, Activation::Linear], 2).unwrap();
        let batch = vec![vec![0.1, 0.2, 0.3, 0.4, 0.5], vec![0.9, 0.1, 0.5, 0.5, 0.0]];
        let doubled: Vec<Vec<f64>> = batch.iter().chain(&batch).cloned().collect();
        let (la, ga) = net.loss_and_gradient(&batch).unwrap();
        let (lb, gb) = net.loss_and_gradient(&doubled).unwrap();
        assert!((la - lb).abs() < 1e-15);
        for (a, b) in ga.iter().zip(&gb) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}
