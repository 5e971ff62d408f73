use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::loss::{smooth_l1, smooth_l1_grad};
use crate::{Error, Result};

/// Fully connected ReLU network with a single sigmoid output.
///
/// `weights[l]` is row-major with shape `layer_sizes[l + 1] x layer_sizes[l]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    pub layer_sizes: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

/// Gradient of the loss with the same layout as [`NetworkParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(params: &NetworkParams) -> Self {
        Self {
            weights: params.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: params.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }
}

fn check_sizes(layer_sizes: &[usize]) -> Result<()> {
    if layer_sizes.len() < 2 {
        return Err(Error::BadShape("need at least an input and an output layer".into()));
    }
    if layer_sizes.contains(&0) {
        return Err(Error::BadShape(format!("zero-width layer in {layer_sizes:?}")));
    }
    if layer_sizes.last() != Some(&1) {
        return Err(Error::BadShape(format!("output width must be 1, got {layer_sizes:?}")));
    }
    Ok(())
}

/// Glorot-uniform weights, zero biases, deterministic per seed.
pub fn init_network(layer_sizes: &[usize], seed: u64) -> Result<NetworkParams> {
    check_sizes(layer_sizes)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights = Vec::new();
    let mut biases = Vec::new();
    for pair in layer_sizes.windows(2) {
        let (fan_in, fan_out) = (pair[0], pair[1]);
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        weights.push((0..fan_in * fan_out).map(|_| rng.gen_range(-limit..=limit)).collect());
        biases.push(vec![0.0; fan_out]);
    }
    Ok(NetworkParams {
        layer_sizes: layer_sizes.to_vec(),
        weights,
        biases,
    })
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Pre-activations and activations of every layer for one input.
struct Trace {
    pre: Vec<Vec<f64>>,
    act: Vec<Vec<f64>>,
}

impl NetworkParams {
    pub fn input_width(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn depth(&self) -> usize {
        self.weights.len()
    }

    /// Checks that weight and bias buffers match `layer_sizes`.
    pub fn validate(&self) -> Result<()> {
        check_sizes(&self.layer_sizes)?;
        let layers = self.layer_sizes.len() - 1;
        if self.weights.len() != layers || self.biases.len() != layers {
            return Err(Error::BadShape(format!(
                "{} weight and {} bias layers for {layers} connections",
                self.weights.len(),
                self.biases.len()
            )));
        }
        for (l, pair) in self.layer_sizes.windows(2).enumerate() {
            if self.weights[l].len() != pair[0] * pair[1] || self.biases[l].len() != pair[1] {
                return Err(Error::BadShape(format!("layer {l} does not match {} -> {}", pair[0], pair[1])));
            }
        }
        Ok(())
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_width() {
            return Err(Error::BadShape(format!(
                "input width {} != network input {}",
                x.len(),
                self.input_width()
            )));
        }
        Ok(())
    }

    fn trace(&self, x: &[f64]) -> Trace {
        let last = self.depth() - 1;
        let mut pre = Vec::with_capacity(self.depth());
        let mut act = Vec::with_capacity(self.depth() + 1);
        act.push(x.to_vec());
        for l in 0..self.depth() {
            let (n_in, n_out) = (self.layer_sizes[l], self.layer_sizes[l + 1]);
            let input = &act[l];
            let w = &self.weights[l];
            let z: Vec<f64> = (0..n_out)
                .map(|j| {
                    let row = &w[j * n_in..(j + 1) * n_in];
                    self.biases[l][j] + row.iter().zip(input).map(|(a, b)| a * b).sum::<f64>()
                })
                .collect();
            let a = if l == last {
                z.iter().map(|&v| sigmoid(v)).collect()
            } else {
                z.iter().map(|&v| v.max(0.0)).collect()
            };
            pre.push(z);
            act.push(a);
        }
        Trace { pre, act }
    }

    /// Probability of the positive class.
    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        self.check_input(x)?;
        Ok(self.trace(x).act.last().expect("output layer")[0])
    }

    /// Mean Smooth L1 loss over the batch and its exact gradient.
    pub fn gradients(&self, xs: &[Vec<f64>], targets: &[f64], beta: f64) -> Result<(f64, Gradients)> {
        if xs.is_empty() || xs.len() != targets.len() {
            return Err(Error::BadShape(format!(
                "batch of {} inputs and {} targets",
                xs.len(),
                targets.len()
            )));
        }
        let n = xs.len() as f64;
        let mut grads = Gradients::zeros_like(self);
        let mut loss = 0.0;
        for (x, &target) in xs.iter().zip(targets) {
            self.check_input(x)?;
            let trace = self.trace(x);
            let out = trace.act[self.depth()][0];
            let diff = out - target;
            loss += smooth_l1(diff, beta);
            let mut delta = vec![smooth_l1_grad(diff, beta) / n * out * (1.0 - out)];
            for l in (0..self.depth()).rev() {
                let n_in = self.layer_sizes[l];
                let input = &trace.act[l];
                let gw = &mut grads.weights[l];
                for (j, &d) in delta.iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    grads.biases[l][j] += d;
                    for (g, &a) in gw[j * n_in..(j + 1) * n_in].iter_mut().zip(input) {
                        *g += d * a;
                    }
                }
                if l == 0 {
                    break;
                }
                let w = &self.weights[l];
                let below = &trace.pre[l - 1];
                delta = (0..n_in)
                    .map(|i| {
                        if below[i] <= 0.0 {
                            return 0.0;
                        }
                        delta.iter().enumerate().map(|(j, &d)| w[j * n_in + i] * d).sum()
                    })
                    .collect();
            }
        }
        Ok((loss / n, grads))
    }

    /// Mean Smooth L1 loss over the batch.
    pub fn loss(&self, xs: &[Vec<f64>], targets: &[f64], beta: f64) -> Result<f64> {
        let mut total = 0.0;
        for (x, &t) in xs.iter().zip(targets) {
            total += smooth_l1(self.forward(x)? - t, beta);
        }
        Ok(total / xs.len().max(1) as f64)
    }
}
