use super::network::{Gradients, NetworkParams};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// First and second moment estimates, shaped like the parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    m: Gradients,
    v: Gradients,
    pub step: u64,
}

impl AdamState {
    pub fn new(params: &NetworkParams) -> Self {
        Self {
            m: Gradients::zeros_like(params),
            v: Gradients::zeros_like(params),
            step: 0,
        }
    }
}

fn same_shape(a: &[Vec<f64>], b: &[Vec<f64>]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.len() == y.len())
}

/// One bias-corrected Adam update of `params` in place.
pub fn adam_step(params: &mut NetworkParams, state: &mut AdamState, grads: &Gradients, config: &AdamConfig) -> Result<()> {
    if !same_shape(&params.weights, &grads.weights)
        || !same_shape(&params.biases, &grads.biases)
        || !same_shape(&state.m.weights, &grads.weights)
        || !same_shape(&state.m.biases, &grads.biases)
    {
        return Err(Error::BadShape("optimizer state, gradients and parameters differ in shape".into()));
    }
    state.step += 1;
    let t = state.step as i32;
    let correction1 = 1.0 - config.beta1.powi(t);
    let correction2 = 1.0 - config.beta2.powi(t);
    let update = |p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
        for i in 0..p.len() {
            m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
            v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
            let m_hat = m[i] / correction1;
            let v_hat = v[i] / correction2;
            p[i] -= config.learning_rate * m_hat / (v_hat.sqrt() + config.epsilon);
        }
    };
    for l in 0..params.weights.len() {
        update(&mut params.weights[l], &grads.weights[l], &mut state.m.weights[l], &mut state.v.weights[l]);
        update(&mut params.biases[l], &grads.biases[l], &mut state.m.biases[l], &mut state.v.biases[l]);
    }
    Ok(())
}
