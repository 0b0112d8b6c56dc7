//! Adam optimizer over flat parameter vectors, with bias correction.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AdamError {
    #[error("gradient length {got} does not match parameter length {want}")]
    Shape { got: usize, want: usize },
    #[error("non-finite gradient component {value} at index {index} (step {step})")]
    NonFiniteGradient { index: usize, value: f64, step: u64 },
}

/// First/second moment estimates plus hyperparameters. `m` and `v` start at
/// zero; `v` stays non-negative by construction.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub learning_rate: f64,
}

impl AdamState {
    /// Conventional defaults: beta1 = 0.9, beta2 = 0.999, epsilon = 1e-8.
    pub fn new(n_params: usize, learning_rate: f64) -> Self {
        Self {
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            t: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            learning_rate,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    /// One bias-corrected update in place. Aborts without touching the
    /// parameters or moments when any gradient component is non-finite.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<(), AdamError> {
        if grads.len() != params.len() || params.len() != self.m.len() {
            return Err(AdamError::Shape { got: grads.len(), want: self.m.len() });
        }
        if let Some(index) = grads.iter().position(|g| !g.is_finite()) {
            return Err(AdamError::NonFiniteGradient { index, value: grads[index], step: self.t + 1 });
        }
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
        }
        Ok(())
    }
}
