use std::collections::BTreeMap;

use crate::error::{PareError, Result};
use crate::numerics::params::ParamStore;
use crate::numerics::tensor::Tensor;

/// Adam hyperparameters. The L2 term is loss-coupled: `weight_decay * theta`
/// is added to the gradient before the moment updates, and only for
/// parameters registered with `decay = true`.
#[derive(Clone, Copy, Debug)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
}

impl Default for AdamConfig {
    fn default() -> AdamConfig {
        AdamConfig {
            lr: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 0.0001,
        }
    }
}

/// Per-parameter first and second moment estimates plus the step counter.
#[derive(Clone, Debug)]
pub struct AdamState {
    pub config: AdamConfig,
    first: BTreeMap<String, Tensor>,
    second: BTreeMap<String, Tensor>,
    step: u64,
}

impl AdamState {
    pub fn new(config: AdamConfig) -> AdamState {
        AdamState {
            config,
            first: BTreeMap::new(),
            second: BTreeMap::new(),
            step: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// One bias-corrected Adam update over every parameter in the store,
    /// consuming the accumulated gradients (they are zeroed afterwards).
    pub fn step(&mut self, store: &mut ParamStore) -> Result<()> {
        self.step = self
            .step
            .checked_add(1)
            .ok_or_else(|| PareError::numeric("adam step counter overflow"))?;
        let t = self.step;
        let cfg = self.config;
        let bias1 = 1.0 - cfg.beta1.powi(t.min(i32::MAX as u64) as i32);
        let bias2 = 1.0 - cfg.beta2.powi(t.min(i32::MAX as u64) as i32);

        for (name, param) in store.iter_mut() {
            if !param.grad.all_finite() {
                return Err(PareError::numeric(format!(
                    "non-finite gradient for parameter {name}"
                )));
            }
            let m = self
                .first
                .entry(name.clone())
                .or_insert_with(|| Tensor::zeros(param.value.shape()));
            let v = self
                .second
                .entry(name.clone())
                .or_insert_with(|| Tensor::zeros(param.value.shape()));
            let decay = if param.decay { cfg.weight_decay } else { 0.0 };
            for k in 0..param.value.len() {
                let g = param.grad.data()[k] + decay * param.value.data()[k];
                let mk = cfg.beta1 * m.data()[k] + (1.0 - cfg.beta1) * g;
                let vk = cfg.beta2 * v.data()[k] + (1.0 - cfg.beta2) * g * g;
                m.data_mut()[k] = mk;
                v.data_mut()[k] = vk;
                let m_hat = mk / bias1;
                let v_hat = vk / bias2;
                param.value.data_mut()[k] -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
            }
            param.grad.fill(0.0);
        }
        Ok(())
    }
}
