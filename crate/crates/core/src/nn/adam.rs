use serde::{Deserialize, Serialize};

use super::mlp::Mlp;
use crate::error::{invalid, Result};

/// Adam moments and hyperparameters for one network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    step: u64,
}

impl AdamState {
    pub fn new(net: &Mlp, lr: f64) -> Self {
        let n = net.params().len();
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; n],
            v: vec![0.0; n],
            step: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// One bias-corrected Adam step on `params` along `grad`.
    pub fn apply(&mut self, params: &mut [f64], grad: &[f64]) -> Result<()> {
        if params.len() != self.m.len() || grad.len() != self.m.len() {
            return invalid("Adam state does not match the parameter count");
        }
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let mh = self.m[i] / c1;
            let vh = self.v[i] / c2;
            params[i] -= self.lr * mh / (vh.sqrt() + self.eps);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainStats {
    /// Masked MSE before the step.
    pub loss: f64,
    pub used: usize,
    /// Samples dropped for a non-finite target.
    pub skipped: usize,
}

/// One Adam step on the masked MSE `mean((Q(x)[a] − target)²)`.
/// With nothing to learn from (all targets non-finite, or zero gradient) the
/// parameters are left untouched.
pub fn train_batch(
    net: &mut Mlp,
    adam: &mut AdamState,
    inputs: &[Vec<f64>],
    actions: &[usize],
    targets: &[f64],
) -> Result<TrainStats> {
    let bg = net.loss_and_grad(inputs, actions, targets)?;
    if bg.used > 0 && bg.grad.iter().any(|&g| g != 0.0) {
        adam.apply(net.params_mut(), &bg.grad)?;
    }
    Ok(TrainStats {
        loss: bg.loss,
        used: bg.used,
        skipped: bg.skipped,
    })
}
