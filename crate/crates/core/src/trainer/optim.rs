use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::math::sqrt;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OptimizerConfig {
    Sgd { lr: f64, momentum: f64 },
    Adam { lr: f64, beta1: f64, beta2: f64, eps: f64 },
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig::Adam { lr: 1e-3, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

impl OptimizerConfig {
    pub fn lr(&self) -> f64 {
        match *self {
            OptimizerConfig::Sgd { lr, .. } | OptimizerConfig::Adam { lr, .. } => lr,
        }
    }

    pub fn with_lr(self, lr: f64) -> Self {
        match self {
            OptimizerConfig::Sgd { momentum, .. } => OptimizerConfig::Sgd { lr, momentum },
            OptimizerConfig::Adam { beta1, beta2, eps, .. } => OptimizerConfig::Adam { lr, beta1, beta2, eps },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let lr = self.lr();
        if !(lr >= 0.0 && lr.is_finite()) {
            bail!(Argument, "learning rate must be >= 0, got {lr}");
        }
        match *self {
            OptimizerConfig::Sgd { momentum, .. } if !(0.0..1.0).contains(&momentum) => {
                bail!(Argument, "momentum must be in [0, 1), got {momentum}")
            }
            OptimizerConfig::Adam { beta1, beta2, eps, .. } => {
                if !(0.0..1.0).contains(&beta1) || !(0.0..1.0).contains(&beta2) {
                    bail!(Argument, "Adam betas must be in [0, 1), got {beta1}, {beta2}");
                }
                if !(eps > 0.0) {
                    bail!(Argument, "Adam eps must be > 0, got {eps}");
                }
            }
            _ => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Optimizer {
    cfg: OptimizerConfig,
    steps: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Optimizer {
    pub fn new(cfg: OptimizerConfig, n_params: usize) -> Self {
        let v = match cfg {
            OptimizerConfig::Adam { .. } => vec![0.0; n_params],
            OptimizerConfig::Sgd { .. } => Vec::new(),
        };
        Self { cfg, steps: 0, m: vec![0.0; n_params], v }
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// One update in place. A zero learning rate leaves `params` untouched.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        assert_eq!(params.len(), grads.len(), "gradient length must match parameters");
        self.steps += 1;
        match self.cfg {
            OptimizerConfig::Sgd { lr, momentum } => {
                for ((p, g), m) in params.iter_mut().zip(grads).zip(&mut self.m) {
                    *m = momentum * *m + g;
                    if lr != 0.0 {
                        *p -= lr * *m;
                    }
                }
            }
            OptimizerConfig::Adam { lr, beta1, beta2, eps } => {
                let t = self.steps as i32;
                let c1 = 1.0 - libm::pow(beta1, f64::from(t));
                let c2 = 1.0 - libm::pow(beta2, f64::from(t));
                for (((p, g), m), v) in params.iter_mut().zip(grads).zip(&mut self.m).zip(&mut self.v) {
                    *m = beta1 * *m + (1.0 - beta1) * g;
                    *v = beta2 * *v + (1.0 - beta2) * g * g;
                    if lr != 0.0 {
                        *p -= lr * (*m / c1) / (sqrt(*v / c2) + eps);
                    }
                }
            }
        }
    }
}
