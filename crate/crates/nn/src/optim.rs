//! Adam with bias correction.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{NnError, Result};
use crate::params::ParamSet;
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 2e-4,
            beta1: 0.5,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub config: AdamConfig,
    pub step: u64,
    pub first_moment: BTreeMap<String, Tensor>,
    pub second_moment: BTreeMap<String, Tensor>,
}

impl Adam {
    pub fn new(config: AdamConfig) -> Self {
        Adam {
            config,
            step: 0,
            first_moment: BTreeMap::new(),
            second_moment: BTreeMap::new(),
        }
    }

    /// One update. Parameters without a gradient are left untouched.
    pub fn step(&mut self, params: &mut ParamSet, grads: &BTreeMap<String, Tensor>) -> Result<()> {
        for (name, g) in grads {
            if !g.all_finite() {
                return Err(NnError::NonFinite(format!("gradient of {name}")));
            }
        }
        self.step += 1;
        let AdamConfig {
            lr,
            beta1,
            beta2,
            eps,
        } = self.config;
        let bc1 = 1.0 - beta1.powi(self.step as i32);
        let bc2 = 1.0 - beta2.powi(self.step as i32);
        for (name, g) in grads {
            let p = params
                .params
                .get_mut(name)
                .ok_or_else(|| NnError::MissingParam(name.clone()))?;
            let m = self
                .first_moment
                .entry(name.clone())
                .or_insert_with(|| Tensor::zeros(g.shape()));
            let v = self
                .second_moment
                .entry(name.clone())
                .or_insert_with(|| Tensor::zeros(g.shape()));
            for (((pi, &gi), mi), vi) in p
                .data_mut()
                .iter_mut()
                .zip(g.data())
                .zip(m.data_mut())
                .zip(v.data_mut())
            {
                *mi = beta1 * *mi + (1.0 - beta1) * gi;
                *vi = beta2 * *vi + (1.0 - beta2) * gi * gi;
                let mhat = *mi / bc1;
                let vhat = *vi / bc2;
                *pi -= lr * mhat / (vhat.sqrt() + eps);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Mode;

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut params = ParamSet {
            params: BTreeMap::from([("w".to_string(), Tensor::from_vec(&[2], vec![1.0, -1.0]).unwrap())]),
            buffers: BTreeMap::new(),
            mode: Mode::Train,
        };
        let mut opt = Adam::new(AdamConfig {
            lr: 0.1,
            ..AdamConfig::default()
        });
        let grads = BTreeMap::from([("w".to_string(), Tensor::from_vec(&[2], vec![3.0, -0.5]).unwrap())]);
        opt.step(&mut params, &grads).unwrap();
        let w = params.params["w"].data();
        assert!((w[0] - 0.9).abs() < 1e-6);
        assert!((w[1] + 0.9).abs() < 1e-6);
    }

    #[test]
    fn minimizes_a_quadratic() {
        let mut params = ParamSet {
            params: BTreeMap::from([("w".to_string(), Tensor::scalar(5.0))]),
            buffers: BTreeMap::new(),
            mode: Mode::Train,
        };
        let mut opt = Adam::new(AdamConfig {
            lr: 0.05,
            beta1: 0.9,
            ..AdamConfig::default()
        });
        for _ in 0..2000 {
            let w = params.params["w"].item();
            let grads = BTreeMap::from([("w".to_string(), Tensor::scalar(2.0 * (w - 2.0)))]);
            opt.step(&mut params, &grads).unwrap();
        }
        assert!((params.params["w"].item() - 2.0).abs() < 1e-2);
    }

    #[test]
    fn rejects_non_finite_gradient() {
        let mut params = ParamSet {
            params: BTreeMap::from([("w".to_string(), Tensor::scalar(0.0))]),
            buffers: BTreeMap::new(),
            mode: Mode::Train,
        };
        let mut opt = Adam::new(AdamConfig::default());
        let grads = BTreeMap::from([("w".to_string(), Tensor::scalar(f64::NAN))]);
        assert!(matches!(opt.step(&mut params, &grads), Err(NnError::NonFinite(_))));
        assert_eq!(opt.step, 0);
    }
}
