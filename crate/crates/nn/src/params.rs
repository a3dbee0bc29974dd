//! Realized parameters of a [`NetworkSpec`].

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{NnError, Result};
use crate::graph::{BatchStats, Gradients, Graph, Var};
use crate::spec::{LayerSpec, NetworkSpec, Resample};
use crate::tensor::Tensor;

pub const BN_MOMENTUM: f64 = 0.1;

/// Whether dropout is active and which statistics batch norm uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    /// Dropout on; batch statistics, recorded for the running averages.
    Train,
    /// Dropout off; running statistics.
    Eval,
    /// Dropout off; statistics of the current batch, not recorded.
    BatchEval,
}

/// Named trainable tensors plus batch-norm running statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSet {
    pub params: BTreeMap<String, Tensor>,
    pub buffers: BTreeMap<String, Tensor>,
    pub mode: Mode,
}

/// Parameters bound onto a [`Graph`].
pub struct Bound {
    vars: BTreeMap<String, Var>,
}

impl Bound {
    /// Wraps vars already on a graph, keyed by parameter name.
    pub fn from_vars(vars: BTreeMap<String, Var>) -> Self {
        Bound { vars }
    }

    pub fn get(&self, name: &str) -> Result<Var> {
        self.vars
            .get(name)
            .copied()
            .ok_or_else(|| NnError::MissingParam(name.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Var)> {
        self.vars.iter()
    }

    /// Moves the gradients of these parameters out of `grads`, by name.
    /// Parameters the loss does not depend on are omitted.
    pub fn gradients(&self, grads: &mut Gradients) -> BTreeMap<String, Tensor> {
        self.vars
            .iter()
            .filter_map(|(name, &v)| grads.take(v).map(|t| (name.clone(), t)))
            .collect()
    }
}

fn conv_weight_shape(
    channels_in: usize,
    channels_out: usize,
    kernel: usize,
    resample: Resample,
    groups: usize,
) -> [usize; 4] {
    match resample {
        Resample::Up(_) => [channels_in, channels_out, kernel, kernel],
        _ => [channels_out, channels_in / groups, kernel, kernel],
    }
}

/// Parameter names and shapes implied by a spec, in layer order.
pub fn param_shapes(spec: &NetworkSpec) -> Vec<(String, Vec<usize>)> {
    let mut out = Vec::new();
    for (i, layer) in spec.layers.iter().enumerate() {
        match *layer {
            LayerSpec::Conv {
                channels_in,
                channels_out,
                kernel,
                resample,
                groups,
            } => {
                let ws = conv_weight_shape(channels_in, channels_out, kernel, resample, groups);
                out.push((format!("{i}.weight"), ws.to_vec()));
                out.push((format!("{i}.bias"), vec![channels_out]));
            }
            LayerSpec::BatchNorm { channels } => {
                out.push((format!("{i}.gamma"), vec![channels]));
                out.push((format!("{i}.beta"), vec![channels]));
            }
            LayerSpec::ResnetBlock {
                channels, kernel, ..
            } => {
                for part in ["conv1", "conv2"] {
                    out.push((
                        format!("{i}.{part}.weight"),
                        vec![channels, channels, kernel, kernel],
                    ));
                    out.push((format!("{i}.{part}.bias"), vec![channels]));
                }
                for part in ["bn1", "bn2"] {
                    out.push((format!("{i}.{part}.gamma"), vec![channels]));
                    out.push((format!("{i}.{part}.beta"), vec![channels]));
                }
            }
            _ => {}
        }
    }
    out
}

fn bn_prefixes(spec: &NetworkSpec) -> Vec<(String, usize)> {
    let mut out = Vec::new();
    for (i, layer) in spec.layers.iter().enumerate() {
        match *layer {
            LayerSpec::BatchNorm { channels } => out.push((format!("{i}"), channels)),
            LayerSpec::ResnetBlock { channels, .. } => {
                out.push((format!("{i}.bn1"), channels));
                out.push((format!("{i}.bn2"), channels));
            }
            _ => {}
        }
    }
    out
}

impl ParamSet {
    /// Random initialization: conv weights `N(0, 0.02)`, batch-norm scales
    /// `N(1, 0.02)`, biases and shifts zero.
    pub fn init<R: Rng + ?Sized>(spec: &NetworkSpec, rng: &mut R) -> Result<Self> {
        spec.validate()?;
        let mut params = BTreeMap::new();
        for (name, shape) in param_shapes(spec) {
            let t = if name.ends_with("weight") {
                Tensor::normal(&shape, 0.02, rng)
            } else if name.ends_with("gamma") {
                Tensor::normal(&shape, 0.02, rng).map(|v| v + 1.0)
            } else {
                Tensor::zeros(&shape)
            };
            params.insert(name, t);
        }
        let mut buffers = BTreeMap::new();
        for (prefix, c) in bn_prefixes(spec) {
            buffers.insert(format!("{prefix}.running_mean"), Tensor::zeros(&[c]));
            buffers.insert(format!("{prefix}.running_var"), Tensor::ones(&[c]));
        }
        Ok(ParamSet {
            params,
            buffers,
            mode: Mode::Train,
        })
    }

    /// Checks that names and shapes agree exactly with the spec.
    pub fn check_against(&self, spec: &NetworkSpec) -> Result<()> {
        let expected = param_shapes(spec);
        if expected.len() != self.params.len() {
            return Err(NnError::Spec(format!(
                "{}: spec implies {} parameter tensors, set has {}",
                spec.name,
                expected.len(),
                self.params.len()
            )));
        }
        for (name, shape) in expected {
            let t = self
                .params
                .get(&name)
                .ok_or_else(|| NnError::MissingParam(name.clone()))?;
            if t.shape() != shape.as_slice() {
                return Err(NnError::Shape(format!(
                    "{name}: expected {shape:?}, found {:?}",
                    t.shape()
                )));
            }
        }
        Ok(())
    }

    pub fn num_params(&self) -> usize {
        self.params.values().map(Tensor::len).sum()
    }

    pub fn get(&self, name: &str) -> Result<&Tensor> {
        self.params
            .get(name)
            .ok_or_else(|| NnError::MissingParam(name.to_string()))
    }

    /// Binds every parameter onto `g`, differentiable when `trainable`.
    pub fn bind(&self, g: &mut Graph, trainable: bool) -> Bound {
        let vars = self
            .params
            .iter()
            .map(|(name, t)| {
                let v = if trainable {
                    g.param(t.clone())
                } else {
                    g.input(t.clone())
                };
                (name.clone(), v)
            })
            .collect();
        Bound { vars }
    }

    /// Folds batch statistics into the running averages.
    pub fn apply_batch_stats(&mut self, stats: &[(String, BatchStats)]) {
        for (prefix, s) in stats {
            if let Some(rm) = self.buffers.get_mut(&format!("{prefix}.running_mean")) {
                for (r, &m) in rm.data_mut().iter_mut().zip(&s.mean) {
                    *r = (1.0 - BN_MOMENTUM) * *r + BN_MOMENTUM * m;
                }
            }
            if let Some(rv) = self.buffers.get_mut(&format!("{prefix}.running_var")) {
                for (r, &v) in rv.data_mut().iter_mut().zip(&s.var) {
                    *r = (1.0 - BN_MOMENTUM) * *r + BN_MOMENTUM * v;
                }
            }
        }
    }

    /// Largest absolute elementwise difference over shared parameter names.
    pub fn max_abs_diff(&self, other: &ParamSet) -> f64 {
        self.params
            .iter()
            .filter_map(|(k, a)| other.params.get(k).map(|b| a.zip_map(b, |x, y| x - y).max_abs()))
            .fold(0.0, f64::max)
    }

    /// Euclidean distance between two parameter sets over shared names.
    pub fn l2_distance(&self, other: &ParamSet) -> f64 {
        self.params
            .iter()
            .filter_map(|(k, a)| {
                other
                    .params
                    .get(k)
                    .map(|b| a.zip_map(b, |x, y| (x - y) * (x - y)).sum())
            })
            .sum::<f64>()
            .sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn init_matches_spec_and_is_seeded() {
        let spec = NetworkSpec::new(
            "t",
            vec![
                LayerSpec::grouped_conv(4, 4, 3, 4),
                LayerSpec::BatchNorm { channels: 4 },
                LayerSpec::Relu,
                LayerSpec::conv(4, 6, 3, Resample::Up(2)),
            ],
        );
        let a = ParamSet::init(&spec, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let b = ParamSet::init(&spec, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(a, b);
        a.check_against(&spec).unwrap();
        assert_eq!(a.get("0.weight").unwrap().shape(), &[4, 1, 3, 3]);
        assert_eq!(a.get("3.weight").unwrap().shape(), &[4, 6, 3, 3]);
        assert_eq!(a.num_params(), 4 * 9 + 4 + 8 + 4 * 6 * 9 + 6);
    }

    #[test]
    fn running_stats_follow_momentum() {
        let spec = NetworkSpec::new("bn", vec![LayerSpec::BatchNorm { channels: 1 }]);
        let mut p = ParamSet::init(&spec, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        p.apply_batch_stats(&[(
            "0".into(),
            BatchStats {
                mean: vec![2.0],
                var: vec![3.0],
            },
        )]);
        assert!((p.buffers["0.running_mean"].item() - 0.2).abs() < 1e-12);
        assert!((p.buffers["0.running_var"].item() - 1.2).abs() < 1e-12);
    }
}
