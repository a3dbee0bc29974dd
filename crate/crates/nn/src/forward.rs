//! Running a [`NetworkSpec`] on a [`Graph`].

use rand::RngCore;

use crate::error::{NnError, Result};
use crate::graph::{BatchStats, Graph, Var};
use crate::params::{Bound, Mode, ParamSet};
use crate::spec::{LayerSpec, NetworkSpec, Resample};

/// Per-call state of a forward pass.
pub struct ForwardCtx<'r> {
    pub mode: Mode,
    pub rng: &'r mut dyn RngCore,
    /// Batch statistics gathered by training-mode batch norms, keyed by the
    /// buffer prefix they should update.
    pub stats: Vec<(String, BatchStats)>,
}

impl<'r> ForwardCtx<'r> {
    pub fn new(mode: Mode, rng: &'r mut dyn RngCore) -> Self {
        ForwardCtx {
            mode,
            rng,
            stats: Vec::new(),
        }
    }
}

fn batch_norm(
    g: &mut Graph,
    x: Var,
    prefix: &str,
    bound: &Bound,
    params: &ParamSet,
    ctx: &mut ForwardCtx<'_>,
) -> Result<Var> {
    let gamma = bound.get(&format!("{prefix}.gamma"))?;
    let beta = bound.get(&format!("{prefix}.beta"))?;
    match ctx.mode {
        Mode::Train => {
            let (y, stats) = g.batch_norm_train(x, gamma, beta)?;
            ctx.stats.push((prefix.to_string(), stats));
            Ok(y)
        }
        Mode::BatchEval => Ok(g.batch_norm_train(x, gamma, beta)?.0),
        Mode::Eval => {
            let buf = |name: &str| {
                params
                    .buffers
                    .get(&format!("{prefix}.{name}"))
                    .ok_or_else(|| NnError::MissingParam(format!("{prefix}.{name}")))
            };
            let rm = buf("running_mean")?.data().to_vec();
            let rv = buf("running_var")?.data().to_vec();
            g.batch_norm_eval(x, gamma, beta, &rm, &rv)
        }
    }
}

fn conv(
    g: &mut Graph,
    x: Var,
    prefix: &str,
    bound: &Bound,
    kernel: usize,
    resample: Resample,
    groups: usize,
) -> Result<Var> {
    let w = bound.get(&format!("{prefix}.weight"))?;
    let b = bound.get(&format!("{prefix}.bias"))?;
    let pad = kernel / 2;
    match resample {
        Resample::Keep => g.conv2d(x, w, Some(b), 1, pad, groups),
        Resample::Down(f) => g.conv2d(x, w, Some(b), f, pad, groups),
        Resample::Up(f) => g.conv_transpose2d(x, w, Some(b), f, pad, f - 1),
    }
}

/// Applies the layers `range` of `spec` to `x`.
///
/// Parameter names are indexed by absolute layer position, so a slice of a
/// spec can be run against the full parameter set.
pub fn forward_layers(
    spec: &NetworkSpec,
    range: std::ops::Range<usize>,
    g: &mut Graph,
    bound: &Bound,
    params: &ParamSet,
    x: Var,
    ctx: &mut ForwardCtx<'_>,
) -> Result<Var> {
    let mut h = x;
    for i in range {
        let layer = &spec.layers[i];
        h = match *layer {
            LayerSpec::Conv {
                kernel,
                resample,
                groups,
                ..
            } => conv(g, h, &format!("{i}"), bound, kernel, resample, groups)?,
            LayerSpec::BatchNorm { .. } => batch_norm(g, h, &format!("{i}"), bound, params, ctx)?,
            LayerSpec::Relu => g.relu(h),
            LayerSpec::LeakyRelu { slope } => g.leaky_relu(h, slope),
            LayerSpec::Dropout { rate } => match ctx.mode {
                Mode::Train if rate > 0.0 => g.dropout(h, rate, &mut *ctx.rng),
                _ => h,
            },
            LayerSpec::Tanh => g.tanh(h),
            LayerSpec::Sigmoid => g.sigmoid(h, 1.0),
            LayerSpec::ResnetBlock {
                kernel, dropout, ..
            } => {
                let y = conv(g, h, &format!("{i}.conv1"), bound, kernel, Resample::Keep, 1)?;
                let y = batch_norm(g, y, &format!("{i}.bn1"), bound, params, ctx)?;
                let mut y = g.relu(y);
                if ctx.mode == Mode::Train && dropout > 0.0 {
                    y = g.dropout(y, dropout, &mut *ctx.rng);
                }
                let y = conv(g, y, &format!("{i}.conv2"), bound, kernel, Resample::Keep, 1)?;
                let y = batch_norm(g, y, &format!("{i}.bn2"), bound, params, ctx)?;
                g.add(h, y)?
            }
        };
    }
    Ok(h)
}

/// Applies the whole of `spec` to `x`.
pub fn forward(
    spec: &NetworkSpec,
    g: &mut Graph,
    bound: &Bound,
    params: &ParamSet,
    x: Var,
    ctx: &mut ForwardCtx<'_>,
) -> Result<Var> {
    if let Some(c) = spec.input_channels() {
        let shape = g.shape(x);
        if shape.len() != 4 || shape[1] != c {
            return Err(NnError::Shape(format!(
                "{}: expected input with {} channels, got {:?}",
                spec.name, c, shape
            )));
        }
    }
    forward_layers(spec, 0..spec.layers.len(), g, bound, params, x, ctx)
}
