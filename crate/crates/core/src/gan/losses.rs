//! Loss terms built on the autodiff graph.

use mcgan_nn::{forward_layers, Bound, ForwardCtx, Graph, ParamSet, Var};

use super::arch::DiscriminatorSpec;
use crate::error::Result;

/// Patch maps of the local path and of the global path.
#[derive(Debug, Clone, Copy)]
pub struct PatchOutputs {
    pub local: Var,
    pub global: Var,
}

/// Runs a conditional discriminator on `concat(condition, sample)`.
pub fn discriminate(
    d: &DiscriminatorSpec,
    g: &mut Graph,
    bound: &Bound,
    params: &ParamSet,
    condition: Var,
    sample: Var,
    ctx: &mut ForwardCtx<'_>,
) -> Result<PatchOutputs> {
    let input = g.concat_channels(&[condition, sample])?;
    let n = d.spec.layers.len();
    let global = forward_layers(&d.spec, 0..n, g, bound, params, input, ctx)?;
    let local = forward_layers(&d.spec, d.local_start..n, g, bound, params, input, ctx)?;
    Ok(PatchOutputs { local, global })
}

/// `mean |a - b|`.
pub fn l1(g: &mut Graph, a: Var, b: Var) -> Result<Var> {
    let d = g.sub(a, b)?;
    let d = g.abs(d);
    Ok(g.mean(d))
}

/// `mean (x - target)^2`.
pub fn squared_error_to(g: &mut Graph, x: Var, target: f64) -> Var {
    let d = g.add_scalar(x, -target);
    let d = g.square(d);
    g.mean(d)
}

/// Generator side: `mean (D(fake) - 1)^2` for the local and global maps.
pub fn lsgan_generator(g: &mut Graph, fake: &PatchOutputs) -> (Var, Var) {
    (squared_error_to(g, fake.local, 1.0), squared_error_to(g, fake.global, 1.0))
}

/// Discriminator side: `mean (D(real) - 1)^2 + mean D(fake)^2` per map.
pub fn lsgan_discriminator(g: &mut Graph, real: &PatchOutputs, fake: &PatchOutputs) -> Result<(Var, Var)> {
    let mut side = |r: Var, f: Var| -> Result<Var> {
        let a = squared_error_to(g, r, 1.0);
        let b = squared_error_to(g, f, 0.0);
        Ok(g.add(a, b)?)
    };
    let local = side(real.local, fake.local)?;
    let global = side(real.global, fake.global)?;
    Ok((local, global))
}

/// Differentiable near-binary mask `σ(k·v)`.
pub fn binary_mask(g: &mut Graph, x: Var, sharpness: f64) -> Var {
    g.sigmoid(x, sharpness)
}

/// `mean (σ(k·a) - σ(k·b))^2`.
pub fn mask_mse(g: &mut Graph, a: Var, b: Var, sharpness: f64) -> Result<Var> {
    let ma = binary_mask(g, a, sharpness);
    let mb = binary_mask(g, b, sharpness);
    let d = g.sub(ma, mb)?;
    let d = g.square(d);
    Ok(g.mean(d))
}

/// `Σ wᵢ·termᵢ`, skipping zero weights. Returns `None` if every weight is
/// zero.
pub fn weighted_sum(g: &mut Graph, terms: &[(f64, Var)]) -> Result<Option<Var>> {
    let mut acc: Option<Var> = None;
    for &(w, t) in terms {
        if w == 0.0 {
            continue;
        }
        let s = g.scale(t, w);
        acc = Some(match acc {
            None => s,
            Some(a) => g.add(a, s)?,
        });
    }
    Ok(acc)
}

/// Gathers whole batch items: output item `i` is input item `items[i]`.
pub fn select_items(g: &mut Graph, x: Var, items: &[usize]) -> Result<Var> {
    let c = g.shape(x)[1];
    let picks: Vec<(usize, usize)> = items.iter().flat_map(|&b| (0..c).map(move |ch| (b, ch))).collect();
    Ok(g.select_planes(x, items.len(), c, &picks)?)
}
