//! OrnaNet: an RGB generator that paints color and ornamentation onto
//! grayscale glyphs, processing the 26 letters of a font as one batch.

use mcgan_nn::{Graph, NetworkSpec, Tensor, Var};
use serde::{Deserialize, Serialize};

use crate::error::{McganError, Result};
use crate::gan::losses::{l1, lsgan_discriminator, lsgan_generator, mask_mse, select_items};
use crate::gan::{generator_spec, DiscriminatorArch, DiscriminatorSpec, GeneratorArch, PatchOutputs};
use crate::glyph_net::{DiscriminatorLossTerms, PatchMaps};

pub const G2_NAME: &str = "G2";
pub const D2_NAME: &str = "D2";

/// Default sharpness `k` of the mask sigmoid on `[-1, 1]` values.
pub const DEFAULT_MASK_SHARPNESS: f64 = 20.0;

/// G₂: G₁'s trunk on 3-channel images, without the grouped input layer.
pub fn build_g2_spec(arch: &GeneratorArch) -> NetworkSpec {
    generator_spec(G2_NAME, 3, 3, None, arch)
}

/// D₂ over `concat(input image, output image)`.
pub fn build_d2_spec(arch: &DiscriminatorArch) -> DiscriminatorSpec {
    DiscriminatorSpec::new(D2_NAME, 6, arch)
}

/// Elementwise `σ(k·v)`.
pub fn binary_mask(img: &Tensor, sharpness: f64) -> Tensor {
    img.map(|v| mcgan_nn::graph::sigmoid(sharpness * v))
}

/// `λ₂` by epoch: `before` until `switch_epoch`, `after` from then on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lambda2Schedule {
    pub before: f64,
    pub after: f64,
    pub switch_epoch: u64,
}

impl Default for Lambda2Schedule {
    fn default() -> Self {
        Lambda2Schedule {
            before: 300.0,
            after: 3.0,
            switch_epoch: 200,
        }
    }
}

impl Lambda2Schedule {
    pub fn at(&self, epoch: u64) -> f64 {
        if epoch < self.switch_epoch {
            self.before
        } else {
            self.after
        }
    }
}

/// What the generator output's mask is compared with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MaskTarget {
    /// Ground-truth observed letters, on observed positions only.
    Truth,
    /// The generator's own input, on all 26 letters.
    Input,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrnaNetLossTerms {
    pub lsgan_local: f64,
    pub lsgan_global: f64,
    pub l1: f64,
    pub mask_mse: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

impl OrnaNetLossTerms {
    pub fn generator_total(&self) -> f64 {
        self.lsgan_local + self.lsgan_global + self.lambda1 * self.l1 + self.lambda2 * self.mask_mse
    }
}

/// Graph nodes of the generator-side terms.
#[derive(Debug, Clone, Copy)]
pub struct OrnaTermVars {
    pub lsgan_local: Var,
    pub lsgan_global: Var,
    pub l1: Var,
    pub mask_mse: Var,
}

/// Generator-side OrnaNet terms. `g2_out` and `x2` are `26×3×64×64`;
/// `y2_observed` holds the observed letters (in `observed` order) as
/// `n×3×64×64`; `fake` is D₂ on all 26 letters.
#[allow(clippy::too_many_arguments)]
pub fn ornanet_generator_terms(
    g: &mut Graph,
    g2_out: Var,
    x2: Var,
    y2_observed: Var,
    observed: &[usize],
    fake: &PatchOutputs,
    sharpness: f64,
    mask_target: MaskTarget,
) -> Result<OrnaTermVars> {
    if observed.is_empty() {
        return Err(McganError::EmptyObservationSet);
    }
    let (lsgan_local, lsgan_global) = lsgan_generator(g, fake);
    let out_obs = select_items(g, g2_out, observed)?;
    let l1v = l1(g, y2_observed, out_obs)?;
    let mask = match mask_target {
        MaskTarget::Truth => mask_mse(g, y2_observed, out_obs, sharpness)?,
        MaskTarget::Input => mask_mse(g, x2, g2_out, sharpness)?,
    };
    Ok(OrnaTermVars {
        lsgan_local,
        lsgan_global,
        l1: l1v,
        mask_mse: mask,
    })
}

/// Evaluates both OrnaNet objectives on given tensors. `d2_real` is D₂ on
/// the observed letters, `d2_fake` on all 26.
#[allow(clippy::too_many_arguments)]
pub fn ornanet_loss(
    g2_out: &Tensor,
    x2: &Tensor,
    y2_observed: &Tensor,
    observed: &[usize],
    d2_real: PatchMaps<'_>,
    d2_fake: PatchMaps<'_>,
    lambda1: f64,
    lambda2: f64,
    sharpness: f64,
    mask_target: MaskTarget,
) -> Result<(OrnaNetLossTerms, DiscriminatorLossTerms)> {
    if g2_out.shape() != x2.shape() {
        return Err(McganError::ShapeMismatch {
            expected: x2.shape().to_vec(),
            actual: g2_out.shape().to_vec(),
        });
    }
    if y2_observed.shape().first() != Some(&observed.len()) {
        return Err(McganError::InvalidInput(format!(
            "{} observed letters but ground truth has shape {:?}",
            observed.len(),
            y2_observed.shape()
        )));
    }
    let mut g = Graph::new();
    let (go, x, y) = (g.input(g2_out.clone()), g.input(x2.clone()), g.input(y2_observed.clone()));
    let real = PatchOutputs {
        local: g.input(d2_real.local.clone()),
        global: g.input(d2_real.global.clone()),
    };
    let fake = PatchOutputs {
        local: g.input(d2_fake.local.clone()),
        global: g.input(d2_fake.global.clone()),
    };
    let t = ornanet_generator_terms(&mut g, go, x, y, observed, &fake, sharpness, mask_target)?;
    let (dl, dg) = lsgan_discriminator(&mut g, &real, &fake)?;
    Ok((
        OrnaNetLossTerms {
            lsgan_local: g.value(t.lsgan_local).item(),
            lsgan_global: g.value(t.lsgan_global).item(),
            l1: g.value(t.l1).item(),
            mask_mse: g.value(t.mask_mse).item(),
            lambda1,
            lambda2,
        },
        DiscriminatorLossTerms {
            local: g.value(dl).item(),
            global: g.value(dg).item(),
        },
    ))
}
