//! GlyphNet: a generator over 26-channel glyph stacks (one channel per
//! letter) trained to restore masked-out letters, with a conditional
//! local+global discriminator.

use mcgan_nn::{Graph, NetworkSpec, ParamSet, Tensor};
use serde::{Deserialize, Serialize};

use crate::error::{McganError, Result};
use crate::font_data::store::read_stack_png;
use crate::font_data::DatasetManifest;
use crate::gan::losses::{l1, lsgan_discriminator, lsgan_generator};
use crate::gan::runner::{run_training, RunOptions, RunOutcome};
use crate::gan::{
    generator_spec, run_generator, DiscriminatorArch, DiscriminatorSpec, GeneratorArch, PatchOutputs, StackGan,
    StackGanConfig,
};
use crate::letters::NUM_LETTERS;

pub type GlyphNetConfig = StackGanConfig;

pub const G1_NAME: &str = "G1";
pub const D1_NAME: &str = "D1";

/// G₁: grouped 26→26 input layer, encoder, ResNet trunk, decoder, tanh.
pub fn build_g1_spec(arch: &GeneratorArch) -> NetworkSpec {
    generator_spec(G1_NAME, NUM_LETTERS, NUM_LETTERS, Some(NUM_LETTERS), arch)
}

/// D₁ over `concat(input stack, output stack)`.
pub fn build_d1_spec(arch: &DiscriminatorArch) -> DiscriminatorSpec {
    DiscriminatorSpec::new(D1_NAME, 2 * NUM_LETTERS, arch)
}

/// Eval-mode G₁ on a network-range `B×26×64×64` batch.
pub fn g1_forward(spec: &NetworkSpec, params: &ParamSet, x: &Tensor) -> Result<Tensor> {
    run_generator(spec, params, x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlyphNetLossTerms {
    pub l1: f64,
    pub lsgan_local: f64,
    pub lsgan_global: f64,
    pub lambda: f64,
}

impl GlyphNetLossTerms {
    /// `λ·L1 + local + global`.
    pub fn generator_total(&self) -> f64 {
        self.lambda * self.l1 + self.lsgan_local + self.lsgan_global
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscriminatorLossTerms {
    pub local: f64,
    pub global: f64,
}

impl DiscriminatorLossTerms {
    pub fn total(&self) -> f64 {
        self.local + self.global
    }
}

/// Discriminator patch maps of one batch, as plain tensors.
#[derive(Debug, Clone, Copy)]
pub struct PatchMaps<'a> {
    pub local: &'a Tensor,
    pub global: &'a Tensor,
}

/// Evaluates the generator and discriminator objectives on given network
/// outputs, with the same term definitions the trainer differentiates.
pub fn glyphnet_loss(
    g_out: &Tensor,
    target: &Tensor,
    d_real: PatchMaps<'_>,
    d_fake: PatchMaps<'_>,
    lambda: f64,
) -> Result<(GlyphNetLossTerms, DiscriminatorLossTerms)> {
    if g_out.shape() != target.shape() {
        return Err(McganError::ShapeMismatch {
            expected: target.shape().to_vec(),
            actual: g_out.shape().to_vec(),
        });
    }
    for (name, t) in [
        ("generator output", g_out),
        ("target", target),
        ("D(real) local", d_real.local),
        ("D(real) global", d_real.global),
        ("D(fake) local", d_fake.local),
        ("D(fake) global", d_fake.global),
    ] {
        if !t.all_finite() {
            return Err(McganError::InvalidInput(format!("{name} contains non-finite values")));
        }
    }
    let mut g = Graph::new();
    let (go, y) = (g.input(g_out.clone()), g.input(target.clone()));
    let real = PatchOutputs {
        local: g.input(d_real.local.clone()),
        global: g.input(d_real.global.clone()),
    };
    let fake = PatchOutputs {
        local: g.input(d_fake.local.clone()),
        global: g.input(d_fake.global.clone()),
    };
    let l1v = l1(&mut g, go, y)?;
    let (gl, gg) = lsgan_generator(&mut g, &fake);
    let (dl, dg) = lsgan_discriminator(&mut g, &real, &fake)?;
    Ok((
        GlyphNetLossTerms {
            l1: g.value(l1v).item(),
            lsgan_local: g.value(gl).item(),
            lsgan_global: g.value(gg).item(),
            lambda,
        },
        DiscriminatorLossTerms {
            local: g.value(dl).item(),
            global: g.value(dg).item(),
        },
    ))
}

/// Fonts of a grayscale manifest as network-range `1×26×64×64` stacks.
#[derive(Debug, Clone)]
pub struct GlyphCorpus {
    pub ids: Vec<String>,
    pub stacks: Vec<Tensor>,
}

impl GlyphCorpus {
    pub fn load(manifest: &DatasetManifest) -> Result<Self> {
        let mut ids = Vec::with_capacity(manifest.len());
        let mut stacks = Vec::with_capacity(manifest.len());
        for e in &manifest.entries {
            let stack = read_stack_png(&manifest.resolve(e)).map_err(|err| McganError::Font {
                font_id: e.font_id.clone(),
                source: Box::new(err),
            })?;
            ids.push(e.font_id.clone());
            stacks.push(stack.to_tensor());
        }
        Ok(GlyphCorpus { ids, stacks })
    }
}

/// A fresh GlyphNet trainer (G₁ and D₁ with their optimizers).
pub fn new_glyphnet(config: GlyphNetConfig) -> Result<StackGan> {
    StackGan::new(config, 1, (G1_NAME, D1_NAME))
}

/// Pretrains GlyphNet on a grayscale manifest: each iteration samples fonts
/// and observation subsets, masks, then steps D₁ and G₁.
pub fn pretrain_glyphnet(manifest: &DatasetManifest, config: GlyphNetConfig, opts: &RunOptions) -> Result<RunOutcome> {
    if manifest.is_empty() {
        return Err(McganError::InvalidInput("training manifest is empty".into()));
    }
    let corpus = GlyphCorpus::load(manifest)?;
    run_training(new_glyphnet(config)?, &corpus.stacks, opts)
}
