//! End-to-end few-shot synthesis: a pretrained GlyphNet predicts all 26
//! glyph shapes from the observed letters, and a fresh OrnaNet, trained on
//! the observed letters only, colors them. Gradients of the OrnaNet
//! objective flow back through the reshaping into GlyphNet.

use std::path::{Path, PathBuf};

use mcgan_nn::{forward, Adam, AdamConfig, ForwardCtx, Graph, Mode, NetworkSpec, ParamSet, Tensor, Var};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{McganError, Result};
use crate::font_data::store::{read_color_glyph, write_color_png, write_contact_sheet};
use crate::font_data::{mask_stack, ColorGlyphSet, ColorImage, GlyphImage, GlyphStack, GLYPH_PIXELS, GLYPH_SIZE};
use crate::gan::losses::{discriminate, lsgan_discriminator, mask_mse, select_items, weighted_sum};
use crate::gan::stack_gan::finite;
use crate::gan::{run_generator, run_generator_in, DiscriminatorArch, DiscriminatorSpec, GeneratorArch, LossLog};
use crate::letters::{letter, letter_index, LetterSet, NUM_LETTERS};
use crate::orna_net::{
    build_d2_spec, build_g2_spec, ornanet_generator_terms, Lambda2Schedule, MaskTarget, DEFAULT_MASK_SHARPNESS,
};

/// Input stacks for one forward pass of GlyphNet that together predict
/// every letter without any observed letter seeing itself.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeaveOneOutPlan {
    observed: LetterSet,
    conditions: Vec<LetterSet>,
    extract: Vec<(usize, usize)>,
}

impl LeaveOneOutPlan {
    /// Stack `i < n` observes `S ∖ {ℓᵢ}` and supplies the `i`-th observed
    /// letter `ℓᵢ`; the last stack observes all of `S` and supplies every
    /// unobserved letter. With a single observed letter its own stack is
    /// blank, so GlyphNet predicts it unconditioned.
    pub fn new(observed: LetterSet) -> Result<Self> {
        let n = observed.len();
        if n == 0 {
            return Err(McganError::EmptyObservationSet);
        }
        if n == NUM_LETTERS {
            return Err(McganError::InvalidInput(
                "all 26 letters observed; nothing to synthesize".into(),
            ));
        }
        let letters = observed.to_vec();
        let mut conditions: Vec<LetterSet> = letters
            .iter()
            .map(|&l| observed.without(l))
            .collect();
        conditions.push(observed);
        let extract = (0..NUM_LETTERS)
            .map(|l| match letters.iter().position(|&o| o == l) {
                Some(i) => (i, l),
                None => (n, l),
            })
            .collect();
        Ok(LeaveOneOutPlan {
            observed,
            conditions,
            extract,
        })
    }

    pub fn observed(&self) -> LetterSet {
        self.observed
    }

    /// Observation set of each input stack.
    pub fn conditions(&self) -> &[LetterSet] {
        &self.conditions
    }

    /// `(stack, channel)` supplying each letter `A..Z`.
    pub fn extract(&self) -> &[(usize, usize)] {
        &self.extract
    }

    pub fn num_stacks(&self) -> usize {
        self.conditions.len()
    }

    /// The masked input stacks built from `glyphs` (only observed channels
    /// are read).
    pub fn stacks(&self, glyphs: &GlyphStack) -> Result<Vec<GlyphStack>> {
        self.conditions
            .iter()
            .map(|&c| {
                if c.is_empty() {
                    let mut blank = GlyphStack::new(vec![GlyphImage::blank(); NUM_LETTERS])?;
                    blank.observed = LetterSet::EMPTY;
                    Ok(blank)
                } else {
                    mask_stack(glyphs, c)
                }
            })
            .collect()
    }

    /// The input stacks as a network-range `(n+1)×26×64×64` batch.
    pub fn input_batch(&self, glyphs: &GlyphStack) -> Result<Tensor> {
        let items: Vec<Tensor> = self.stacks(glyphs)?.iter().map(GlyphStack::to_tensor).collect();
        Ok(Tensor::stack_batch(&items)?)
    }

    /// Collects each letter's plane from GlyphNet's `(n+1)×26×64×64`
    /// output into one `1×26×64×64` stack.
    pub fn assemble(&self, g: &mut Graph, g1_out: Var) -> Result<Var> {
        Ok(g.select_planes(g1_out, 1, NUM_LETTERS, &self.extract)?)
    }

    pub fn assemble_tensor(&self, g1_out: &Tensor) -> Result<Tensor> {
        let mut g = Graph::new();
        let x = g.input(g1_out.clone());
        let y = self.assemble(&mut g, x)?;
        Ok(g.detach(y))
    }
}

pub fn build_leave_one_out_plan(observed: LetterSet) -> Result<LeaveOneOutPlan> {
    LeaveOneOutPlan::new(observed)
}

fn check_stack_shape(shape: &[usize]) -> Result<()> {
    if shape.len() != 4 || shape[..2] != [1, NUM_LETTERS] {
        return Err(McganError::ShapeMismatch {
            expected: vec![1, NUM_LETTERS, GLYPH_SIZE, GLYPH_SIZE],
            actual: shape.to_vec(),
        });
    }
    Ok(())
}

/// `𝒯`: a `1×26×H×W` stack becomes 26 three-channel images, each
/// letter's plane repeated into R, G and B.
pub fn transform_t(g: &mut Graph, stack: Var) -> Result<Var> {
    check_stack_shape(g.shape(stack))?;
    let picks: Vec<(usize, usize)> = (0..NUM_LETTERS).flat_map(|l| [(0, l); 3]).collect();
    Ok(g.select_planes(stack, NUM_LETTERS, 3, &picks)?)
}

pub fn transform_t_tensor(stack: &Tensor) -> Result<Tensor> {
    let mut g = Graph::new();
    let x = g.input(stack.clone());
    let y = transform_t(&mut g, x)?;
    Ok(g.detach(y))
}

/// Per-letter weights of the L1 pull towards the pretrained predictions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LetterWeights {
    pub observed: f64,
    pub unobserved: f64,
}

impl Default for LetterWeights {
    fn default() -> Self {
        LetterWeights {
            observed: 10.0,
            unobserved: 1.0,
        }
    }
}

impl LetterWeights {
    pub fn for_set(&self, observed: LetterSet) -> Vec<f64> {
        (0..NUM_LETTERS)
            .map(|l| if observed.contains(l) { self.observed } else { self.unobserved })
            .collect()
    }
}

/// Graph nodes of the GlyphNet-side terms: the weighted L1 distance of
/// `g1_full` to the frozen predictions (mean over pixels of `Σᵢ wᵢ|·|/26`)
/// and the mask MSE between `y2_masks` (observed letters' ground-truth
/// shapes, `n×3×64×64`) and `𝒯(g1_full)` at the observed letters.
pub fn glyphnet_end_terms(
    g: &mut Graph,
    g1_full: Var,
    g1_frozen: Var,
    y2_masks: Var,
    observed: &[usize],
    weights: &[f64],
    sharpness: f64,
) -> Result<(Var, Var)> {
    if observed.is_empty() {
        return Err(McganError::EmptyObservationSet);
    }
    let d = g.sub(g1_full, g1_frozen)?;
    let d = g.abs(d);
    let d = g.scale_planes(d, weights.to_vec())?;
    let weighted_l1 = g.mean(d);
    let t = transform_t(g, g1_full)?;
    let t_obs = select_items(g, t, observed)?;
    let mask = mask_mse(g, y2_masks, t_obs, sharpness)?;
    Ok((weighted_l1, mask))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlyphEndLossTerms {
    pub weighted_l1: f64,
    pub mask_mse: f64,
    pub lambda3: f64,
    pub lambda4: f64,
}

impl GlyphEndLossTerms {
    pub fn total(&self) -> f64 {
        self.lambda3 * self.weighted_l1 + self.lambda4 * self.mask_mse
    }
}

/// Evaluates the GlyphNet-side terms on tensors.
#[allow(clippy::too_many_arguments)]
pub fn glyphnet_end_loss(
    g1_out: &Tensor,
    g1_frozen: &Tensor,
    y2_masks: &Tensor,
    observed: &[usize],
    weights: &[f64],
    lambda3: f64,
    lambda4: f64,
    sharpness: f64,
) -> Result<GlyphEndLossTerms> {
    check_stack_shape(g1_out.shape())?;
    check_stack_shape(g1_frozen.shape())?;
    let mut g = Graph::new();
    let (a, b, y) = (g.input(g1_out.clone()), g.input(g1_frozen.clone()), g.input(y2_masks.clone()));
    let (l, m) = glyphnet_end_terms(&mut g, a, b, y, observed, weights, sharpness)?;
    Ok(GlyphEndLossTerms {
        weighted_l1: g.value(l).item(),
        mask_mse: g.value(m).item(),
        lambda3,
        lambda4,
    })
}

/// Switches for each generator-side loss term; a disabled term is still
/// logged but contributes no gradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermToggles {
    pub lsgan: bool,
    pub l1: bool,
    pub mask_mse: bool,
    pub glyph_l1: bool,
    pub glyph_mask: bool,
}

impl Default for TermToggles {
    fn default() -> Self {
        TermToggles {
            lsgan: true,
            l1: true,
            mask_mse: true,
            glyph_l1: true,
            glyph_mask: true,
        }
    }
}

/// Per-font fine-tuning settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lambda1: f64,
    pub lambda2: Lambda2Schedule,
    pub lambda3: f64,
    pub lambda4: f64,
    pub letter_weights: LetterWeights,
    pub mask_sharpness: f64,
    pub mask_target: MaskTarget,
    pub epochs: u64,
    /// Optimizer of OrnaNet.
    pub adam: AdamConfig,
    /// Optimizer of the GlyphNet copy; a pretrained network tolerates a
    /// smaller step than a fresh one.
    pub glyph_adam: AdamConfig,
    pub seed: u64,
    pub orna_generator: GeneratorArch,
    pub orna_discriminator: DiscriminatorArch,
    pub terms: TermToggles,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lambda1: 300.0,
            lambda2: Lambda2Schedule::default(),
            lambda3: 10.0,
            lambda4: 300.0,
            letter_weights: LetterWeights::default(),
            mask_sharpness: DEFAULT_MASK_SHARPNESS,
            mask_target: MaskTarget::Truth,
            epochs: 400,
            adam: AdamConfig::default(),
            glyph_adam: AdamConfig::default(),
            seed: 0,
            orna_generator: GeneratorArch::full(),
            orna_discriminator: DiscriminatorArch::full(),
            terms: TermToggles::default(),
        }
    }
}

impl TrainConfig {
    /// Reduced OrnaNet for CPU runs: 150 epochs with λ₂ dropping halfway.
    /// GlyphNet moves at a fiftieth of OrnaNet's rate so its pretrained
    /// shapes survive the short schedule.
    pub fn reduced() -> Self {
        TrainConfig {
            lambda2: Lambda2Schedule {
                switch_epoch: 75,
                ..Lambda2Schedule::default()
            },
            epochs: 150,
            adam: AdamConfig {
                lr: 1e-3,
                ..AdamConfig::default()
            },
            glyph_adam: AdamConfig {
                lr: 2e-5,
                ..AdamConfig::default()
            },
            orna_generator: GeneratorArch {
                width: 8,
                ..GeneratorArch::reduced()
            },
            orna_discriminator: DiscriminatorArch::reduced(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        for r in [self.orna_generator.validate(), self.orna_discriminator.validate()] {
            if let Err(McganError::Config(e)) = r {
                errs.extend(e);
            }
        }
        let weights = [
            ("lambda1", self.lambda1),
            ("lambda2 before switch", self.lambda2.before),
            ("lambda2 after switch", self.lambda2.after),
            ("lambda3", self.lambda3),
            ("lambda4", self.lambda4),
            ("observed letter weight", self.letter_weights.observed),
            ("unobserved letter weight", self.letter_weights.unobserved),
        ];
        for (name, v) in weights {
            if !(v >= 0.0 && v.is_finite()) {
                errs.push(format!("{name} = {v} must be finite and non-negative"));
            }
        }
        if !(self.mask_sharpness > 0.0 && self.mask_sharpness.is_finite()) {
            errs.push(format!("mask sharpness {} must be positive", self.mask_sharpness));
        }
        for lr in [self.adam.lr, self.glyph_adam.lr] {
            if lr.is_nan() || lr <= 0.0 {
                errs.push(format!("learning rate {lr} must be positive"));
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(McganError::Config(errs))
        }
    }
}

/// Loss values of one fine-tuning step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FineTuneReport {
    pub epoch: u64,
    pub d_local: f64,
    pub d_global: f64,
    pub g_lsgan_local: f64,
    pub g_lsgan_global: f64,
    pub l1: f64,
    pub mask_mse: f64,
    pub glyph_l1: f64,
    pub glyph_mask: f64,
    pub lambda2: f64,
}

impl FineTuneReport {
    pub fn terms(&self) -> [(&'static str, f64); 9] {
        [
            ("d_lsgan_local", self.d_local),
            ("d_lsgan_global", self.d_global),
            ("g_lsgan_local", self.g_lsgan_local),
            ("g_lsgan_global", self.g_lsgan_global),
            ("l1", self.l1),
            ("mask_mse", self.mask_mse),
            ("glyph_l1", self.glyph_l1),
            ("glyph_mask", self.glyph_mask),
            ("lambda2", self.lambda2),
        ]
    }

    pub fn log_into(&self, log: &mut LossLog) {
        for (t, v) in self.terms() {
            log.push(self.epoch, t, v);
        }
    }
}

fn color_items(set: &ColorGlyphSet, letters: &[usize]) -> Result<Tensor> {
    let mut data = Vec::with_capacity(letters.len() * 3 * GLYPH_PIXELS);
    for &l in letters {
        data.extend(set.image(l).data().iter().map(|&v| 2.0 * v - 1.0));
    }
    Ok(Tensor::from_vec(&[letters.len(), 3, GLYPH_SIZE, GLYPH_SIZE], data)?)
}

/// State of one font's fine-tuning: a trainable copy of G₁ with its frozen
/// pretrained predictions, and OrnaNet's G₂ and D₂. D₁ plays no part.
#[derive(Debug, Clone)]
pub struct FineTuneState {
    pub config: TrainConfig,
    pub plan: LeaveOneOutPlan,
    pub g1_spec: NetworkSpec,
    pub g1: ParamSet,
    /// Pretrained G₁′ predictions assembled through the plan, computed once.
    pub g1_frozen: Tensor,
    pub g2_spec: NetworkSpec,
    pub g2: ParamSet,
    pub d2_spec: DiscriminatorSpec,
    pub d2: ParamSet,
    pub g1_opt: Adam,
    pub g2_opt: Adam,
    pub d2_opt: Adam,
    pub epoch: u64,
    x1: Tensor,
    y2_observed: Tensor,
    y2_masks: Tensor,
    rng: ChaCha8Rng,
}

impl FineTuneState {
    /// Prepares fine-tuning from the observed colored letters of one font.
    /// GlyphNet sees their binarized shapes. `g2_init` optionally replaces
    /// the random OrnaNet generator initialization.
    pub fn new(
        observed: &ColorGlyphSet,
        g1_spec: &NetworkSpec,
        g1_pretrained: &ParamSet,
        config: TrainConfig,
        g2_init: Option<&ParamSet>,
    ) -> Result<Self> {
        config.validate()?;
        g1_pretrained.check_against(g1_spec)?;
        let plan = LeaveOneOutPlan::new(observed.observed)?;
        let letters = plan.observed().to_vec();

        let shapes = mask_stack(&observed.shape_stack(), plan.observed())?;
        let x1 = plan.input_batch(&shapes)?;
        let y2_observed = color_items(observed, &letters)?;
        let mut mask_data = Vec::with_capacity(letters.len() * 3 * GLYPH_PIXELS);
        for &l in &letters {
            for _ in 0..3 {
                mask_data.extend(shapes.channel(l).pixels().iter().map(|&v| 2.0 * v - 1.0));
            }
        }
        let y2_masks = Tensor::from_vec(&[letters.len(), 3, GLYPH_SIZE, GLYPH_SIZE], mask_data)?;
        let g1_frozen = plan.assemble_tensor(&run_generator(g1_spec, g1_pretrained, &x1)?)?;

        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let g2_spec = build_g2_spec(&config.orna_generator);
        let d2_spec = build_d2_spec(&config.orna_discriminator);
        let g2 = match g2_init {
            Some(p) => {
                p.check_against(&g2_spec)?;
                p.clone()
            }
            None => ParamSet::init(&g2_spec, &mut rng)?,
        };
        let d2 = ParamSet::init(&d2_spec.spec, &mut rng)?;
        Ok(FineTuneState {
            g1_opt: Adam::new(config.glyph_adam),
            g2_opt: Adam::new(config.adam),
            d2_opt: Adam::new(config.adam),
            plan,
            g1_spec: g1_spec.clone(),
            g1: g1_pretrained.clone(),
            g1_frozen,
            g2_spec,
            g2,
            d2_spec,
            d2,
            epoch: 0,
            x1,
            y2_observed,
            y2_masks,
            rng,
            config,
        })
    }

    /// One D₂ step then one joint G₂ + G₁ step.
    pub fn step(&mut self) -> Result<FineTuneReport> {
        let e = self.epoch;
        let cfg = self.config.clone();
        let k = cfg.mask_sharpness;
        let obs = self.plan.observed().to_vec();
        let mut g = Graph::new();

        // G₁ runs with its pretrained batch statistics and no dropout, so
        // that it starts exactly at G₁′.
        let x1 = g.input(self.x1.clone());
        let g1b = self.g1.bind(&mut g, true);
        let g1_out = {
            let mut ctx = ForwardCtx::new(Mode::Eval, &mut self.rng);
            forward(&self.g1_spec, &mut g, &g1b, &self.g1, x1, &mut ctx)?
        };
        let full = self.plan.assemble(&mut g, g1_out)?;
        let x2 = transform_t(&mut g, full)?;

        let mut ctx = ForwardCtx::new(Mode::Train, &mut self.rng);
        let g2b = self.g2.bind(&mut g, true);
        let out2 = forward(&self.g2_spec, &mut g, &g2b, &self.g2, x2, &mut ctx)?;
        let g2_stats = std::mem::take(&mut ctx.stats);

        let y2 = g.input(self.y2_observed.clone());
        let x2_const = g.input(g.detach(x2));
        let out2_const = g.input(g.detach(out2));
        let x2_obs = select_items(&mut g, x2_const, &obs)?;
        let d2b = self.d2.bind(&mut g, true);
        let real = discriminate(&self.d2_spec, &mut g, &d2b, &self.d2, x2_obs, y2, &mut ctx)?;
        let fake = discriminate(&self.d2_spec, &mut g, &d2b, &self.d2, x2_const, out2_const, &mut ctx)?;
        let d2_stats = std::mem::take(&mut ctx.stats);
        let (dl, dg) = lsgan_discriminator(&mut g, &real, &fake)?;
        let d_local = finite(e, "d_lsgan_local", g.value(dl).item())?;
        let d_global = finite(e, "d_lsgan_global", g.value(dg).item())?;
        if cfg.terms.lsgan {
            let d_loss = g.add(dl, dg)?;
            let mut grads = g.backward(d_loss)?;
            self.d2_opt.step(&mut self.d2, &d2b.gradients(&mut grads))?;
        }

        let d2_fixed = self.d2.bind(&mut g, false);
        let fake = discriminate(&self.d2_spec, &mut g, &d2_fixed, &self.d2, x2, out2, &mut ctx)?;
        let t = ornanet_generator_terms(&mut g, out2, x2, y2, &obs, &fake, k, cfg.mask_target)?;
        let frozen = g.input(self.g1_frozen.clone());
        let masks = g.input(self.y2_masks.clone());
        let weights = cfg.letter_weights.for_set(self.plan.observed());
        let (gl1, gmask) = glyphnet_end_terms(&mut g, full, frozen, masks, &obs, &weights, k)?;

        let lambda2 = cfg.lambda2.at(e);
        let on = |b: bool, w: f64| if b { w } else { 0.0 };
        let report = FineTuneReport {
            epoch: e,
            d_local,
            d_global,
            g_lsgan_local: finite(e, "g_lsgan_local", g.value(t.lsgan_local).item())?,
            g_lsgan_global: finite(e, "g_lsgan_global", g.value(t.lsgan_global).item())?,
            l1: finite(e, "l1", g.value(t.l1).item())?,
            mask_mse: finite(e, "mask_mse", g.value(t.mask_mse).item())?,
            glyph_l1: finite(e, "glyph_l1", g.value(gl1).item())?,
            glyph_mask: finite(e, "glyph_mask", g.value(gmask).item())?,
            lambda2,
        };
        let total = weighted_sum(
            &mut g,
            &[
                (on(cfg.terms.lsgan, 1.0), t.lsgan_local),
                (on(cfg.terms.lsgan, 1.0), t.lsgan_global),
                (on(cfg.terms.l1, cfg.lambda1), t.l1),
                (on(cfg.terms.mask_mse, lambda2), t.mask_mse),
                (on(cfg.terms.glyph_l1, cfg.lambda3), gl1),
                (on(cfg.terms.glyph_mask, cfg.lambda4), gmask),
            ],
        )?;
        if let Some(total) = total {
            let mut grads = g.backward(total)?;
            self.g1_opt.step(&mut self.g1, &g1b.gradients(&mut grads))?;
            self.g2_opt.step(&mut self.g2, &g2b.gradients(&mut grads))?;
        }
        self.g2.apply_batch_stats(&g2_stats);
        self.d2.apply_batch_stats(&d2_stats);
        self.epoch += 1;
        Ok(report)
    }

    /// Runs until `config.epochs`, logging every term.
    pub fn run(&mut self, log: &mut LossLog) -> Result<()> {
        while self.epoch < self.config.epochs {
            self.step()?.log_into(log);
        }
        Ok(())
    }

    /// Current GlyphNet predictions assembled through the plan, `[0, 1]`.
    pub fn glyph_predictions(&self) -> Result<GlyphStack> {
        let out = run_generator(&self.g1_spec, &self.g1, &self.x1)?;
        GlyphStack::from_tensor(&self.plan.assemble_tensor(&out)?, 0, LetterSet::ALL)
    }

    /// Dropout-free plan → G₁ → 𝒯 → G₂, mapped to `[0, 1]`.
    pub fn synthesize(&self) -> Result<ColorGlyphSet> {
        if self.epoch == 0 {
            return Err(McganError::InvalidInput("synthesize called before any fine-tuning step".into()));
        }
        let out = run_generator(&self.g1_spec, &self.g1, &self.x1)?;
        let x2 = transform_t_tensor(&self.plan.assemble_tensor(&out)?)?;
        // OrnaNet always sees one font's 26 letters as a batch, so it
        // normalizes with that batch's statistics as in training; running
        // averages lag far behind over a short fine-tune.
        let colored = run_generator_in(Mode::BatchEval, &self.g2_spec, &self.g2, &x2)?;
        ColorGlyphSet::from_network_tensor(&colored, LetterSet::ALL)
    }
}

/// Fine-tunes on one font's observed letters and returns the trained state
/// with its 26 synthesized letters.
pub fn finetune(
    observed: &ColorGlyphSet,
    g1_spec: &NetworkSpec,
    g1_pretrained: &ParamSet,
    config: TrainConfig,
    log: &mut LossLog,
) -> Result<(FineTuneState, ColorGlyphSet)> {
    let mut state = FineTuneState::new(observed, g1_spec, g1_pretrained, config, None)?;
    state.run(log)?;
    let out = state.synthesize()?;
    Ok((state, out))
}

pub fn synthesize(state: &FineTuneState) -> Result<ColorGlyphSet> {
    state.synthesize()
}

/// Loads observed colored letters from a directory of images named by
/// letter (`T.png`, `o.jpg`, …). Files with other stems are rejected, as
/// are two files for one letter and an empty directory.
pub fn load_observed_dir(dir: &Path) -> Result<ColorGlyphSet> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(McganError::io(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    files.sort();
    let mut images = vec![ColorImage::black(); NUM_LETTERS];
    let mut observed = LetterSet::EMPTY;
    for path in files {
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("");
        let mut chars = stem.chars();
        let index = match (chars.next(), chars.next()) {
            (Some(c), None) => letter_index(c.to_ascii_uppercase()),
            _ => None,
        }
        .ok_or_else(|| {
            McganError::InvalidInput(format!("{} is not labeled with a letter A..Z", path.display()))
        })?;
        if observed.contains(index) {
            return Err(McganError::InvalidInput(format!(
                "letter {} appears twice in {}",
                letter(index),
                dir.display()
            )));
        }
        images[index] = read_color_glyph(&path)?.0;
        observed.insert(index);
    }
    if observed.is_empty() {
        return Err(McganError::EmptyObservationSet);
    }
    ColorGlyphSet::new(images)?.restrict(observed)
}

/// Writes `A.png`..`Z.png` and a 13-column contact sheet `sheet.png`.
pub fn write_synthesis(dir: &Path, set: &ColorGlyphSet) -> Result<()> {
    for (l, im) in set.images().iter().enumerate() {
        write_color_png(&dir.join(format!("{}.png", letter(l))), im)?;
    }
    write_contact_sheet(&dir.join("sheet.png"), &[set], 13)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tower_plan() {
        let plan = LeaveOneOutPlan::new(LetterSet::from_word("TOWER").unwrap()).unwrap();
        assert_eq!(plan.num_stacks(), 6);
        let r = crate::letters::letter_index('R').unwrap();
        let (stack, ch) = plan.extract()[r];
        assert_eq!(ch, r);
        assert_eq!(plan.conditions()[stack], LetterSet::from_word("TOWE").unwrap());
        let from_all = plan.extract().iter().filter(|e| e.0 == 5).count();
        assert_eq!(from_all, 21);
    }

    #[test]
    fn single_letter_plan_predicts_it_from_a_blank_stack() {
        let s = LetterSet::from_word("Q").unwrap();
        let plan = LeaveOneOutPlan::new(s).unwrap();
        assert_eq!(plan.conditions(), &[LetterSet::EMPTY, s]);
        let glyphs = GlyphStack::new(vec![GlyphImage::from_pixels(vec![1.0; GLYPH_PIXELS]).unwrap(); 26]).unwrap();
        let stacks = plan.stacks(&glyphs).unwrap();
        assert!(stacks[0].channels().iter().all(GlyphImage::is_empty));
        assert!(!stacks[1].channel(16).is_empty());
    }

    #[test]
    fn plan_rejects_empty_and_full() {
        assert!(LeaveOneOutPlan::new(LetterSet::EMPTY).is_err());
        assert!(LeaveOneOutPlan::new(LetterSet::ALL).is_err());
    }

    #[test]
    fn transform_repeats_planes() {
        let data: Vec<f64> = (0..26 * 4096).map(|i| (i % 997) as f64 / 997.0).collect();
        let t = Tensor::from_vec(&[1, 26, 64, 64], data).unwrap();
        let out = transform_t_tensor(&t).unwrap();
        assert_eq!(out.shape(), &[26, 3, 64, 64]);
        for l in 0..26 {
            for c in 0..3 {
                assert_eq!(out.plane(l, c), t.plane(0, l));
            }
        }
        assert!(transform_t_tensor(&Tensor::zeros(&[2, 26, 64, 64])).is_err());
    }
}
