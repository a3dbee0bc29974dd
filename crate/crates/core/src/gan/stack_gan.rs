//! Conditional GAN over letter stacks with random observation masks.
//!
//! A stack holds 26 letters of `channels_per_letter` planes each (1 for
//! grayscale glyphs, 3 for color). Each step masks a random subset of
//! letters out of the target and trains the generator to restore them.

use std::path::Path;

use mcgan_nn::{forward, Adam, AdamConfig, Checkpoint, ForwardCtx, Graph, Mode, NetworkSpec, ParamSet, Tensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::arch::{generator_spec, DiscriminatorArch, DiscriminatorSpec, GeneratorArch};
use super::log::LossLog;
use super::losses::{discriminate, l1, lsgan_discriminator, lsgan_generator, weighted_sum};
use crate::error::{McganError, Result};
use crate::font_data::{sample_distinct, GLYPH_SIZE};
use crate::letters::{LetterSet, NUM_LETTERS};

/// Number of observed letters per training example, uniform on
/// `min..=max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservedCounts {
    pub min: usize,
    pub max: usize,
}

impl Default for ObservedCounts {
    fn default() -> Self {
        ObservedCounts { min: 1, max: 8 }
    }
}

impl ObservedCounts {
    pub fn validate(&self) -> Result<()> {
        if self.min == 0 || self.min > self.max || self.max > NUM_LETTERS {
            return Err(McganError::Config(vec![format!(
                "observed counts {}..={} must satisfy 1 <= min <= max <= {NUM_LETTERS}",
                self.min, self.max
            )]));
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        rng.random_range(self.min..=self.max)
    }

    /// Probability of each count `0..=26`.
    pub fn probabilities(&self) -> Vec<f64> {
        let p = 1.0 / (self.max - self.min + 1) as f64;
        (0..=NUM_LETTERS)
            .map(|n| if (self.min..=self.max).contains(&n) { p } else { 0.0 })
            .collect()
    }

    /// A random observation set of a sampled size.
    pub fn sample_set<R: Rng + ?Sized>(&self, rng: &mut R) -> LetterSet {
        let n = self.sample(rng);
        LetterSet::from_indices(sample_distinct(rng, NUM_LETTERS, n)).expect("indices below 26")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackGanConfig {
    pub generator: GeneratorArch,
    pub discriminator: DiscriminatorArch,
    /// Weight of the L1 reconstruction term.
    pub lambda_l1: f64,
    pub batch_size: usize,
    pub observed: ObservedCounts,
    pub adam: AdamConfig,
    pub seed: u64,
}

impl Default for StackGanConfig {
    fn default() -> Self {
        StackGanConfig {
            generator: GeneratorArch::full(),
            discriminator: DiscriminatorArch::full(),
            lambda_l1: 100.0,
            batch_size: 16,
            observed: ObservedCounts::default(),
            adam: AdamConfig::default(),
            seed: 0,
        }
    }
}

impl StackGanConfig {
    /// Reduced networks and a small batch for CPU runs. The narrow
    /// generator needs a larger step to converge within a few hundred
    /// iterations.
    pub fn reduced() -> Self {
        StackGanConfig {
            generator: GeneratorArch::reduced(),
            discriminator: DiscriminatorArch::reduced(),
            batch_size: 4,
            adam: AdamConfig {
                lr: 2e-3,
                ..AdamConfig::default()
            },
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        for r in [self.generator.validate(), self.discriminator.validate(), self.observed.validate()] {
            if let Err(McganError::Config(e)) = r {
                errs.extend(e);
            }
        }
        if self.batch_size == 0 {
            errs.push("batch size must be positive".into());
        }
        if !(self.lambda_l1 >= 0.0 && self.lambda_l1.is_finite()) {
            errs.push(format!("lambda_l1 {} must be finite and non-negative", self.lambda_l1));
        }
        if self.adam.lr.is_nan() || self.adam.lr <= 0.0 {
            errs.push(format!("learning rate {} must be positive", self.adam.lr));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(McganError::Config(errs))
        }
    }
}

/// Sets every plane of letters outside `observed` to the background value
/// `-1` of a network-range `1×(26·cpl)×64×64` stack.
pub fn mask_network_stack(stack: &Tensor, observed: LetterSet, channels_per_letter: usize) -> Result<Tensor> {
    stack.expect_shape(&[1, NUM_LETTERS * channels_per_letter, GLYPH_SIZE, GLYPH_SIZE])?;
    if observed.is_empty() {
        return Err(McganError::EmptyObservationSet);
    }
    let mut out = stack.clone();
    for letter in (0..NUM_LETTERS).filter(|&l| !observed.contains(l)) {
        for c in 0..channels_per_letter {
            out.plane_mut(0, letter * channels_per_letter + c).fill(-1.0);
        }
    }
    Ok(out)
}

/// Loss values of one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub iteration: u64,
    pub l1: f64,
    pub g_local: f64,
    pub g_global: f64,
    pub d_local: f64,
    pub d_global: f64,
}

impl StepReport {
    pub fn terms(&self) -> [(&'static str, f64); 5] {
        [
            ("l1", self.l1),
            ("g_lsgan_local", self.g_local),
            ("g_lsgan_global", self.g_global),
            ("d_lsgan_local", self.d_local),
            ("d_lsgan_global", self.d_global),
        ]
    }

    pub fn log_into(&self, log: &mut LossLog) {
        for (term, v) in self.terms() {
            log.push(self.iteration, term, v);
        }
    }
}

pub(crate) fn finite(step: u64, term: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(McganError::Diverged {
            term: term.to_string(),
            step,
        })
    }
}

/// Generator, discriminator, optimizers and sampling state.
#[derive(Debug, Clone)]
pub struct StackGan {
    pub config: StackGanConfig,
    pub channels_per_letter: usize,
    pub g_spec: NetworkSpec,
    pub d_spec: DiscriminatorSpec,
    pub g: ParamSet,
    pub d: ParamSet,
    pub g_opt: Adam,
    pub d_opt: Adam,
    pub rng: ChaCha8Rng,
    pub iteration: u64,
}

impl StackGan {
    /// Fresh networks. `names` are the generator and discriminator names
    /// baked into the spec hashes.
    pub fn new(config: StackGanConfig, channels_per_letter: usize, names: (&str, &str)) -> Result<Self> {
        config.validate()?;
        let c = NUM_LETTERS * channels_per_letter;
        let g_spec = generator_spec(names.0, c, c, Some(NUM_LETTERS), &config.generator);
        let d_spec = DiscriminatorSpec::new(names.1, 2 * c, &config.discriminator);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let g = ParamSet::init(&g_spec, &mut rng)?;
        let d = ParamSet::init(&d_spec.spec, &mut rng)?;
        Ok(StackGan {
            g_opt: Adam::new(config.adam),
            d_opt: Adam::new(config.adam),
            config,
            channels_per_letter,
            g_spec,
            d_spec,
            g,
            d,
            rng,
            iteration: 0,
        })
    }

    pub fn channels(&self) -> usize {
        NUM_LETTERS * self.channels_per_letter
    }

    /// One D step followed by one G step on a freshly sampled batch from
    /// `corpus` (network-range `1×C×64×64` stacks).
    pub fn step(&mut self, corpus: &[Tensor]) -> Result<StepReport> {
        if corpus.is_empty() {
            return Err(McganError::InvalidInput("training corpus is empty".into()));
        }
        let it = self.iteration;
        let mut inputs = Vec::with_capacity(self.config.batch_size);
        let mut targets = Vec::with_capacity(self.config.batch_size);
        for _ in 0..self.config.batch_size {
            let font = &corpus[self.rng.random_range(0..corpus.len())];
            let observed = self.config.observed.sample_set(&mut self.rng);
            inputs.push(mask_network_stack(font, observed, self.channels_per_letter)?);
            targets.push(font.clone());
        }
        let mut g = Graph::new();
        let x = g.input(Tensor::stack_batch(&inputs)?);
        let y = g.input(Tensor::stack_batch(&targets)?);

        let mut ctx = ForwardCtx::new(Mode::Train, &mut self.rng);
        let gb = self.g.bind(&mut g, true);
        let fake = forward(&self.g_spec, &mut g, &gb, &self.g, x, &mut ctx)?;
        let g_stats = std::mem::take(&mut ctx.stats);

        let fake_const = g.input(g.detach(fake));
        let db = self.d.bind(&mut g, true);
        let real_out = discriminate(&self.d_spec, &mut g, &db, &self.d, x, y, &mut ctx)?;
        let fake_out = discriminate(&self.d_spec, &mut g, &db, &self.d, x, fake_const, &mut ctx)?;
        let d_stats = std::mem::take(&mut ctx.stats);
        let (dl, dg) = lsgan_discriminator(&mut g, &real_out, &fake_out)?;
        let d_local = finite(it, "d_lsgan_local", g.value(dl).item())?;
        let d_global = finite(it, "d_lsgan_global", g.value(dg).item())?;
        let d_loss = g.add(dl, dg)?;
        let mut grads = g.backward(d_loss)?;
        self.d_opt.step(&mut self.d, &db.gradients(&mut grads))?;

        let db_fixed = self.d.bind(&mut g, false);
        let fake_out = discriminate(&self.d_spec, &mut g, &db_fixed, &self.d, x, fake, &mut ctx)?;
        let (gl, gg) = lsgan_generator(&mut g, &fake_out);
        let l1v = l1(&mut g, fake, y)?;
        let report = StepReport {
            iteration: it,
            l1: finite(it, "l1", g.value(l1v).item())?,
            g_local: finite(it, "g_lsgan_local", g.value(gl).item())?,
            g_global: finite(it, "g_lsgan_global", g.value(gg).item())?,
            d_local,
            d_global,
        };
        let total = weighted_sum(&mut g, &[(self.config.lambda_l1, l1v), (1.0, gl), (1.0, gg)])?
            .expect("adversarial terms always present");
        let mut grads = g.backward(total)?;
        self.g_opt.step(&mut self.g, &gb.gradients(&mut grads))?;

        self.g.apply_batch_stats(&g_stats);
        self.d.apply_batch_stats(&d_stats);
        self.iteration += 1;
        Ok(report)
    }

    /// Eval-mode generator pass over a network-range `B×C×64×64` batch.
    pub fn predict(&self, x: &Tensor) -> Result<Tensor> {
        run_generator(&self.g_spec, &self.g, x)
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        let mut ckpt = Checkpoint::new(self.iteration);
        ckpt.put_params("g", &self.g_spec, &self.g);
        ckpt.put_params("d", &self.d_spec.spec, &self.d);
        ckpt.put_adam("g_opt", &self.g_opt);
        ckpt.put_adam("d_opt", &self.d_opt);
        ckpt.put_meta("config", &self.config);
        ckpt.put_meta("channels_per_letter", &self.channels_per_letter);
        ckpt.put_meta("rng", &self.rng);
        ckpt.put_meta("names", &(&self.g_spec.name, &self.d_spec.spec.name));
        ckpt
    }

    /// Restores a trainer. The stored specs must hash-match the ones the
    /// stored config implies.
    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        let missing = |k: &str| McganError::InvalidInput(format!("checkpoint lacks `{k}`"));
        let config: StackGanConfig = ckpt.meta("config").ok_or_else(|| missing("config"))?;
        let cpl: usize = ckpt.meta("channels_per_letter").ok_or_else(|| missing("channels_per_letter"))?;
        let (gn, dn): (String, String) = ckpt.meta("names").ok_or_else(|| missing("names"))?;
        let mut s = StackGan::new(config, cpl, (&gn, &dn))?;
        s.g = ckpt.params("g", &s.g_spec)?;
        s.d = ckpt.params("d", &s.d_spec.spec)?;
        s.g_opt = ckpt.adam("g_opt")?;
        s.d_opt = ckpt.adam("d_opt")?;
        s.rng = ckpt.meta("rng").ok_or_else(|| missing("rng"))?;
        s.iteration = ckpt.iteration;
        Ok(s)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        Ok(self.to_checkpoint().save(path)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_checkpoint(&Checkpoint::load(path)?)
    }
}

/// Eval-mode forward of a generator, checking the input shape.
pub fn run_generator(spec: &NetworkSpec, params: &ParamSet, x: &Tensor) -> Result<Tensor> {
    run_generator_in(Mode::Eval, spec, params, x)
}

/// Dropout-free forward in `mode` ([`Mode::Eval`] or [`Mode::BatchEval`]).
pub fn run_generator_in(mode: Mode, spec: &NetworkSpec, params: &ParamSet, x: &Tensor) -> Result<Tensor> {
    if mode == Mode::Train {
        return Err(McganError::InvalidInput("inference cannot run in training mode".into()));
    }
    let c = spec.input_channels().unwrap_or(0);
    let shape = x.shape();
    if shape.len() != 4 || shape[1] != c || shape[2] != GLYPH_SIZE || shape[3] != GLYPH_SIZE {
        let b = shape.first().copied().unwrap_or(1);
        return Err(McganError::ShapeMismatch {
            expected: vec![b, c, GLYPH_SIZE, GLYPH_SIZE],
            actual: shape.to_vec(),
        });
    }
    let mut g = Graph::new();
    let xv = g.input(x.clone());
    let bound = params.bind(&mut g, false);
    // Without dropout no random numbers are drawn.
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut ctx = ForwardCtx::new(mode, &mut rng);
    let out = forward(spec, &mut g, &bound, params, xv, &mut ctx)?;
    Ok(g.detach(out))
}
