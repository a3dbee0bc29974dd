//! Flat `key = value` run configuration.
//!
//! Lines are `key = value`, blank, or `#` comments. `include = path` reads
//! another file (relative to the including one) at that point; later
//! assignments win. `scale = full|reduced` picks the architecture preset
//! and is applied before every other key regardless of its position.
//! Unknown keys and bad values are all reported together.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use crate::analysis::SsimConfig;
use crate::error::{McganError, Result};
use crate::gan::StackGanConfig;
use crate::mcgan_stack::TrainConfig;
use crate::orna_net::MaskTarget;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Full,
    Reduced,
}

/// Every tunable of a run: pretraining, baseline, fine-tuning, analysis and
/// paths.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scale: Scale,
    pub seed: u64,
    pub data_dir: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub device: String,
    pub verbosity: u8,
    pub fonts: usize,
    pub test_fonts: usize,
    pub color_variants: usize,
    pub glyphnet: StackGanConfig,
    pub pretrain_steps: u64,
    pub baseline: StackGanConfig,
    pub baseline_steps: u64,
    pub checkpoint_every: u64,
    pub finetune: TrainConfig,
    pub ssim: SsimConfig,
    pub analysis_fonts: usize,
    pub count_min: usize,
    pub count_max: usize,
}

impl RunConfig {
    pub fn preset(scale: Scale) -> Self {
        let (glyphnet, finetune) = match scale {
            Scale::Full => (StackGanConfig::default(), TrainConfig::default()),
            Scale::Reduced => (StackGanConfig::reduced(), TrainConfig::reduced()),
        };
        RunConfig {
            scale,
            seed: 0,
            data_dir: None,
            out_dir: PathBuf::from("out"),
            device: "cpu".into(),
            verbosity: 1,
            fonts: 100,
            test_fonts: 10,
            color_variants: 1,
            baseline: glyphnet.clone(),
            glyphnet,
            pretrain_steps: if scale == Scale::Full { 100_000 } else { 600 },
            baseline_steps: if scale == Scale::Full { 100_000 } else { 300 },
            checkpoint_every: 100,
            finetune,
            ssim: SsimConfig::default(),
            analysis_fonts: 1500,
            count_min: 1,
            count_max: 8,
        }
    }

    /// Every key accepted by [`RunConfig::set`].
    pub const KEYS: &'static [&'static str] = &[
        "scale",
        "seed",
        "data_dir",
        "out_dir",
        "device",
        "verbosity",
        "data.fonts",
        "data.test_fonts",
        "data.color_variants",
        "generator.width",
        "generator.blocks_per_side",
        "generator.outer_kernel",
        "generator.inner_kernel",
        "generator.dropout",
        "discriminator.width1",
        "discriminator.width2",
        "discriminator.kernel",
        "pretrain.steps",
        "pretrain.batch_size",
        "pretrain.lambda_l1",
        "pretrain.lr",
        "pretrain.observed_min",
        "pretrain.observed_max",
        "baseline.steps",
        "checkpoint_every",
        "finetune.lambda1",
        "finetune.lambda2_before",
        "finetune.lambda2_after",
        "finetune.lambda2_switch_epoch",
        "finetune.lambda3",
        "finetune.lambda4",
        "finetune.w_observed",
        "finetune.w_unobserved",
        "finetune.mask_sharpness",
        "finetune.mask_target",
        "finetune.epochs",
        "finetune.lr",
        "finetune.glyph_lr",
        "finetune.orna_width",
        "finetune.orna_blocks_per_side",
        "finetune.orna_d_width1",
        "finetune.orna_d_width2",
        "finetune.orna_d_kernel",
        "finetune.use_lsgan",
        "finetune.use_l1",
        "finetune.use_mask_mse",
        "finetune.use_glyph_l1",
        "finetune.use_glyph_mask",
        "analysis.fonts",
        "analysis.count_min",
        "analysis.count_max",
        "ssim.window",
        "ssim.sigma",
    ];

    /// Applies one assignment. GlyphNet architecture keys apply to both
    /// GlyphNet and the baseline.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn p<T: std::str::FromStr>(v: &str) -> std::result::Result<T, String> {
            v.parse().map_err(|_| format!("cannot parse `{v}`"))
        }
        let both = |c: &mut RunConfig, f: &dyn Fn(&mut StackGanConfig)| {
            f(&mut c.glyphnet);
            f(&mut c.baseline);
        };
        match key {
            "scale" => {
                self.scale = match value {
                    "full" => Scale::Full,
                    "reduced" => Scale::Reduced,
                    _ => return Err(format!("`{value}` is not full or reduced")),
                }
            }
            "seed" => {
                let s: u64 = p(value)?;
                self.seed = s;
                self.glyphnet.seed = s;
                self.baseline.seed = s;
                self.finetune.seed = s;
            }
            "data_dir" => self.data_dir = Some(PathBuf::from(value)),
            "out_dir" => self.out_dir = PathBuf::from(value),
            "device" => {
                if value != "cpu" {
                    return Err(format!("device `{value}` unavailable; only cpu is supported"));
                }
                self.device = value.into();
            }
            "verbosity" => self.verbosity = p(value)?,
            "data.fonts" => self.fonts = p(value)?,
            "data.test_fonts" => self.test_fonts = p(value)?,
            "data.color_variants" => self.color_variants = p(value)?,
            "generator.width" => {
                let v = p(value)?;
                both(self, &|c| c.generator.width = v)
            }
            "generator.blocks_per_side" => {
                let v = p(value)?;
                both(self, &|c| c.generator.blocks_per_side = v)
            }
            "generator.outer_kernel" => {
                let v = p(value)?;
                both(self, &|c| c.generator.outer_kernel = v)
            }
            "generator.inner_kernel" => {
                let v = p(value)?;
                both(self, &|c| c.generator.inner_kernel = v)
            }
            "generator.dropout" => {
                let v = p(value)?;
                both(self, &|c| c.generator.dropout = v)
            }
            "discriminator.width1" => {
                let v = p(value)?;
                both(self, &|c| c.discriminator.widths[0] = v)
            }
            "discriminator.width2" => {
                let v = p(value)?;
                both(self, &|c| c.discriminator.widths[1] = v)
            }
            "discriminator.kernel" => {
                let v = p(value)?;
                both(self, &|c| c.discriminator.kernel = v)
            }
            "pretrain.steps" => self.pretrain_steps = p(value)?,
            "pretrain.batch_size" => {
                let v = p(value)?;
                both(self, &|c| c.batch_size = v)
            }
            "pretrain.lambda_l1" => {
                let v = p(value)?;
                both(self, &|c| c.lambda_l1 = v)
            }
            "pretrain.lr" => {
                let v = p(value)?;
                both(self, &|c| c.adam.lr = v)
            }
            "pretrain.observed_min" => {
                let v = p(value)?;
                both(self, &|c| c.observed.min = v)
            }
            "pretrain.observed_max" => {
                let v = p(value)?;
                both(self, &|c| c.observed.max = v)
            }
            "baseline.steps" => self.baseline_steps = p(value)?,
            "checkpoint_every" => self.checkpoint_every = p(value)?,
            "finetune.lambda1" => self.finetune.lambda1 = p(value)?,
            "finetune.lambda2_before" => self.finetune.lambda2.before = p(value)?,
            "finetune.lambda2_after" => self.finetune.lambda2.after = p(value)?,
            "finetune.lambda2_switch_epoch" => self.finetune.lambda2.switch_epoch = p(value)?,
            "finetune.lambda3" => self.finetune.lambda3 = p(value)?,
            "finetune.lambda4" => self.finetune.lambda4 = p(value)?,
            "finetune.w_observed" => self.finetune.letter_weights.observed = p(value)?,
            "finetune.w_unobserved" => self.finetune.letter_weights.unobserved = p(value)?,
            "finetune.mask_sharpness" => self.finetune.mask_sharpness = p(value)?,
            "finetune.mask_target" => {
                self.finetune.mask_target = match value {
                    "truth" => MaskTarget::Truth,
                    "input" => MaskTarget::Input,
                    _ => return Err(format!("`{value}` is not truth or input")),
                }
            }
            "finetune.epochs" => self.finetune.epochs = p(value)?,
            "finetune.lr" => self.finetune.adam.lr = p(value)?,
            "finetune.glyph_lr" => self.finetune.glyph_adam.lr = p(value)?,
            "finetune.orna_width" => self.finetune.orna_generator.width = p(value)?,
            "finetune.orna_blocks_per_side" => self.finetune.orna_generator.blocks_per_side = p(value)?,
            "finetune.orna_d_width1" => self.finetune.orna_discriminator.widths[0] = p(value)?,
            "finetune.orna_d_width2" => self.finetune.orna_discriminator.widths[1] = p(value)?,
            "finetune.orna_d_kernel" => self.finetune.orna_discriminator.kernel = p(value)?,
            "finetune.use_lsgan" => self.finetune.terms.lsgan = p(value)?,
            "finetune.use_l1" => self.finetune.terms.l1 = p(value)?,
            "finetune.use_mask_mse" => self.finetune.terms.mask_mse = p(value)?,
            "finetune.use_glyph_l1" => self.finetune.terms.glyph_l1 = p(value)?,
            "finetune.use_glyph_mask" => self.finetune.terms.glyph_mask = p(value)?,
            "analysis.fonts" => self.analysis_fonts = p(value)?,
            "analysis.count_min" => self.count_min = p(value)?,
            "analysis.count_max" => self.count_max = p(value)?,
            "ssim.window" => self.ssim.window = p(value)?,
            "ssim.sigma" => self.ssim.sigma = p(value)?,
            _ => return Err("unknown key".into()),
        }
        Ok(())
    }

    /// Cross-field checks, all failures at once.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        for (name, r) in [
            ("glyphnet", self.glyphnet.validate()),
            ("baseline", self.baseline.validate()),
            ("finetune", self.finetune.validate()),
            ("ssim", self.ssim.validate()),
        ] {
            if let Err(McganError::Config(e)) = r {
                errs.extend(e.into_iter().map(|m| format!("{name}: {m}")));
            }
        }
        if self.count_min < 1 || self.count_max > 25 || self.count_min > self.count_max {
            errs.push(format!(
                "analysis observed counts {}..={} must lie within 1..=25",
                self.count_min, self.count_max
            ));
        }
        if self.color_variants == 0 {
            errs.push("data.color_variants must be positive".into());
        }
        if let Some(d) = &self.data_dir {
            if !d.is_dir() {
                errs.push(format!("data_dir {} is not a directory", d.display()));
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(McganError::Config(errs))
        }
    }
}

/// One `key = value` line with where it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub key: String,
    pub value: String,
    pub origin: String,
}

fn read_lines(path: &Path, depth: usize, seen: &mut BTreeSet<PathBuf>, out: &mut Vec<Assignment>, errs: &mut Vec<String>) {
    let canon = path.canonicalize().unwrap_or_else(|_| path.to_path_buf());
    if depth > 16 || !seen.insert(canon.clone()) {
        errs.push(format!("{}: include cycle", path.display()));
        return;
    }
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            errs.push(format!("{}: {e}", path.display()));
            return;
        }
    };
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let origin = format!("{}:{}", path.display(), i + 1);
        let Some((k, v)) = line.split_once('=') else {
            errs.push(format!("{origin}: expected `key = value`"));
            continue;
        };
        let (k, v) = (k.trim(), v.trim());
        if k == "include" {
            let inc = path.parent().unwrap_or(Path::new(".")).join(v);
            read_lines(&inc, depth + 1, seen, out, errs);
        } else {
            out.push(Assignment {
                key: k.into(),
                value: v.into(),
                origin,
            });
        }
    }
    seen.remove(&canon);
}

/// Parses a config file (with includes) into assignments.
pub fn read_assignments(path: &Path) -> Result<Vec<Assignment>> {
    let (mut out, mut errs) = (Vec::new(), Vec::new());
    read_lines(path, 0, &mut BTreeSet::new(), &mut out, &mut errs);
    if errs.is_empty() {
        Ok(out)
    } else {
        Err(McganError::Config(errs))
    }
}

/// Parses a `key=value` command-line override.
pub fn parse_override(s: &str) -> Result<Assignment> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| McganError::Config(vec![format!("override `{s}` is not key=value")]))?;
    Ok(Assignment {
        key: k.trim().into(),
        value: v.trim().into(),
        origin: "command line".into(),
    })
}

/// Builds a config from assignments in order, `scale` first.
pub fn build(assignments: &[Assignment]) -> Result<RunConfig> {
    let mut errs = Vec::new();
    let mut cfg = RunConfig::preset(Scale::Reduced);
    let mut scale = Scale::Reduced;
    for a in assignments.iter().filter(|a| a.key == "scale") {
        match cfg.set("scale", &a.value) {
            Ok(()) => scale = cfg.scale,
            Err(e) => errs.push(format!("{}: scale: {e}", a.origin)),
        }
    }
    cfg = RunConfig::preset(scale);
    for a in assignments.iter().filter(|a| a.key != "scale") {
        if let Err(e) = cfg.set(&a.key, &a.value) {
            errs.push(format!("{}: {}: {e}", a.origin, a.key));
        }
    }
    if let Err(McganError::Config(e)) = cfg.validate() {
        errs.extend(e);
    }
    if errs.is_empty() {
        Ok(cfg)
    } else {
        Err(McganError::Config(errs))
    }
}
