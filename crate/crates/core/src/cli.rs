//! The `mcgan` command line.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{
    correlation_study, nearest_neighbor_check, observed_count_study, write_correlation_study, write_count_study,
};
use crate::baseline_translation::{predict_baseline, train_baseline, write_comparison_sheet};
use crate::config::{build, parse_override, read_assignments, Assignment, RunConfig};
use crate::error::{McganError, Result};
use crate::font_data::store::{read_color_set_png, read_stack_png};
use crate::font_data::{
    generate_color_dataset, generate_synthetic_fonts, import_font_dirs, DatasetManifest, GlyphStack, Split,
};
use crate::gan::runner::RunOptions;
use crate::gan::{LossLog, StackGan};
use crate::glyph_net::{pretrain_glyphnet, GlyphCorpus};
use crate::letters::LetterSet;
use crate::mcgan_stack::{load_observed_dir, write_synthesis, FineTuneState};

/// Environment variable naming the data root, against which relative
/// input paths are resolved.
pub const DATA_ROOT_ENV: &str = "MCGAN_DATA_ROOT";

#[derive(Debug, Parser)]
#[command(name = "mcgan", version, about = "Few-shot ornamented font synthesis")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// key = value config file; may include others.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory; overrides `out_dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Extra `key=value` assignments applied after the config file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Data root for relative input paths.
    #[arg(long, global = true, env = DATA_ROOT_ENV)]
    pub data_root: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build train/test grayscale manifests from font directories or
    /// procedural fonts.
    PrepareData {
        /// One subdirectory per font with `A.png`..`Z.png`; omitted means
        /// procedural fonts (`data.fonts` train, `data.test_fonts` test).
        #[arg(long)]
        raw: Option<PathBuf>,
    },
    /// Ornament every font of a manifest with random gradients.
    MakeColor {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Pretrain GlyphNet; resumes from checkpoints in the output directory.
    Pretrain {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Train the 78-channel baseline on a color manifest.
    TrainBaseline {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Fine-tune on one font's observed letters and write all 26.
    Synthesize(SynthesizeArgs),
    /// Run an analysis study.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Args)]
pub struct SynthesizeArgs {
    /// Directory of letter-named images (`T.png`, `O.png`, …).
    #[arg(long)]
    pub observed: PathBuf,
    /// Pretrained GlyphNet checkpoint.
    #[arg(long)]
    pub g1: PathBuf,
    /// Optional baseline checkpoint for a side-by-side comparison.
    #[arg(long)]
    pub baseline: Option<PathBuf>,
    /// Optional ground-truth color strip, added to the comparison and
    /// scored.
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AnalysisKind {
    Corr,
    Count,
    Nn,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    pub kind: AnalysisKind,
    /// Fonts to study (corr, count) or to scan (nn).
    #[arg(long)]
    pub manifest: PathBuf,
    /// Pretrained GlyphNet checkpoint (corr, count).
    #[arg(long)]
    pub g1: Option<PathBuf>,
    /// Query fonts for nn, as a manifest.
    #[arg(long)]
    pub queries: Option<PathBuf>,
}

/// Resolved settings shared by every command.
pub struct Context {
    pub config: RunConfig,
    pub out: PathBuf,
    data_root: Option<PathBuf>,
}

impl Context {
    pub fn from_common(c: &Common) -> Result<Self> {
        let mut assignments: Vec<Assignment> = match &c.config {
            Some(p) => read_assignments(p)?,
            None => Vec::new(),
        };
        for s in &c.set {
            assignments.push(parse_override(s)?);
        }
        if let Some(seed) = c.seed {
            assignments.push(parse_override(&format!("seed={seed}"))?);
        }
        let config = build(&assignments)?;
        let out = c.out.clone().unwrap_or_else(|| config.out_dir.clone());
        let data_root = c.data_root.clone().or_else(|| config.data_dir.clone());
        Ok(Context { config, out, data_root })
    }

    /// `p` as given if absolute or present, else under the data root.
    pub fn input(&self, p: &Path) -> PathBuf {
        match &self.data_root {
            Some(root) if p.is_relative() && !p.exists() => root.join(p),
            _ => p.to_path_buf(),
        }
    }

    fn manifest(&self, p: &Path) -> Result<DatasetManifest> {
        DatasetManifest::load(&self.input(p))
    }

    fn existing(&self, p: &Path, what: &str) -> Result<PathBuf> {
        let r = self.input(p);
        if r.exists() {
            Ok(r)
        } else {
            Err(McganError::InvalidInput(format!("{what} {} does not exist", r.display())))
        }
    }
}

fn run_options(ctx: &Context, steps: u64, sub: &str) -> RunOptions {
    RunOptions {
        steps,
        checkpoint_every: ctx.config.checkpoint_every,
        out_dir: Some(ctx.out.join(sub)),
        prefix: sub.into(),
    }
}

fn load_g1(path: &Path) -> Result<StackGan> {
    let g1 = StackGan::load(path)?;
    if g1.channels_per_letter != 1 {
        return Err(McganError::InvalidInput(format!(
            "{} is not a GlyphNet checkpoint",
            path.display()
        )));
    }
    Ok(g1)
}

fn load_stacks(m: &DatasetManifest, limit: usize) -> Result<Vec<GlyphStack>> {
    GlyphCorpus::load(&m.head(limit))?
        .stacks
        .iter()
        .map(|t| GlyphStack::from_tensor(t, 0, LetterSet::ALL))
        .collect::<Result<Vec<_>>>()
}

/// Runs one command, returning the lines to print on success.
pub fn run(cli: &Cli) -> Result<Vec<String>> {
    let ctx = Context::from_common(&cli.common)?;
    let cfg = &ctx.config;
    let mut report = Vec::new();
    match &cli.command {
        Command::PrepareData { raw } => {
            let train_dir = ctx.out.join("train");
            let m = match raw {
                Some(raw) => import_font_dirs(&ctx.existing(raw, "raw font directory")?, &train_dir, Some(Split::Train))?,
                None => {
                    let test_dir = ctx.out.join("test");
                    let t = generate_synthetic_fonts(&test_dir, cfg.test_fonts, cfg.seed ^ 0x7e57, Some(Split::Test))?;
                    report.push(format!("test\t{}\t{}", t.len(), test_dir.join("manifest.tsv").display()));
                    generate_synthetic_fonts(&train_dir, cfg.fonts, cfg.seed, Some(Split::Train))?
                }
            };
            report.push(format!("train\t{}\t{}", m.len(), train_dir.join("manifest.tsv").display()));
        }
        Command::MakeColor { manifest } => {
            let m = ctx.manifest(manifest)?;
            let dir = ctx.out.join("color");
            let c = generate_color_dataset(&m, cfg.color_variants, cfg.seed, &dir)?;
            report.push(format!("color\t{}\t{}", c.len(), dir.join("manifest.tsv").display()));
        }
        Command::Pretrain { manifest } => {
            let m = ctx.manifest(manifest)?;
            let opts = run_options(&ctx, cfg.pretrain_steps, "glyphnet");
            let out = pretrain_glyphnet(&m, cfg.glyphnet.clone(), &opts)?;
            report.extend(summary(&out.log, out.trainer.iteration, &opts));
        }
        Command::TrainBaseline { manifest } => {
            let m = ctx.manifest(manifest)?;
            let opts = run_options(&ctx, cfg.baseline_steps, "baseline");
            let out = train_baseline(&m, cfg.baseline.clone(), &opts)?;
            report.extend(summary(&out.log, out.trainer.iteration, &opts));
        }
        Command::Synthesize(a) => {
            // Inputs are validated before any training starts.
            let observed = load_observed_dir(&ctx.existing(&a.observed, "observed directory")?)?;
            let g1 = load_g1(&ctx.existing(&a.g1, "GlyphNet checkpoint")?)?;
            let baseline = a
                .baseline
                .as_ref()
                .map(|p| ctx.existing(p, "baseline checkpoint").and_then(|p| StackGan::load(&p)))
                .transpose()?;
            let truth = a
                .truth
                .as_ref()
                .map(|p| ctx.existing(p, "ground truth").and_then(|p| read_color_set_png(&p)))
                .transpose()?;
            let mut state = FineTuneState::new(&observed, &g1.g_spec, &g1.g, cfg.finetune.clone(), None)?;
            let mut log = LossLog::new();
            state.run(&mut log)?;
            let result = state.synthesize()?;
            std::fs::create_dir_all(&ctx.out).map_err(McganError::io(&ctx.out))?;
            log.save(&ctx.out.join("loss.tsv"))?;
            write_synthesis(&ctx.out, &result)?;
            report.push(format!("glyphs\t26\t{}", ctx.out.join("sheet.png").display()));
            if let Some(t) = &truth {
                let held_out = observed.observed.complement();
                report.push(format!("held_out_mae\t{:.6}", mean_abs_error(&result, t, held_out)));
            }
            if let Some(b) = baseline {
                let pred = predict_baseline(&b.g_spec, &b.g, &observed)?;
                let path = ctx.out.join("comparison.png");
                write_comparison_sheet(&path, &observed, &pred, &result, truth.as_ref())?;
                report.push(format!("comparison\t{}", path.display()));
            }
        }
        Command::Analyze(a) => {
            let m = ctx.manifest(&a.manifest)?;
            match a.kind {
                AnalysisKind::Corr | AnalysisKind::Count => {
                    let g1_path = a
                        .g1
                        .as_ref()
                        .ok_or_else(|| McganError::InvalidInput("--g1 is required for this study".into()))?;
                    let g1 = load_g1(&ctx.existing(g1_path, "GlyphNet checkpoint")?)?;
                    let fonts = load_stacks(&m, cfg.analysis_fonts)?;
                    if a.kind == AnalysisKind::Corr {
                        let dir = ctx.out.join("correlation");
                        let t = correlation_study(&g1.g_spec, &g1.g, &fonts, cfg.seed, &cfg.ssim)?;
                        write_correlation_study(&dir, &t)?;
                        report.push(format!("correlation\t{}\t{}", fonts.len(), dir.display()));
                    } else {
                        let dir = ctx.out.join("count");
                        let range = cfg.count_min..=cfg.count_max;
                        let s = observed_count_study(&g1.g_spec, &g1.g, &fonts, range, cfg.seed, &cfg.ssim)?;
                        write_count_study(&dir, &s)?;
                        for (n, med) in s.medians() {
                            report.push(format!("median\t{n}\t{med:.6}"));
                        }
                    }
                }
                AnalysisKind::Nn => {
                    let q = a
                        .queries
                        .as_ref()
                        .ok_or_else(|| McganError::InvalidInput("--queries is required for nn".into()))?;
                    let queries = ctx.manifest(q)?;
                    let mut table = String::from("query\tnearest\tdistance\n");
                    for e in &queries.entries {
                        let stack = read_stack_png(&queries.resolve(e))?;
                        let (id, d) = nearest_neighbor_check(&stack, &m)?;
                        table.push_str(&format!("{}\t{id}\t{d:.6}\n", e.font_id));
                        report.push(format!("nn\t{}\t{id}\t{d:.6}", e.font_id));
                    }
                    let path = ctx.out.join("nearest_neighbors.tsv");
                    std::fs::create_dir_all(&ctx.out).map_err(McganError::io(&ctx.out))?;
                    std::fs::write(&path, table).map_err(McganError::io(&path))?;
                }
            }
        }
    }
    Ok(report)
}

fn summary(log: &LossLog, iteration: u64, opts: &RunOptions) -> Vec<String> {
    let mut lines = vec![format!("iteration\t{iteration}")];
    if let Some((_, l1)) = log.series("l1").last() {
        lines.push(format!("l1\t{l1:.6}"));
    }
    if let Some(dir) = &opts.out_dir {
        lines.push(format!("checkpoints\t{}", dir.display()));
    }
    lines
}

/// Mean absolute pixel error over `letters`.
pub fn mean_abs_error(a: &crate::font_data::ColorGlyphSet, b: &crate::font_data::ColorGlyphSet, letters: LetterSet) -> f64 {
    let (mut sum, mut n) = (0.0, 0usize);
    for l in letters.iter() {
        for (x, y) in a.image(l).data().iter().zip(b.image(l).data()) {
            sum += (x - y).abs();
            n += 1;
        }
    }
    sum / n.max(1) as f64
}

/// One line, `error[kind]: message`, with newlines flattened.
pub fn format_error(e: &McganError) -> String {
    let msg = e.to_string().replace(['\n', '\r'], " ");
    format!("error[{}]: {msg}", e.kind())
}
