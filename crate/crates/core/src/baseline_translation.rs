//! Single-network baseline: GlyphNet's architecture over 78-channel RGB
//! letter stacks (26 letters × 3 planes), trained on the color dataset and
//! applied without per-font fine-tuning.

use std::path::Path;

use image::RgbImage;
use mcgan_nn::{NetworkSpec, ParamSet, Tensor};

use crate::error::{McganError, Result};
use crate::font_data::store::{read_color_set_png, sheet, write_contact_sheet};
use crate::font_data::{ColorGlyphSet, DatasetManifest};
use crate::gan::runner::{run_training, RunOptions, RunOutcome};
use crate::gan::{generator_spec, mask_network_stack, run_generator, GeneratorArch, StackGan, StackGanConfig};
use crate::letters::{LetterSet, NUM_LETTERS};

pub const BASELINE_G_NAME: &str = "B";
pub const BASELINE_D_NAME: &str = "DB";
pub const BASELINE_CHANNELS: usize = 3 * NUM_LETTERS;

/// 78→78 generator whose first layer has one group of three planes per
/// letter.
pub fn build_baseline_spec(arch: &GeneratorArch) -> NetworkSpec {
    generator_spec(BASELINE_G_NAME, BASELINE_CHANNELS, BASELINE_CHANNELS, Some(NUM_LETTERS), arch)
}

/// Observed letters of a color set as a network-range `1×78×64×64` stack;
/// unobserved letters are black in all three planes.
pub fn color_stack(set: &ColorGlyphSet) -> Result<Tensor> {
    mask_network_stack(&set.to_stack_tensor(), set.observed, 3)
}

pub fn new_baseline(config: StackGanConfig) -> Result<StackGan> {
    StackGan::new(config, 3, (BASELINE_G_NAME, BASELINE_D_NAME))
}

/// Loads every color set of a manifest as a `1×78×64×64` stack.
pub fn load_color_corpus(manifest: &DatasetManifest) -> Result<Vec<Tensor>> {
    manifest
        .entries
        .iter()
        .map(|e| {
            read_color_set_png(&manifest.resolve(e))
                .map(|s| s.to_stack_tensor())
                .map_err(|err| McganError::Font {
                    font_id: e.font_id.clone(),
                    source: Box::new(err),
                })
        })
        .collect()
}

/// Trains the baseline with the GlyphNet objective in RGB space, masking
/// random observed subsets at letter granularity.
pub fn train_baseline(color_manifest: &DatasetManifest, config: StackGanConfig, opts: &RunOptions) -> Result<RunOutcome> {
    if color_manifest.is_empty() {
        return Err(McganError::InvalidInput("color manifest is empty".into()));
    }
    let corpus = load_color_corpus(color_manifest)?;
    run_training(new_baseline(config)?, &corpus, opts)
}

/// One eval-mode forward pass from the observed letters of `observed`.
pub fn predict_baseline(spec: &NetworkSpec, params: &ParamSet, observed: &ColorGlyphSet) -> Result<ColorGlyphSet> {
    let out = run_generator(spec, params, &color_stack(observed)?)?;
    ColorGlyphSet::from_network_tensor(&out, LetterSet::ALL)
}

/// Rows: observed input, baseline output, MC-GAN output, and ground truth
/// when known.
pub fn comparison_sheet(
    observed: &ColorGlyphSet,
    baseline: &ColorGlyphSet,
    mcgan: &ColorGlyphSet,
    truth: Option<&ColorGlyphSet>,
) -> RgbImage {
    let mut rows = vec![observed, baseline, mcgan];
    rows.extend(truth);
    sheet(&rows, NUM_LETTERS)
}

pub fn write_comparison_sheet(
    path: &Path,
    observed: &ColorGlyphSet,
    baseline: &ColorGlyphSet,
    mcgan: &ColorGlyphSet,
    truth: Option<&ColorGlyphSet>,
) -> Result<()> {
    let mut rows = vec![observed, baseline, mcgan];
    rows.extend(truth);
    write_contact_sheet(path, &rows, NUM_LETTERS)
}
