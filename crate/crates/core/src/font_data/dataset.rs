//! Building on-disk datasets: grayscale font corpora and their ornamented
//! color variants.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::gradient::{apply_gradient, GradientSpec};
use super::manifest::{DatasetManifest, Split};
use super::stack::ColorGlyphSet;
use super::glyph::normalize_glyph;
use super::stack::GlyphStack;
use super::store::{read_raw_image, read_stack_png, write_color_set_png, write_stack_png};
use super::synthetic::SyntheticFont;
use crate::error::{McganError, Result};

fn font_err(font_id: &str) -> impl FnOnce(McganError) -> McganError + '_ {
    move |e| McganError::Font {
        font_id: font_id.to_string(),
        source: Box::new(e),
    }
}

/// Renders `count` procedural fonts into `out_dir/fonts/` and writes
/// `out_dir/manifest.tsv`.
pub fn generate_synthetic_fonts(out_dir: &Path, count: usize, seed: u64, split: Option<Split>) -> Result<DatasetManifest> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut manifest = DatasetManifest::new(out_dir);
    manifest.split = split;
    for k in 0..count {
        let font_id = format!("synth{seed}-{k:05}");
        let font = SyntheticFont::random(&mut rng);
        let rel = PathBuf::from("fonts").join(format!("{font_id}.png"));
        let stack = font.render().map_err(font_err(&font_id))?;
        write_stack_png(&out_dir.join(&rel), &stack).map_err(font_err(&font_id))?;
        manifest.push(&font_id, rel)?;
    }
    manifest.save(&out_dir.join("manifest.tsv"))?;
    Ok(manifest)
}

/// Imports fonts given as one directory per font holding `A.png`..`Z.png`
/// (any case). Each glyph is normalized; font ids are directory names, in
/// sorted order. Writes `out_dir/fonts/` and `out_dir/manifest.tsv`.
pub fn import_font_dirs(raw_dir: &Path, out_dir: &Path, split: Option<Split>) -> Result<DatasetManifest> {
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(raw_dir)
        .map_err(McganError::io(raw_dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    dirs.sort();
    if dirs.is_empty() {
        return Err(McganError::InvalidInput(format!("{} holds no font directories", raw_dir.display())));
    }
    let mut manifest = DatasetManifest::new(out_dir);
    manifest.split = split;
    for dir in dirs {
        let font_id = dir.file_name().and_then(|n| n.to_str()).unwrap_or("?").to_string();
        let glyphs = (0..crate::NUM_LETTERS)
            .map(|l| {
                let c = crate::letter(l);
                let path = [c, c.to_ascii_lowercase()]
                    .iter()
                    .map(|c| dir.join(format!("{c}.png")))
                    .find(|p| p.is_file())
                    .ok_or_else(|| McganError::InvalidInput(format!("missing glyph {c}.png")))?;
                normalize_glyph(&read_raw_image(&path)?)
            })
            .collect::<Result<Vec<_>>>()
            .map_err(font_err(&font_id))?;
        let rel = PathBuf::from("fonts").join(format!("{font_id}.png"));
        write_stack_png(&out_dir.join(&rel), &GlyphStack::new(glyphs)?).map_err(font_err(&font_id))?;
        manifest.push(&font_id, rel)?;
    }
    manifest.save(&out_dir.join("manifest.tsv"))?;
    Ok(manifest)
}

/// Draws `variants_per_font` random gradients per input font, writes each
/// colored strip to `out_dir/color/` and returns (and saves as
/// `out_dir/manifest.tsv`) the color manifest. Fonts are processed in
/// manifest order from one seeded stream, so output is bit-deterministic.
pub fn generate_color_dataset(
    manifest: &DatasetManifest,
    variants_per_font: usize,
    seed: u64,
    out_dir: &Path,
) -> Result<DatasetManifest> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = DatasetManifest::new(out_dir);
    out.split = manifest.split;
    for entry in &manifest.entries {
        let stack = read_stack_png(&manifest.resolve(entry)).map_err(font_err(&entry.font_id))?;
        for v in 0..variants_per_font {
            let spec = GradientSpec::random(&mut rng);
            let images = stack
                .channels()
                .iter()
                .map(|g| apply_gradient(g, &spec))
                .collect::<Result<Vec<_>>>()
                .map_err(font_err(&entry.font_id))?;
            let set = ColorGlyphSet::new(images)?;
            let id = format!("{}-c{v}", entry.font_id);
            let rel = PathBuf::from("color").join(format!("{id}.png"));
            write_color_set_png(&out_dir.join(&rel), &set).map_err(font_err(&entry.font_id))?;
            out.push(id, rel)?;
        }
    }
    out.save(&out_dir.join("manifest.tsv"))?;
    Ok(out)
}

/// Draws `k` distinct indices below `n` (a partial Fisher–Yates shuffle).
pub fn sample_distinct<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    let k = k.min(n);
    for i in 0..k {
        let j = rng.random_range(i..n);
        idx.swap(i, j);
    }
    idx.truncate(k);
    idx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn color_dataset_counts_and_determinism() {
        let dir = tempfile::tempdir().unwrap();
        let fonts = generate_synthetic_fonts(&dir.path().join("gray"), 1, 4, Some(Split::Train)).unwrap();
        let a = generate_color_dataset(&fonts, 2, 11, &dir.path().join("a")).unwrap();
        let b = generate_color_dataset(&fonts, 2, 11, &dir.path().join("b")).unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!(a, b);
        for (ea, eb) in a.entries.iter().zip(&b.entries) {
            let (ba, bb) = (std::fs::read(a.resolve(ea)).unwrap(), std::fs::read(b.resolve(eb)).unwrap());
            assert_eq!(ba, bb);
        }
        let v0 = std::fs::read(a.resolve(&a.entries[0])).unwrap();
        let v1 = std::fs::read(a.resolve(&a.entries[1])).unwrap();
        assert_ne!(v0, v1, "variants should use distinct gradients");
        assert_eq!(DatasetManifest::load(&dir.path().join("a/manifest.tsv")).unwrap(), a);
    }

    #[test]
    fn missing_font_error_names_the_font() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = DatasetManifest::new(dir.path());
        m.push("ghost", "nope.png").unwrap();
        let err = generate_color_dataset(&m, 2, 0, &dir.path().join("out")).unwrap_err();
        assert!(err.to_string().contains("ghost"), "{err}");
    }

    #[test]
    fn sample_distinct_is_distinct() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for k in 0..=26 {
            let mut s = sample_distinct(&mut rng, 26, k);
            s.sort();
            s.dedup();
            assert_eq!(s.len(), k);
        }
    }
}
