//! Exhaustive nearest-neighbor scan over grayscale glyph stacks.

use crate::error::{McganError, Result};
use crate::font_data::store::read_stack_png;
use crate::font_data::{DatasetManifest, GlyphStack};

/// Root mean squared pixel difference over all 26 glyphs.
pub fn stack_distance(a: &GlyphStack, b: &GlyphStack) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for (ca, cb) in a.channels().iter().zip(b.channels()) {
        for (x, y) in ca.pixels().iter().zip(cb.pixels()) {
            sum += (x - y) * (x - y);
            n += 1;
        }
    }
    (sum / n as f64).sqrt()
}

/// The closest candidate by [`stack_distance`]; ties keep the earlier one.
pub fn nearest_neighbor<'a>(query: &GlyphStack, candidates: &'a [(String, GlyphStack)]) -> Result<(&'a str, f64)> {
    let mut best: Option<(&str, f64)> = None;
    for (id, stack) in candidates {
        let d = stack_distance(query, stack);
        if best.is_none_or(|b| d < b.1) {
            best = Some((id, d));
        }
    }
    best.ok_or_else(|| McganError::InvalidInput("nearest-neighbor scan over an empty set".into()))
}

/// Scans every font of `manifest`, loading one stack at a time.
pub fn nearest_neighbor_check(query: &GlyphStack, manifest: &DatasetManifest) -> Result<(String, f64)> {
    let mut best: Option<(String, f64)> = None;
    for e in &manifest.entries {
        let stack = read_stack_png(&manifest.resolve(e)).map_err(|err| McganError::Font {
            font_id: e.font_id.clone(),
            source: Box::new(err),
        })?;
        let d = stack_distance(query, &stack);
        if best.as_ref().is_none_or(|b| d < b.1) {
            best = Some((e.font_id.clone(), d));
        }
    }
    best.ok_or_else(|| McganError::InvalidInput("nearest-neighbor scan over an empty manifest".into()))
}
