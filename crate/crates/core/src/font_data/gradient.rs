//! Synthetic ornamentation: linear color gradients with an optional outline.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::glyph::{GlyphImage, GLYPH_SIZE};
use super::stack::ColorImage;
use crate::error::{McganError, Result};

pub type Rgb = [f64; 3];

/// Background of ornamented glyphs.
pub const BACKGROUND: Rgb = [0.0, 0.0, 0.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientSpec {
    pub color_a: Rgb,
    pub color_b: Rgb,
    /// Unit vector in `(x, y)` image coordinates, `y` pointing down.
    pub direction: [f64; 2],
    pub outline_color: Option<Rgb>,
    pub outline_width: usize,
}

impl GradientSpec {
    pub fn validate(&self) -> Result<()> {
        let norm = self.direction[0].hypot(self.direction[1]);
        if (norm - 1.0).abs() > 1e-9 {
            return Err(McganError::InvalidInput(format!(
                "gradient direction has norm {norm}, expected 1"
            )));
        }
        let colors = [Some(self.color_a), Some(self.color_b), self.outline_color];
        for c in colors.iter().flatten() {
            if c.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(McganError::InvalidInput(format!("color {c:?} outside [0, 1]^3")));
            }
        }
        Ok(())
    }

    /// Direction uniform on the circle, colors uniform in the unit cube, an
    /// outline of width 1–2 with probability one half.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let theta = rng.random_range(0.0..std::f64::consts::TAU);
        let mut color = || [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()];
        let color_a = color();
        let color_b = color();
        let outline_color = color();
        let outlined = rng.random_bool(0.5);
        let outline_width = if outlined { rng.random_range(1..=2) } else { 0 };
        GradientSpec {
            color_a,
            color_b,
            direction: [theta.cos(), theta.sin()],
            outline_color: outlined.then_some(outline_color),
            outline_width,
        }
    }

    /// Interpolation parameter in `[0, 1]` for pixel `(x, y)` given the
    /// glyph's inclusive bounding box.
    pub fn position(&self, x: usize, y: usize, bbox: (usize, usize, usize, usize)) -> f64 {
        let (x0, y0, x1, y1) = bbox;
        let [dx, dy] = self.direction;
        let proj = |px: usize, py: usize| px as f64 * dx + py as f64 * dy;
        let corners = [proj(x0, y0), proj(x1, y0), proj(x0, y1), proj(x1, y1)];
        let lo = corners.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = corners.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi - lo <= 0.0 {
            0.0
        } else {
            ((proj(x, y) - lo) / (hi - lo)).clamp(0.0, 1.0)
        }
    }
}

/// Whether a lit pixel lies within `width` (Chebyshev) of an unlit one.
fn on_inner_ring(glyph: &GlyphImage, x: usize, y: usize, width: usize) -> bool {
    let w = width as isize;
    for oy in -w..=w {
        for ox in -w..=w {
            let (nx, ny) = (x as isize + ox, y as isize + oy);
            let outside = nx < 0 || ny < 0 || nx >= GLYPH_SIZE as isize || ny >= GLYPH_SIZE as isize;
            if outside || glyph.get(nx as usize, ny as usize) <= 0.0 {
                return true;
            }
        }
    }
    false
}

/// Colors a glyph. Each lit pixel gets the gradient color (or the outline
/// color on the inner ring of the given width), weighted by its coverage;
/// unlit pixels keep the background. The lit set is therefore preserved.
pub fn apply_gradient(glyph: &GlyphImage, spec: &GradientSpec) -> Result<ColorImage> {
    spec.validate()?;
    let mut out = ColorImage::black();
    let Some(bbox) = glyph.bounding_box() else {
        return Ok(out);
    };
    for y in 0..GLYPH_SIZE {
        for x in 0..GLYPH_SIZE {
            let alpha = glyph.get(x, y);
            if alpha <= 0.0 {
                continue;
            }
            let color = match spec.outline_color {
                Some(oc) if spec.outline_width > 0 && on_inner_ring(glyph, x, y, spec.outline_width) => oc,
                _ => {
                    let t = spec.position(x, y, bbox);
                    [0, 1, 2].map(|c| spec.color_a[c] + t * (spec.color_b[c] - spec.color_a[c]))
                }
            };
            for c in 0..3 {
                out.set(c, x, y, alpha * color[c] + (1.0 - alpha) * BACKGROUND[c]);
            }
        }
    }
    Ok(out)
}

/// Rec. 601 luma.
pub fn luminance(rgb: Rgb) -> f64 {
    0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2]
}
