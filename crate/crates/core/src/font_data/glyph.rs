//! Single-glyph images and the normalization that produces them.

use serde::{Deserialize, Serialize};

use crate::error::{McganError, Result};

/// Side length of every normalized glyph.
pub const GLYPH_SIZE: usize = 64;
pub const GLYPH_PIXELS: usize = GLYPH_SIZE * GLYPH_SIZE;

/// A grayscale raster of arbitrary size, values in `[0, 1]`, white
/// foreground on black background.
#[derive(Debug, Clone, PartialEq)]
pub struct RawImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<f64>,
}

impl RawImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(McganError::InvalidInput(format!(
                "{} pixels for a {width}x{height} image",
                pixels.len()
            )));
        }
        Ok(RawImage {
            width,
            height,
            pixels,
        })
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    /// Inverts intensities when the border is mostly bright, so that
    /// black-on-white scans come out white-on-black.
    pub fn with_dark_background(mut self) -> Self {
        let (w, h) = (self.width, self.height);
        if w == 0 || h == 0 {
            return self;
        }
        let mut sum = 0.0;
        let mut count = 0usize;
        for x in 0..w {
            sum += self.get(x, 0) + self.get(x, h - 1);
            count += 2;
        }
        for y in 0..h {
            sum += self.get(0, y) + self.get(w - 1, y);
            count += 2;
        }
        if sum / count as f64 > 0.5 {
            for p in &mut self.pixels {
                *p = 1.0 - *p;
            }
        }
        self
    }
}

/// A 64×64 glyph, row-major, intensities in `[0, 1]`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct GlyphImage {
    pixels: Vec<f64>,
}

impl std::fmt::Debug for GlyphImage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let on = self.pixels.iter().filter(|&&v| v > 0.0).count();
        write!(f, "GlyphImage({on} foreground pixels)")
    }
}

impl Default for GlyphImage {
    fn default() -> Self {
        Self::blank()
    }
}

impl GlyphImage {
    pub fn blank() -> Self {
        GlyphImage {
            pixels: vec![0.0; GLYPH_PIXELS],
        }
    }

    pub fn from_pixels(pixels: Vec<f64>) -> Result<Self> {
        if pixels.len() != GLYPH_PIXELS {
            return Err(McganError::ShapeMismatch {
                expected: vec![GLYPH_SIZE, GLYPH_SIZE],
                actual: vec![pixels.len()],
            });
        }
        if let Some(bad) = pixels.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(McganError::InvalidInput(format!(
                "glyph intensity {bad} outside [0, 1]"
            )));
        }
        Ok(GlyphImage { pixels })
    }

    /// Clamps into `[0, 1]` instead of rejecting.
    pub fn from_pixels_clamped(pixels: Vec<f64>) -> Result<Self> {
        Self::from_pixels(pixels.into_iter().map(|v| v.clamp(0.0, 1.0)).collect())
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * GLYPH_SIZE + x]
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.iter().all(|&v| v <= 0.0)
    }

    /// Inclusive bounding box `(x0, y0, x1, y1)` of pixels above zero.
    pub fn bounding_box(&self) -> Option<(usize, usize, usize, usize)> {
        foreground_bbox(&self.pixels, GLYPH_SIZE, GLYPH_SIZE)
    }
}

fn foreground_bbox(px: &[f64], width: usize, height: usize) -> Option<(usize, usize, usize, usize)> {
    let mut bbox: Option<(usize, usize, usize, usize)> = None;
    for y in 0..height {
        for x in 0..width {
            if px[y * width + x] > 0.0 {
                bbox = Some(match bbox {
                    None => (x, y, x, y),
                    Some((x0, y0, x1, y1)) => (x0.min(x), y0.min(y), x1.max(x), y1.max(y)),
                });
            }
        }
    }
    bbox
}

/// Resamples one line of `src` to `dst_len` samples: area averaging when
/// shrinking, linear interpolation (pixel-center aligned) when growing.
fn resample_line(src: &[f64], dst_len: usize) -> Vec<f64> {
    let n = src.len();
    if n == dst_len {
        return src.to_vec();
    }
    if dst_len < n {
        let ratio = n as f64 / dst_len as f64;
        (0..dst_len)
            .map(|i| {
                let start = i as f64 * ratio;
                let end = start + ratio;
                let mut acc = 0.0;
                let mut j = start.floor() as usize;
                while (j as f64) < end && j < n {
                    let lo = start.max(j as f64);
                    let hi = end.min(j as f64 + 1.0);
                    acc += src[j] * (hi - lo);
                    j += 1;
                }
                acc / ratio
            })
            .collect()
    } else {
        let ratio = n as f64 / dst_len as f64;
        (0..dst_len)
            .map(|i| {
                let pos = ((i as f64 + 0.5) * ratio - 0.5).clamp(0.0, (n - 1) as f64);
                let j = pos.floor() as usize;
                let t = pos - j as f64;
                if j + 1 < n {
                    src[j] * (1.0 - t) + src[j + 1] * t
                } else {
                    src[j]
                }
            })
            .collect()
    }
}

/// Separable resize of a row-major `width×height` buffer.
pub fn resize(px: &[f64], width: usize, height: usize, new_w: usize, new_h: usize) -> Vec<f64> {
    let mut rows = Vec::with_capacity(new_w * height);
    for y in 0..height {
        rows.extend(resample_line(&px[y * width..(y + 1) * width], new_w));
    }
    let mut out = vec![0.0; new_w * new_h];
    let mut col = vec![0.0; height];
    for x in 0..new_w {
        for y in 0..height {
            col[y] = rows[y * new_w + x];
        }
        for (y, v) in resample_line(&col, new_h).into_iter().enumerate() {
            out[y * new_w + x] = v;
        }
    }
    out
}

/// Crops to the tight bounding box, scales isotropically so the longer side
/// is 64 pixels, and pads centered to 64×64.
pub fn normalize_glyph(raw: &RawImage) -> Result<GlyphImage> {
    let (x0, y0, x1, y1) =
        foreground_bbox(&raw.pixels, raw.width, raw.height).ok_or(McganError::EmptyGlyph)?;
    let (bw, bh) = (x1 - x0 + 1, y1 - y0 + 1);
    let mut crop = Vec::with_capacity(bw * bh);
    for y in y0..=y1 {
        crop.extend_from_slice(&raw.pixels[y * raw.width + x0..y * raw.width + x1 + 1]);
    }
    let scale = GLYPH_SIZE as f64 / bw.max(bh) as f64;
    let nw = ((bw as f64 * scale).round() as usize).clamp(1, GLYPH_SIZE);
    let nh = ((bh as f64 * scale).round() as usize).clamp(1, GLYPH_SIZE);
    let scaled = resize(&crop, bw, bh, nw, nh);
    let (left, top) = ((GLYPH_SIZE - nw) / 2, (GLYPH_SIZE - nh) / 2);
    let mut pixels = vec![0.0; GLYPH_PIXELS];
    for y in 0..nh {
        for x in 0..nw {
            pixels[(top + y) * GLYPH_SIZE + left + x] = scaled[y * nw + x].clamp(0.0, 1.0);
        }
    }
    let glyph = GlyphImage { pixels };
    if glyph.is_empty() {
        // Only possible when area averaging washes out sub-pixel content.
        return Err(McganError::EmptyGlyph);
    }
    Ok(glyph)
}
