//! Windowed structural similarity with a Gaussian window over the valid
//! region of the image.

use serde::{Deserialize, Serialize};

use crate::error::{McganError, Result};
use crate::font_data::{GlyphImage, GLYPH_SIZE};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SsimConfig {
    pub window: usize,
    pub sigma: f64,
    pub k1: f64,
    pub k2: f64,
    pub dynamic_range: f64,
}

impl Default for SsimConfig {
    fn default() -> Self {
        SsimConfig {
            window: 11,
            sigma: 1.5,
            k1: 0.01,
            k2: 0.03,
            dynamic_range: 1.0,
        }
    }
}

impl SsimConfig {
    pub fn c1(&self) -> f64 {
        (self.k1 * self.dynamic_range).powi(2)
    }

    pub fn c2(&self) -> f64 {
        (self.k2 * self.dynamic_range).powi(2)
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if self.window.is_multiple_of(2) || self.window > GLYPH_SIZE {
            errs.push(format!("SSIM window {} must be odd and at most {GLYPH_SIZE}", self.window));
        }
        if self.sigma.is_nan() || self.sigma <= 0.0 {
            errs.push(format!("SSIM sigma {} must be positive", self.sigma));
        }
        if !(self.k1 > 0.0 && self.k2 > 0.0 && self.dynamic_range > 0.0) {
            errs.push("SSIM constants must be positive".to_string());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(McganError::Config(errs))
        }
    }

    /// Normalized 1-D Gaussian taps; the 2-D window is their outer product.
    pub fn taps(&self) -> Vec<f64> {
        let r = (self.window / 2) as f64;
        let raw: Vec<f64> = (0..self.window)
            .map(|i| {
                let d = i as f64 - r;
                (-d * d / (2.0 * self.sigma * self.sigma)).exp()
            })
            .collect();
        let s: f64 = raw.iter().sum();
        raw.into_iter().map(|v| v / s).collect()
    }
}

/// Separable valid-mode filter of a `size×size` image.
fn filter(img: &[f64], size: usize, taps: &[f64]) -> Vec<f64> {
    let w = taps.len();
    let out = size + 1 - w;
    let mut rows = vec![0.0; size * out];
    for y in 0..size {
        for x in 0..out {
            rows[y * out + x] = taps.iter().enumerate().map(|(k, t)| t * img[y * size + x + k]).sum();
        }
    }
    let mut res = vec![0.0; out * out];
    for y in 0..out {
        for x in 0..out {
            res[y * out + x] = taps.iter().enumerate().map(|(k, t)| t * rows[(y + k) * out + x]).sum();
        }
    }
    res
}

/// SSIM of two square images given as row-major pixel slices.
pub fn ssim_pixels(a: &[f64], b: &[f64], size: usize, cfg: &SsimConfig) -> Result<f64> {
    if a.len() != b.len() || a.len() != size * size {
        return Err(McganError::ShapeMismatch {
            expected: vec![size, size],
            actual: vec![a.len().min(b.len()), a.len().max(b.len())],
        });
    }
    cfg.validate()?;
    let taps = cfg.taps();
    let prod = |f: &dyn Fn(usize) -> f64| (0..a.len()).map(f).collect::<Vec<f64>>();
    let mu_a = filter(a, size, &taps);
    let mu_b = filter(b, size, &taps);
    let aa = filter(&prod(&|i| a[i] * a[i]), size, &taps);
    let bb = filter(&prod(&|i| b[i] * b[i]), size, &taps);
    let ab = filter(&prod(&|i| a[i] * b[i]), size, &taps);
    let (c1, c2) = (cfg.c1(), cfg.c2());
    let total: f64 = (0..mu_a.len())
        .map(|i| {
            let (ma, mb) = (mu_a[i], mu_b[i]);
            let va = aa[i] - ma * ma;
            let vb = bb[i] - mb * mb;
            let cov = ab[i] - ma * mb;
            ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2))
        })
        .sum();
    Ok(total / mu_a.len() as f64)
}

pub fn ssim(a: &GlyphImage, b: &GlyphImage, cfg: &SsimConfig) -> Result<f64> {
    ssim_pixels(a.pixels(), b.pixels(), GLYPH_SIZE, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn taps_are_normalized_and_symmetric() {
        let t = SsimConfig::default().taps();
        assert_eq!(t.len(), 11);
        assert!((t.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        for i in 0..5 {
            assert_eq!(t[i], t[10 - i]);
        }
    }

    #[test]
    fn self_similarity_is_one() {
        let px: Vec<f64> = (0..4096).map(|i| ((i * 37) % 101) as f64 / 100.0).collect();
        let g = GlyphImage::from_pixels(px).unwrap();
        assert!((ssim(&g, &g, &SsimConfig::default()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_even_window() {
        let cfg = SsimConfig {
            window: 10,
            ..SsimConfig::default()
        };
        let g = GlyphImage::blank();
        assert!(ssim(&g, &g, &cfg).is_err());
    }
}
