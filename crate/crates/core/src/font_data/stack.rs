//! Glyph stacks (26 grayscale channels) and color glyph sets.

use mcgan_nn::Tensor;
use serde::{Deserialize, Serialize};

use super::glyph::{GlyphImage, GLYPH_PIXELS, GLYPH_SIZE};
use crate::error::{McganError, Result};
use crate::letters::{LetterSet, NUM_LETTERS};

/// Maps a `[0, 1]` intensity to the network range `[-1, 1]`.
pub fn to_network(v: f64) -> f64 {
    2.0 * v - 1.0
}

/// Inverse of [`to_network`], clamped.
pub fn from_network(v: f64) -> f64 {
    ((v + 1.0) / 2.0).clamp(0.0, 1.0)
}

/// One font's 26 glyphs, `A..Z`, and which of them are observed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlyphStack {
    channels: Vec<GlyphImage>,
    pub observed: LetterSet,
}

impl GlyphStack {
    /// A fully observed stack.
    pub fn new(channels: Vec<GlyphImage>) -> Result<Self> {
        if channels.len() != NUM_LETTERS {
            return Err(McganError::InvalidInput(format!(
                "a glyph stack needs {NUM_LETTERS} channels, got {}",
                channels.len()
            )));
        }
        Ok(GlyphStack {
            channels,
            observed: LetterSet::ALL,
        })
    }

    pub fn channels(&self) -> &[GlyphImage] {
        &self.channels
    }

    pub fn channel(&self, i: usize) -> &GlyphImage {
        &self.channels[i]
    }

    /// Network-range tensor `1×26×64×64`.
    pub fn to_tensor(&self) -> Tensor {
        let mut data = Vec::with_capacity(NUM_LETTERS * GLYPH_PIXELS);
        for c in &self.channels {
            data.extend(c.pixels().iter().map(|&v| to_network(v)));
        }
        Tensor::from_vec(&[1, NUM_LETTERS, GLYPH_SIZE, GLYPH_SIZE], data).expect("fixed shape")
    }

    /// Builds a stack from batch item `n` of a network-range `B×26×64×64`
    /// tensor.
    pub fn from_tensor(t: &Tensor, n: usize, observed: LetterSet) -> Result<Self> {
        let (b, c, h, w) = t.dims4()?;
        if n >= b || c != NUM_LETTERS || h != GLYPH_SIZE || w != GLYPH_SIZE {
            return Err(McganError::ShapeMismatch {
                expected: vec![n + 1, NUM_LETTERS, GLYPH_SIZE, GLYPH_SIZE],
                actual: t.shape().to_vec(),
            });
        }
        let channels = (0..NUM_LETTERS)
            .map(|ch| {
                GlyphImage::from_pixels_clamped(t.plane(n, ch).iter().map(|&v| from_network(v)).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GlyphStack { channels, observed })
    }
}

/// Zeroes every channel outside `observed` and records the observation set.
pub fn mask_stack(stack: &GlyphStack, observed: LetterSet) -> Result<GlyphStack> {
    if observed.is_empty() {
        return Err(McganError::EmptyObservationSet);
    }
    let channels = stack
        .channels
        .iter()
        .enumerate()
        .map(|(i, c)| {
            if observed.contains(i) {
                c.clone()
            } else {
                GlyphImage::blank()
            }
        })
        .collect();
    Ok(GlyphStack { channels, observed })
}

/// A planar `3×64×64` RGB image, values in `[0, 1]`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct ColorImage {
    data: Vec<f64>,
}

impl std::fmt::Debug for ColorImage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ColorImage(mean {:.3})", self.data.iter().sum::<f64>() / self.data.len() as f64)
    }
}

impl Default for ColorImage {
    fn default() -> Self {
        Self::black()
    }
}

impl ColorImage {
    pub fn black() -> Self {
        ColorImage {
            data: vec![0.0; 3 * GLYPH_PIXELS],
        }
    }

    pub fn from_planar(data: Vec<f64>) -> Result<Self> {
        if data.len() != 3 * GLYPH_PIXELS {
            return Err(McganError::ShapeMismatch {
                expected: vec![3, GLYPH_SIZE, GLYPH_SIZE],
                actual: vec![data.len()],
            });
        }
        if let Some(bad) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(McganError::InvalidInput(format!("color value {bad} outside [0, 1]")));
        }
        Ok(ColorImage { data })
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, channel: usize, x: usize, y: usize) -> f64 {
        self.data[channel * GLYPH_PIXELS + y * GLYPH_SIZE + x]
    }

    pub fn set(&mut self, channel: usize, x: usize, y: usize, v: f64) {
        self.data[channel * GLYPH_PIXELS + y * GLYPH_SIZE + x] = v;
    }

    pub fn rgb(&self, x: usize, y: usize) -> [f64; 3] {
        [self.get(0, x, y), self.get(1, x, y), self.get(2, x, y)]
    }

    /// Gray replicated into all three channels.
    pub fn from_gray(glyph: &GlyphImage) -> Self {
        let mut data = Vec::with_capacity(3 * GLYPH_PIXELS);
        for _ in 0..3 {
            data.extend_from_slice(glyph.pixels());
        }
        ColorImage { data }
    }

    /// Binary shape mask: 1 wherever any channel is lit.
    pub fn shape_mask(&self) -> GlyphImage {
        let px = (0..GLYPH_PIXELS)
            .map(|i| {
                let m = (0..3).map(|c| self.data[c * GLYPH_PIXELS + i]).fold(0.0, f64::max);
                if m > SHAPE_THRESHOLD {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        GlyphImage::from_pixels(px).expect("binary mask is valid")
    }

    pub fn is_black(&self) -> bool {
        self.data.iter().all(|&v| v <= 0.0)
    }
}

/// Channel value above which a color pixel counts as glyph foreground.
pub const SHAPE_THRESHOLD: f64 = 8.0 / 255.0;

/// 26 RGB glyphs, `A..Z`, and which of them are observed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColorGlyphSet {
    images: Vec<ColorImage>,
    pub observed: LetterSet,
}

impl ColorGlyphSet {
    pub fn new(images: Vec<ColorImage>) -> Result<Self> {
        if images.len() != NUM_LETTERS {
            return Err(McganError::InvalidInput(format!(
                "a color glyph set needs {NUM_LETTERS} images, got {}",
                images.len()
            )));
        }
        Ok(ColorGlyphSet {
            images,
            observed: LetterSet::ALL,
        })
    }

    pub fn images(&self) -> &[ColorImage] {
        &self.images
    }

    pub fn image(&self, i: usize) -> &ColorImage {
        &self.images[i]
    }

    /// Keeps only `observed` letters; the others become black.
    pub fn restrict(&self, observed: LetterSet) -> Result<Self> {
        if observed.is_empty() {
            return Err(McganError::EmptyObservationSet);
        }
        let images = self
            .images
            .iter()
            .enumerate()
            .map(|(i, im)| {
                if observed.contains(i) {
                    im.clone()
                } else {
                    ColorImage::black()
                }
            })
            .collect();
        Ok(ColorGlyphSet { images, observed })
    }

    /// Network-range tensor `26×3×64×64` (letters as the batch axis).
    pub fn to_batch_tensor(&self) -> Tensor {
        let mut data = Vec::with_capacity(NUM_LETTERS * 3 * GLYPH_PIXELS);
        for im in &self.images {
            data.extend(im.data().iter().map(|&v| to_network(v)));
        }
        Tensor::from_vec(&[NUM_LETTERS, 3, GLYPH_SIZE, GLYPH_SIZE], data).expect("fixed shape")
    }

    /// Network-range `1×78×64×64` tensor, letter-major (`A.r, A.g, A.b, B.r…`).
    pub fn to_stack_tensor(&self) -> Tensor {
        self.to_batch_tensor()
            .reshape(&[1, 3 * NUM_LETTERS, GLYPH_SIZE, GLYPH_SIZE])
            .expect("same element count")
    }

    /// From a network-range tensor whose elements are laid out as 26
    /// consecutive `3×64×64` blocks (either `26×3×64×64` or `1×78×64×64`).
    pub fn from_network_tensor(t: &Tensor, observed: LetterSet) -> Result<Self> {
        if t.len() != NUM_LETTERS * 3 * GLYPH_PIXELS {
            return Err(McganError::ShapeMismatch {
                expected: vec![NUM_LETTERS, 3, GLYPH_SIZE, GLYPH_SIZE],
                actual: t.shape().to_vec(),
            });
        }
        let images = t
            .data()
            .chunks_exact(3 * GLYPH_PIXELS)
            .map(|c| ColorImage {
                data: c.iter().map(|&v| from_network(v)).collect(),
            })
            .collect();
        Ok(ColorGlyphSet { images, observed })
    }

    /// Per-letter binary shapes as a glyph stack.
    pub fn shape_stack(&self) -> GlyphStack {
        GlyphStack {
            channels: self.images.iter().map(ColorImage::shape_mask).collect(),
            observed: self.observed,
        }
    }
}
