//! PNG persistence: per-font 26-frame tiles, single glyphs, contact sheets.

use std::path::Path;

use image::{GrayImage, ImageBuffer, Luma, Rgb, RgbImage};

use super::glyph::{normalize_glyph, GlyphImage, RawImage, GLYPH_SIZE};
use super::stack::{ColorGlyphSet, ColorImage, GlyphStack};
use crate::error::{McganError, Result};
use crate::letters::NUM_LETTERS;

fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

fn image_err(path: &Path, e: impl std::fmt::Display) -> McganError {
    McganError::Image {
        path: path.to_path_buf(),
        msg: e.to_string(),
    }
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(McganError::io(dir))?;
    }
    Ok(())
}

fn save_gray(path: &Path, img: &GrayImage) -> Result<()> {
    ensure_parent(path)?;
    img.save(path).map_err(|e| image_err(path, e))
}

fn save_rgb(path: &Path, img: &RgbImage) -> Result<()> {
    ensure_parent(path)?;
    img.save(path).map_err(|e| image_err(path, e))
}

/// Writes a stack as one `1664×64` grayscale strip, `A..Z` left to right.
pub fn write_stack_png(path: &Path, stack: &GlyphStack) -> Result<()> {
    let img = ImageBuffer::from_fn((NUM_LETTERS * GLYPH_SIZE) as u32, GLYPH_SIZE as u32, |x, y| {
        let (i, gx) = (x as usize / GLYPH_SIZE, x as usize % GLYPH_SIZE);
        Luma([quantize(stack.channel(i).get(gx, y as usize))])
    });
    save_gray(path, &img)
}

pub fn read_stack_png(path: &Path) -> Result<GlyphStack> {
    let img = image::open(path).map_err(|e| image_err(path, e))?.to_luma8();
    if img.dimensions() != ((NUM_LETTERS * GLYPH_SIZE) as u32, GLYPH_SIZE as u32) {
        return Err(image_err(
            path,
            format!("expected a {}x{} glyph strip, got {:?}", NUM_LETTERS * GLYPH_SIZE, GLYPH_SIZE, img.dimensions()),
        ));
    }
    let channels = (0..NUM_LETTERS)
        .map(|i| {
            let px = (0..GLYPH_SIZE * GLYPH_SIZE)
                .map(|p| {
                    let (x, y) = (p % GLYPH_SIZE, p / GLYPH_SIZE);
                    img.get_pixel((i * GLYPH_SIZE + x) as u32, y as u32)[0] as f64 / 255.0
                })
                .collect();
            GlyphImage::from_pixels(px)
        })
        .collect::<Result<Vec<_>>>()?;
    GlyphStack::new(channels)
}

/// Writes a color set as one `1664×64` RGB strip.
pub fn write_color_set_png(path: &Path, set: &ColorGlyphSet) -> Result<()> {
    save_rgb(path, &sheet(&[set], NUM_LETTERS))
}

pub fn read_color_set_png(path: &Path) -> Result<ColorGlyphSet> {
    let img = image::open(path).map_err(|e| image_err(path, e))?.to_rgb8();
    if img.dimensions() != ((NUM_LETTERS * GLYPH_SIZE) as u32, GLYPH_SIZE as u32) {
        return Err(image_err(path, format!("expected a glyph strip, got {:?}", img.dimensions())));
    }
    let images = (0..NUM_LETTERS)
        .map(|i| {
            let mut data = Vec::with_capacity(3 * GLYPH_SIZE * GLYPH_SIZE);
            for c in 0..3 {
                for y in 0..GLYPH_SIZE {
                    for x in 0..GLYPH_SIZE {
                        data.push(img.get_pixel((i * GLYPH_SIZE + x) as u32, y as u32)[c] as f64 / 255.0);
                    }
                }
            }
            ColorImage::from_planar(data)
        })
        .collect::<Result<Vec<_>>>()?;
    ColorGlyphSet::new(images)
}

pub fn write_glyph_png(path: &Path, glyph: &GlyphImage) -> Result<()> {
    let img = ImageBuffer::from_fn(GLYPH_SIZE as u32, GLYPH_SIZE as u32, |x, y| {
        Luma([quantize(glyph.get(x as usize, y as usize))])
    });
    save_gray(path, &img)
}

pub fn write_color_png(path: &Path, image: &ColorImage) -> Result<()> {
    let img = ImageBuffer::from_fn(GLYPH_SIZE as u32, GLYPH_SIZE as u32, |x, y| {
        let [r, g, b] = image.rgb(x as usize, y as usize);
        Rgb([quantize(r), quantize(g), quantize(b)])
    });
    save_rgb(path, &img)
}

/// Loads any image as grayscale, white foreground on black.
pub fn read_raw_image(path: &Path) -> Result<RawImage> {
    let img = image::open(path).map_err(|e| image_err(path, e))?.to_luma8();
    let (w, h) = img.dimensions();
    let px = img.pixels().map(|p| p[0] as f64 / 255.0).collect();
    Ok(RawImage::new(w as usize, h as usize, px)?.with_dark_background())
}

/// Loads a colored glyph of any size: the background color is estimated
/// from the border, the glyph cropped and scaled like [`normalize_glyph`],
/// and composited onto black. Returns the color image and its shape.
pub fn read_color_glyph(path: &Path) -> Result<(ColorImage, GlyphImage)> {
    let img = image::open(path).map_err(|e| image_err(path, e))?.to_rgb8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    let px = |x: usize, y: usize, c: usize| img.get_pixel(x as u32, y as u32)[c] as f64 / 255.0;
    let mut bg = [0.0; 3];
    let mut n = 0.0_f64;
    for y in 0..h {
        for x in 0..w {
            if x == 0 || y == 0 || x + 1 == w || y + 1 == h {
                for (c, b) in bg.iter_mut().enumerate() {
                    *b += px(x, y, c);
                }
                n += 1.0;
            }
        }
    }
    bg.iter_mut().for_each(|b| *b /= n.max(1.0));
    let coverage: Vec<f64> = (0..w * h)
        .map(|i| {
            let (x, y) = (i % w, i / w);
            let d = (0..3).map(|c| (px(x, y, c) - bg[c]).abs()).fold(0.0, f64::max);
            if d > 24.0 / 255.0 {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    let shape = normalize_glyph(&RawImage::new(w, h, coverage.clone())?)?;
    let color = crop_with_shape(&img, &coverage, w).ok_or(McganError::EmptyGlyph)?;
    Ok((color, shape))
}

fn crop_with_shape(img: &RgbImage, coverage: &[f64], w: usize) -> Option<ColorImage> {
    let mut bbox: Option<(usize, usize, usize, usize)> = None;
    for (i, &c) in coverage.iter().enumerate() {
        if c > 0.0 {
            let (x, y) = (i % w, i / w);
            bbox = Some(match bbox {
                None => (x, y, x, y),
                Some((x0, y0, x1, y1)) => (x0.min(x), y0.min(y), x1.max(x), y1.max(y)),
            });
        }
    }
    let (x0, y0, x1, y1) = bbox?;
    let (bw, bh) = (x1 - x0 + 1, y1 - y0 + 1);
    let scale = GLYPH_SIZE as f64 / bw.max(bh) as f64;
    let nw = ((bw as f64 * scale).round() as usize).clamp(1, GLYPH_SIZE);
    let nh = ((bh as f64 * scale).round() as usize).clamp(1, GLYPH_SIZE);
    let (left, top) = ((GLYPH_SIZE - nw) / 2, (GLYPH_SIZE - nh) / 2);
    let mut data = vec![0.0; 3 * GLYPH_SIZE * GLYPH_SIZE];
    for c in 0..3 {
        let mut crop = Vec::with_capacity(bw * bh);
        for y in y0..=y1 {
            for x in x0..=x1 {
                crop.push(img.get_pixel(x as u32, y as u32)[c] as f64 / 255.0 * coverage[y * w + x]);
            }
        }
        let scaled = super::glyph::resize(&crop, bw, bh, nw, nh);
        for y in 0..nh {
            for x in 0..nw {
                data[c * GLYPH_SIZE * GLYPH_SIZE + (top + y) * GLYPH_SIZE + left + x] =
                    scaled[y * nw + x].clamp(0.0, 1.0);
            }
        }
    }
    ColorImage::from_planar(data).ok()
}

/// Lays out sets one after another, each as `ceil(26 / columns)` rows of
/// glyphs in `A..Z` row-major order.
pub fn sheet(sets: &[&ColorGlyphSet], columns: usize) -> RgbImage {
    let columns = columns.clamp(1, NUM_LETTERS);
    let rows_per_set = NUM_LETTERS.div_ceil(columns);
    let width = (columns * GLYPH_SIZE) as u32;
    let height = (sets.len() * rows_per_set * GLYPH_SIZE) as u32;
    ImageBuffer::from_fn(width, height, |x, y| {
        let (x, y) = (x as usize, y as usize);
        let row = y / GLYPH_SIZE;
        let (set, row_in_set) = (row / rows_per_set, row % rows_per_set);
        let letter = row_in_set * columns + x / GLYPH_SIZE;
        if letter >= NUM_LETTERS {
            return Rgb([0, 0, 0]);
        }
        let [r, g, b] = sets[set].image(letter).rgb(x % GLYPH_SIZE, y % GLYPH_SIZE);
        Rgb([quantize(r), quantize(g), quantize(b)])
    })
}

/// Writes a contact sheet of one or more glyph sets.
pub fn write_contact_sheet(path: &Path, sets: &[&ColorGlyphSet], columns: usize) -> Result<()> {
    save_rgb(path, &sheet(sets, columns))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::font_data::synthetic::SyntheticFont;

    #[test]
    fn strip_round_trip_is_exact_for_quantized_values() {
        let stack = SyntheticFont::from_seed(3).render().unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.png");
        write_stack_png(&p, &stack).unwrap();
        let back = read_stack_png(&p).unwrap();
        for i in 0..NUM_LETTERS {
            for (a, b) in stack.channel(i).pixels().iter().zip(back.channel(i).pixels()) {
                assert!((a - b).abs() <= 0.5 / 255.0 + 1e-12);
            }
        }
        write_stack_png(&p, &back).unwrap();
        assert_eq!(read_stack_png(&p).unwrap(), back);
    }

    #[test]
    fn color_glyph_on_white_is_recovered_on_black() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("A.png");
        let img = ImageBuffer::from_fn(40, 20, |x, y| {
            if (10..30).contains(&x) && (5..15).contains(&y) {
                Rgb([200u8, 10, 10])
            } else {
                Rgb([255u8, 255, 255])
            }
        });
        img.save(&p).unwrap();
        let (color, shape) = read_color_glyph(&p).unwrap();
        // 20x10 block scaled to 64x32 and centered vertically.
        assert_eq!(shape.get(0, 16), 1.0);
        assert_eq!(shape.get(0, 15), 0.0);
        assert!((color.get(0, 30, 30) - 200.0 / 255.0).abs() < 1e-9);
        assert_eq!(color.rgb(30, 5), [0.0, 0.0, 0.0]);
    }
}
