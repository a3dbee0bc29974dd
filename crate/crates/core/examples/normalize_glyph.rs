//! Normalizes an off-center, oddly sized raster onto the 64×64 canvas.

use mcgan::font_data::store::write_glyph_png;
use mcgan::font_data::{normalize_glyph, RawImage, GLYPH_SIZE};

fn main() -> mcgan::Result<()> {
    // A thick ring in the corner of a 120×80 canvas.
    let (w, h) = (120, 80);
    let mut px = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let (dx, dy) = (x as f64 - 30.0, y as f64 - 25.0);
            let r = (dx * dx + dy * dy).sqrt();
            if (10.0..18.0).contains(&r) {
                px[y * w + x] = 1.0;
            }
        }
    }
    let glyph = normalize_glyph(&RawImage::new(w, h, px)?)?;
    let (x0, y0, x1, y1) = glyph.bounding_box().expect("ring is not empty");
    println!("bounding box ({x0},{y0})..=({x1},{y1}) on a {GLYPH_SIZE}x{GLYPH_SIZE} canvas");
    let path = std::env::temp_dir().join("normalized_ring.png");
    write_glyph_png(&path, &glyph)?;
    println!("wrote {}", path.display());
    Ok(())
}
