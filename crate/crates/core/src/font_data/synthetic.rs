//! Procedural capital-letter fonts: stroke skeletons rendered with a
//! per-font style, so every letter of a font shares weight, contrast,
//! slant, proportions and serifs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::glyph::{normalize_glyph, GlyphImage, RawImage};
use super::stack::GlyphStack;
use crate::error::Result;
use crate::letters::NUM_LETTERS;

#[derive(Debug, Clone, Copy)]
enum Stroke {
    Line([f64; 4]),
    /// `(cx, cy, rx, ry, start°, end°)`, counter-clockwise with y up.
    Arc([f64; 6]),
}

use Stroke::{Arc, Line};

fn skeleton(letter: usize) -> Vec<Stroke> {
    match letter {
        0 => vec![Line([0.0, 1.0, 0.5, 0.0]), Line([0.5, 0.0, 1.0, 1.0]), Line([0.22, 0.62, 0.78, 0.62])],
        1 => vec![
            Line([0.0, 0.0, 0.0, 1.0]),
            Line([0.0, 0.0, 0.6, 0.0]),
            Arc([0.6, 0.25, 0.35, 0.25, 90.0, -90.0]),
            Line([0.0, 0.5, 0.65, 0.5]),
            Arc([0.65, 0.75, 0.35, 0.25, 90.0, -90.0]),
            Line([0.0, 1.0, 0.65, 1.0]),
        ],
        2 => vec![Arc([0.55, 0.5, 0.5, 0.5, 40.0, 320.0])],
        3 => vec![
            Line([0.0, 0.0, 0.0, 1.0]),
            Line([0.0, 0.0, 0.45, 0.0]),
            Line([0.0, 1.0, 0.45, 1.0]),
            Arc([0.45, 0.5, 0.55, 0.5, 90.0, -90.0]),
        ],
        4 => vec![
            Line([0.0, 0.0, 0.0, 1.0]),
            Line([0.0, 0.0, 1.0, 0.0]),
            Line([0.0, 0.5, 0.8, 0.5]),
            Line([0.0, 1.0, 1.0, 1.0]),
        ],
        5 => vec![Line([0.0, 0.0, 0.0, 1.0]), Line([0.0, 0.0, 1.0, 0.0]), Line([0.0, 0.5, 0.8, 0.5])],
        6 => vec![
            Arc([0.5, 0.5, 0.5, 0.5, 45.0, 360.0]),
            Line([0.55, 0.5, 1.0, 0.5]),
            Line([1.0, 0.5, 1.0, 0.95]),
        ],
        7 => vec![Line([0.0, 0.0, 0.0, 1.0]), Line([1.0, 0.0, 1.0, 1.0]), Line([0.0, 0.5, 1.0, 0.5])],
        8 => vec![Line([0.5, 0.0, 0.5, 1.0]), Line([0.3, 0.0, 0.7, 0.0]), Line([0.3, 1.0, 0.7, 1.0])],
        9 => vec![Line([0.8, 0.0, 0.8, 0.7]), Arc([0.45, 0.7, 0.35, 0.3, 0.0, -180.0])],
        10 => vec![Line([0.0, 0.0, 0.0, 1.0]), Line([1.0, 0.0, 0.0, 0.6]), Line([0.3, 0.42, 1.0, 1.0])],
        11 => vec![Line([0.0, 0.0, 0.0, 1.0]), Line([0.0, 1.0, 0.9, 1.0])],
        12 => vec![
            Line([0.0, 1.0, 0.0, 0.0]),
            Line([0.0, 0.0, 0.5, 0.7]),
            Line([0.5, 0.7, 1.0, 0.0]),
            Line([1.0, 0.0, 1.0, 1.0]),
        ],
        13 => vec![Line([0.0, 1.0, 0.0, 0.0]), Line([0.0, 0.0, 1.0, 1.0]), Line([1.0, 1.0, 1.0, 0.0])],
        14 => vec![Arc([0.5, 0.5, 0.5, 0.5, 0.0, 360.0])],
        15 => vec![
            Line([0.0, 0.0, 0.0, 1.0]),
            Line([0.0, 0.0, 0.6, 0.0]),
            Arc([0.6, 0.27, 0.4, 0.27, 90.0, -90.0]),
            Line([0.0, 0.54, 0.6, 0.54]),
        ],
        16 => vec![Arc([0.5, 0.5, 0.5, 0.5, 0.0, 360.0]), Line([0.6, 0.7, 0.95, 1.0])],
        17 => vec![
            Line([0.0, 0.0, 0.0, 1.0]),
            Line([0.0, 0.0, 0.6, 0.0]),
            Arc([0.6, 0.27, 0.4, 0.27, 90.0, -90.0]),
            Line([0.0, 0.54, 0.6, 0.54]),
            Line([0.45, 0.54, 1.0, 1.0]),
        ],
        18 => vec![
            Arc([0.5, 0.25, 0.45, 0.25, 20.0, 270.0]),
            Arc([0.5, 0.75, 0.45, 0.25, 90.0, -160.0]),
        ],
        19 => vec![Line([0.0, 0.0, 1.0, 0.0]), Line([0.5, 0.0, 0.5, 1.0])],
        20 => vec![
            Line([0.0, 0.0, 0.0, 0.6]),
            Arc([0.5, 0.6, 0.5, 0.4, 180.0, 360.0]),
            Line([1.0, 0.6, 1.0, 0.0]),
        ],
        21 => vec![Line([0.0, 0.0, 0.5, 1.0]), Line([0.5, 1.0, 1.0, 0.0])],
        22 => vec![
            Line([0.0, 0.0, 0.25, 1.0]),
            Line([0.25, 1.0, 0.5, 0.3]),
            Line([0.5, 0.3, 0.75, 1.0]),
            Line([0.75, 1.0, 1.0, 0.0]),
        ],
        23 => vec![Line([0.0, 0.0, 1.0, 1.0]), Line([1.0, 0.0, 0.0, 1.0])],
        24 => vec![Line([0.0, 0.0, 0.5, 0.5]), Line([1.0, 0.0, 0.5, 0.5]), Line([0.5, 0.5, 0.5, 1.0])],
        25 => vec![Line([0.0, 0.0, 1.0, 0.0]), Line([1.0, 0.0, 0.0, 1.0]), Line([0.0, 1.0, 1.0, 1.0])],
        _ => panic!("letter index {letter} out of range"),
    }
}

/// Style shared by all glyphs of one synthetic font. Lengths are in units
/// of the cap height.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FontStyle {
    pub stroke: f64,
    /// 0 keeps all strokes equally thick; 1 makes horizontal strokes vanish.
    pub contrast: f64,
    /// Horizontal shear per unit height.
    pub slant: f64,
    pub width_scale: f64,
    /// Serif half-length; 0 for sans.
    pub serif: f64,
}

impl FontStyle {
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let serif = if rng.random_bool(0.4) { rng.random_range(0.08..0.18) } else { 0.0 };
        FontStyle {
            stroke: rng.random_range(0.06..0.2),
            contrast: rng.random_range(0.0..0.7),
            slant: if rng.random_bool(0.3) { rng.random_range(0.1..0.3) } else { 0.0 },
            width_scale: rng.random_range(0.55..1.0),
            serif,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticFont {
    pub style: FontStyle,
}

/// Capsule segment in canvas pixels with its radius.
struct Capsule {
    a: (f64, f64),
    b: (f64, f64),
    r: f64,
}

impl Capsule {
    fn contains(&self, p: (f64, f64)) -> bool {
        let (dx, dy) = (self.b.0 - self.a.0, self.b.1 - self.a.1);
        let len2 = dx * dx + dy * dy;
        let t = if len2 == 0.0 {
            0.0
        } else {
            (((p.0 - self.a.0) * dx + (p.1 - self.a.1) * dy) / len2).clamp(0.0, 1.0)
        };
        let (qx, qy) = (self.a.0 + t * dx - p.0, self.a.1 + t * dy - p.1);
        qx * qx + qy * qy <= self.r * self.r
    }
}

const CAP: f64 = 64.0;
const MARGIN: f64 = 24.0;
const CANVAS_W: usize = 144;
const CANVAS_H: usize = 112;
const SUPER: usize = 3;
const ARC_SEGMENTS: usize = 24;

impl SyntheticFont {
    pub fn from_seed(seed: u64) -> Self {
        Self::random(&mut ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        SyntheticFont {
            style: FontStyle::random(rng),
        }
    }

    fn to_canvas(&self, x: f64, y: f64) -> (f64, f64) {
        let s = &self.style;
        let x = x * s.width_scale + s.slant * (1.0 - y);
        (MARGIN + x * CAP, MARGIN + y * CAP)
    }

    fn capsules(&self, letter: usize) -> Vec<Capsule> {
        let s = &self.style;
        let mut segs: Vec<((f64, f64), (f64, f64))> = Vec::new();
        for stroke in skeleton(letter) {
            match stroke {
                Line([x0, y0, x1, y1]) => {
                    segs.push(((x0, y0), (x1, y1)));
                    let vertical = (y1 - y0).abs() > 2.0 * (x1 - x0).abs();
                    if s.serif > 0.0 && vertical {
                        for (x, y) in [(x0, y0), (x1, y1)] {
                            if y <= 0.0 || y >= 1.0 {
                                let half = s.serif / s.width_scale;
                                segs.push(((x - half, y), (x + half, y)));
                            }
                        }
                    }
                }
                Arc([cx, cy, rx, ry, a0, a1]) => {
                    let pt = |a: f64| {
                        let r = a.to_radians();
                        (cx + rx * r.cos(), cy - ry * r.sin())
                    };
                    for k in 0..ARC_SEGMENTS {
                        let t0 = a0 + (a1 - a0) * k as f64 / ARC_SEGMENTS as f64;
                        let t1 = a0 + (a1 - a0) * (k + 1) as f64 / ARC_SEGMENTS as f64;
                        segs.push((pt(t0), pt(t1)));
                    }
                }
            }
        }
        segs.into_iter()
            .map(|(p, q)| {
                let (a, b) = (self.to_canvas(p.0, p.1), self.to_canvas(q.0, q.1));
                let len = ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt().max(1e-9);
                let horizontal = (b.0 - a.0).abs() / len;
                let width = s.stroke * CAP * (1.0 - s.contrast * horizontal * horizontal);
                Capsule { a, b, r: width.max(1.0) / 2.0 }
            })
            .collect()
    }

    /// Rasterizes one letter with 3×3 supersampling and normalizes it.
    pub fn render_letter(&self, letter: usize) -> Result<GlyphImage> {
        let (sw, sh) = (CANVAS_W * SUPER, CANVAS_H * SUPER);
        let mut hit = vec![false; sw * sh];
        let step = 1.0 / SUPER as f64;
        for cap in self.capsules(letter) {
            let lo_x = (cap.a.0.min(cap.b.0) - cap.r).floor().max(0.0) as usize * SUPER;
            let hi_x = (((cap.a.0.max(cap.b.0) + cap.r).ceil() as usize + 1) * SUPER).min(sw);
            let lo_y = (cap.a.1.min(cap.b.1) - cap.r).floor().max(0.0) as usize * SUPER;
            let hi_y = (((cap.a.1.max(cap.b.1) + cap.r).ceil() as usize + 1) * SUPER).min(sh);
            for sy in lo_y..hi_y {
                for sx in lo_x..hi_x {
                    let p = ((sx as f64 + 0.5) * step, (sy as f64 + 0.5) * step);
                    if !hit[sy * sw + sx] && cap.contains(p) {
                        hit[sy * sw + sx] = true;
                    }
                }
            }
        }
        let mut px = vec![0.0; CANVAS_W * CANVAS_H];
        for sy in 0..sh {
            for sx in 0..sw {
                if hit[sy * sw + sx] {
                    px[(sy / SUPER) * CANVAS_W + sx / SUPER] += 1.0 / (SUPER * SUPER) as f64;
                }
            }
        }
        for v in &mut px {
            *v = v.min(1.0);
        }
        normalize_glyph(&RawImage::new(CANVAS_W, CANVAS_H, px)?)
    }

    pub fn render(&self) -> Result<GlyphStack> {
        GlyphStack::new((0..NUM_LETTERS).map(|i| self.render_letter(i)).collect::<Result<Vec<_>>>()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_letter_renders_nonempty_and_inside_canvas() {
        for seed in 0..8 {
            let font = SyntheticFont::from_seed(seed);
            for letter in 0..NUM_LETTERS {
                for c in font.capsules(letter) {
                    for p in [c.a, c.b] {
                        assert!(p.0 - c.r >= 0.0 && p.0 + c.r < CANVAS_W as f64, "{seed} {letter}");
                        assert!(p.1 - c.r >= 0.0 && p.1 + c.r < CANVAS_H as f64, "{seed} {letter}");
                    }
                }
            }
            let stack = font.render().unwrap();
            assert!(stack.channels().iter().all(|g| !g.is_empty()));
        }
    }

    #[test]
    fn letters_are_distinct_within_a_font() {
        let stack = SyntheticFont::from_seed(1).render().unwrap();
        for i in 0..NUM_LETTERS {
            for j in i + 1..NUM_LETTERS {
                let d: f64 = stack
                    .channel(i)
                    .pixels()
                    .iter()
                    .zip(stack.channel(j).pixels())
                    .map(|(a, b)| (a - b).abs())
                    .sum();
                assert!(d > 50.0, "letters {i} and {j} nearly identical ({d})");
            }
        }
    }

    #[test]
    fn rendering_is_deterministic() {
        assert_eq!(SyntheticFont::from_seed(9).render().unwrap(), SyntheticFont::from_seed(9).render().unwrap());
    }
}
