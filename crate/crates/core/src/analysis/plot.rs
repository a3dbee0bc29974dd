//! Minimal raster box plots: one box per condition on a shared SSIM axis,
//! with a line through the medians.

use image::{ImageBuffer, Rgb, RgbImage};

use super::studies::quantile;

const COLUMN: u32 = 24;
const HEIGHT: u32 = 240;
const PAD: u32 = 12;

struct Axis {
    lo: f64,
    hi: f64,
}

impl Axis {
    fn y(&self, v: f64) -> u32 {
        let t = ((v - self.lo) / (self.hi - self.lo)).clamp(0.0, 1.0);
        PAD + ((1.0 - t) * (HEIGHT - 2 * PAD) as f64).round() as u32
    }
}

fn hline(img: &mut RgbImage, x0: u32, x1: u32, y: u32, c: Rgb<u8>) {
    for x in x0..=x1.min(img.width() - 1) {
        img.put_pixel(x, y, c);
    }
}

fn vline(img: &mut RgbImage, x: u32, y0: u32, y1: u32, c: Rgb<u8>) {
    for y in y0.min(y1)..=y0.max(y1) {
        img.put_pixel(x, y, c);
    }
}

fn line(img: &mut RgbImage, (x0, y0): (u32, u32), (x1, y1): (u32, u32), c: Rgb<u8>) {
    let steps = x1.abs_diff(x0).max(y1.abs_diff(y0)).max(1);
    for s in 0..=steps {
        let t = s as f64 / steps as f64;
        let x = x0 as f64 + t * (x1 as f64 - x0 as f64);
        let y = y0 as f64 + t * (y1 as f64 - y0 as f64);
        img.put_pixel(x.round() as u32, y.round() as u32, c);
    }
}

/// Renders one box (quartiles), whiskers (extremes) and median tick per
/// series on an axis spanning `[min(0, lowest score), 1]`, with grid lines
/// every 0.25.
pub fn box_plot(series: &[Vec<f64>]) -> RgbImage {
    let width = PAD * 2 + COLUMN * series.len().max(1) as u32;
    let mut img: RgbImage = ImageBuffer::from_pixel(width, HEIGHT, Rgb([255, 255, 255]));
    let lowest = series.iter().flatten().copied().fold(0.0_f64, f64::min).max(-1.0);
    let axis = Axis { lo: lowest, hi: 1.0 };
    let grid = Rgb([225, 225, 225]);
    let mut g = (axis.lo / 0.25).ceil() * 0.25;
    while g <= 1.0 + 1e-9 {
        hline(&mut img, PAD, width - PAD, axis.y(g), grid);
        g += 0.25;
    }
    let (ink, fill, red) = (Rgb([40, 40, 40]), Rgb([170, 200, 235]), Rgb([210, 30, 30]));
    let mut medians = Vec::new();
    for (i, s) in series.iter().enumerate() {
        let q = |p| quantile(s, p);
        let (Some(min), Some(q1), Some(med), Some(q3), Some(max)) = (q(0.0), q(0.25), q(0.5), q(0.75), q(1.0)) else {
            continue;
        };
        let x0 = PAD + COLUMN * i as u32 + 4;
        let x1 = x0 + COLUMN - 8;
        let xc = (x0 + x1) / 2;
        vline(&mut img, xc, axis.y(min), axis.y(max), ink);
        for y in axis.y(q3)..=axis.y(q1) {
            hline(&mut img, x0, x1, y, fill);
        }
        hline(&mut img, x0, x1, axis.y(q3), ink);
        hline(&mut img, x0, x1, axis.y(q1), ink);
        vline(&mut img, x0, axis.y(q1), axis.y(q3), ink);
        vline(&mut img, x1, axis.y(q1), axis.y(q3), ink);
        hline(&mut img, x0, x1, axis.y(med), red);
        medians.push((xc, axis.y(med)));
    }
    for w in medians.windows(2) {
        line(&mut img, w[0], w[1], red);
    }
    img
}
