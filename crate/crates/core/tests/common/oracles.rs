//! Independent reference computations.

use mcgan::font_data::GlyphStack;
use mcgan::mcgan_stack::LeaveOneOutPlan;
use mcgan::{LetterSet, NUM_LETTERS};

/// Agreement required between SSIM implementations.
pub const SSIM_TOL: f64 = 1e-6;

/// Checks a plan against its definition: one stack per observed letter
/// plus one, every letter supplied exactly once, no observed letter
/// supplied by a stack that sees it, unobserved letters supplied by a
/// stack that sees all of `S`, and no stack seeing beyond `S`.
pub fn plan_violations(s: LetterSet, plan: &LeaveOneOutPlan) -> Vec<String> {
    let mut errs = Vec::new();
    if plan.num_stacks() != s.len() + 1 {
        errs.push(format!("{} stacks for |S| = {}", plan.num_stacks(), s.len()));
    }
    let mut supplied = [0usize; NUM_LETTERS];
    for &(stack, letter) in plan.extract() {
        supplied[letter] += 1;
        let Some(&cond) = plan.conditions().get(stack) else {
            errs.push(format!("letter {letter} from missing stack {stack}"));
            continue;
        };
        if s.contains(letter) && cond.contains(letter) {
            errs.push(format!("observed letter {letter} sees itself"));
        }
        if !s.contains(letter) && cond != s {
            errs.push(format!("unobserved letter {letter} from a partial stack"));
        }
    }
    if supplied != [1; NUM_LETTERS] {
        errs.push(format!("supply counts {supplied:?}"));
    }
    for (i, &c) in plan.conditions().iter().enumerate() {
        if c.bits() & !s.bits() != 0 {
            errs.push(format!("stack {i} sees unobserved letters"));
        }
    }
    errs
}

/// SSIM with an explicit 11×11 Gaussian window at every valid position and
/// two-pass moments.
pub fn direct_ssim(a: &[f64], b: &[f64], size: usize) -> f64 {
    let (win, sigma) = (11usize, 1.5f64);
    let r = (win / 2) as f64;
    let mut w = vec![0.0; win * win];
    for i in 0..win {
        for j in 0..win {
            let (di, dj) = (i as f64 - r, j as f64 - r);
            w[i * win + j] = (-(di * di + dj * dj) / (2.0 * sigma * sigma)).exp();
        }
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    let (c1, c2) = (0.01f64.powi(2), 0.03f64.powi(2));
    let out = size + 1 - win;
    let mut acc = 0.0;
    for y in 0..out {
        for x in 0..out {
            let at = |img: &[f64], i: usize, j: usize| img[(y + i) * size + x + j];
            let (mut ma, mut mb) = (0.0, 0.0);
            for i in 0..win {
                for j in 0..win {
                    ma += w[i * win + j] * at(a, i, j);
                    mb += w[i * win + j] * at(b, i, j);
                }
            }
            let (mut va, mut vb, mut cov) = (0.0, 0.0, 0.0);
            for i in 0..win {
                for j in 0..win {
                    let (da, db) = (at(a, i, j) - ma, at(b, i, j) - mb);
                    va += w[i * win + j] * da * da;
                    vb += w[i * win + j] * db * db;
                    cov += w[i * win + j] * da * db;
                }
            }
            acc += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
        }
    }
    acc / (out * out) as f64
}

pub fn naive_distance(a: &GlyphStack, b: &GlyphStack) -> f64 {
    let mut sum = 0.0;
    for l in 0..26 {
        for y in 0..64 {
            for x in 0..64 {
                let d = a.channel(l).get(x, y) - b.channel(l).get(x, y);
                sum += d * d;
            }
        }
    }
    (sum / (26.0 * 4096.0)).sqrt()
}

