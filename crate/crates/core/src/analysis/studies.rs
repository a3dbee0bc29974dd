//! Letter-correlation and observed-count studies over a pretrained G₁.

use std::ops::RangeInclusive;

use mcgan_nn::{NetworkSpec, ParamSet, Tensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ssim::{ssim, SsimConfig};
use crate::error::{McganError, Result};
use crate::font_data::{mask_stack, sample_distinct, GlyphStack};
use crate::gan::run_generator;
use crate::letters::{LetterSet, NUM_LETTERS};

/// Fonts per generator forward pass.
const CHUNK: usize = 16;

/// Generates every font's stack from its masked input, in order.
fn generate(spec: &NetworkSpec, params: &ParamSet, fonts: &[GlyphStack], observed: &[LetterSet]) -> Result<Vec<GlyphStack>> {
    let mut out = Vec::with_capacity(fonts.len());
    for (fs, os) in fonts.chunks(CHUNK).zip(observed.chunks(CHUNK)) {
        let items = fs
            .iter()
            .zip(os)
            .map(|(f, &o)| mask_stack(f, o).map(|m| m.to_tensor()))
            .collect::<Result<Vec<_>>>()?;
        let y = run_generator(spec, params, &Tensor::stack_batch(&items)?)?;
        for (i, &o) in os.iter().enumerate() {
            out.push(GlyphStack::from_tensor(&y, i, o)?);
        }
    }
    Ok(out)
}

pub fn median(xs: &[f64]) -> Option<f64> {
    quantile(xs, 0.5)
}

/// Linear-interpolated quantile, `q ∈ [0, 1]`.
pub fn quantile(xs: &[f64], q: f64) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    Some(v[lo] + (pos - lo as f64) * (v[hi] - v[lo]))
}

/// Observed letters with their median score.
pub type Ranked = Vec<(usize, f64)>;

/// SSIM scores of letter α generated from the single observed letter β.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationTable {
    /// `scores[α][β]`; the diagonal stays empty.
    pub scores: Vec<Vec<Vec<f64>>>,
}

impl CorrelationTable {
    pub fn new() -> Self {
        CorrelationTable {
            scores: vec![vec![Vec::new(); NUM_LETTERS]; NUM_LETTERS],
        }
    }

    pub fn given(&self, alpha: usize, beta: usize) -> &[f64] {
        &self.scores[alpha][beta]
    }

    /// Scores of α pooled over every observed letter.
    pub fn given_any(&self, alpha: usize) -> Vec<f64> {
        self.scores[alpha].iter().flatten().copied().collect()
    }

    /// Observed letters ranked by median SSIM of α, best first; letters
    /// never observed are left out.
    pub fn ranking(&self, alpha: usize) -> Ranked {
        let mut r: Vec<(usize, f64)> = (0..NUM_LETTERS)
            .filter_map(|b| median(&self.scores[alpha][b]).map(|m| (b, m)))
            .collect();
        r.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
        r
    }

    /// The two most and two least informative observed letters for α.
    pub fn extremes(&self, alpha: usize) -> (Ranked, Ranked) {
        let r = self.ranking(alpha);
        let best = r.iter().take(2).copied().collect();
        let worst = r.iter().rev().take(2).copied().collect();
        (best, worst)
    }
}

impl Default for CorrelationTable {
    fn default() -> Self {
        Self::new()
    }
}

/// For each font, observes one random letter β, generates the rest and
/// records `ssim(generated α, true α)` under `(α, β)`.
pub fn correlation_study(
    spec: &NetworkSpec,
    params: &ParamSet,
    fonts: &[GlyphStack],
    seed: u64,
    ssim_cfg: &SsimConfig,
) -> Result<CorrelationTable> {
    if fonts.is_empty() {
        return Err(McganError::InvalidInput("correlation study needs at least one font".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let betas: Vec<usize> = fonts.iter().map(|_| rng.random_range(0..NUM_LETTERS)).collect();
    let observed = betas
        .iter()
        .map(|&b| LetterSet::from_indices([b]))
        .collect::<Result<Vec<_>>>()?;
    let generated = generate(spec, params, fonts, &observed)?;
    let mut table = CorrelationTable::new();
    for ((truth, gen), &beta) in fonts.iter().zip(&generated).zip(&betas) {
        for alpha in (0..NUM_LETTERS).filter(|&a| a != beta) {
            let s = ssim(gen.channel(alpha), truth.channel(alpha), ssim_cfg)?;
            table.scores[alpha][beta].push(s);
        }
    }
    Ok(table)
}

/// SSIM of unobserved letters, one score per generated letter, for each
/// observed-set size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountStudy {
    pub per_n: Vec<(usize, Vec<f64>)>,
}

impl CountStudy {
    pub fn medians(&self) -> Vec<(usize, f64)> {
        self.per_n
            .iter()
            .filter_map(|(n, s)| median(s).map(|m| (*n, m)))
            .collect()
    }

    pub fn scores(&self, n: usize) -> Option<&[f64]> {
        self.per_n.iter().find(|e| e.0 == n).map(|e| e.1.as_slice())
    }
}

/// For each `n` in `n_range`, observes a random `n`-subset of every font
/// and scores the generated unobserved letters against the truth.
pub fn observed_count_study(
    spec: &NetworkSpec,
    params: &ParamSet,
    fonts: &[GlyphStack],
    n_range: RangeInclusive<usize>,
    seed: u64,
    ssim_cfg: &SsimConfig,
) -> Result<CountStudy> {
    if fonts.is_empty() {
        return Err(McganError::InvalidInput("observed-count study needs at least one font".into()));
    }
    if *n_range.start() < 1 || *n_range.end() > NUM_LETTERS - 1 || n_range.is_empty() {
        return Err(McganError::InvalidInput(format!(
            "observed counts {}..={} must lie within 1..={}",
            n_range.start(),
            n_range.end(),
            NUM_LETTERS - 1
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut per_n = Vec::new();
    for n in n_range {
        let observed = fonts
            .iter()
            .map(|_| LetterSet::from_indices(sample_distinct(&mut rng, NUM_LETTERS, n)))
            .collect::<Result<Vec<_>>>()?;
        let generated = generate(spec, params, fonts, &observed)?;
        let mut scores = Vec::new();
        for ((truth, gen), o) in fonts.iter().zip(&generated).zip(&observed) {
            for l in o.complement().iter() {
                scores.push(ssim(gen.channel(l), truth.channel(l), ssim_cfg)?);
            }
        }
        per_n.push((n, scores));
    }
    Ok(CountStudy { per_n })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_interpolate() {
        let xs = [4.0, 1.0, 3.0, 2.0];
        assert_eq!(median(&xs), Some(2.5));
        assert_eq!(quantile(&xs, 0.0), Some(1.0));
        assert_eq!(quantile(&xs, 1.0), Some(4.0));
        assert_eq!(median(&[]), None);
    }

    #[test]
    fn extremes_order() {
        let mut t = CorrelationTable::new();
        t.scores[4][5] = vec![0.9];
        t.scores[4][1] = vec![0.8];
        t.scores[4][8] = vec![0.1];
        t.scores[4][2] = vec![0.3];
        let (best, worst) = t.extremes(4);
        assert_eq!(best.iter().map(|b| b.0).collect::<Vec<_>>(), [5, 1]);
        assert_eq!(worst.iter().map(|b| b.0).collect::<Vec<_>>(), [8, 2]);
        assert_eq!(t.given_any(4).len(), 4);
    }
}
