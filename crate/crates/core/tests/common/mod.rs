#![allow(dead_code)]

pub mod oracles;
pub mod terms;

use std::collections::BTreeMap;

use mcgan::gan::{DiscriminatorArch, GeneratorArch};
use mcgan_nn::gradcheck::{check_gradients, GradMismatch};
use mcgan_nn::{Bound, Graph, ParamSet, Tensor, Var};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Relative tolerance of every finite-difference comparison.
pub const GRAD_TOL: f64 = 1e-3;
/// Two probes per entry. Freshly initialized batch norm divides by tiny
/// variances, so ReLU kinks sit within a few 1e-6 of some parameters and
/// the coarse step can straddle one; the fine step avoids that but loses
/// digits to roundoff. A wrong gradient fails both.
pub const FD_PROBES: [(f64, f64); 2] = [(1e-6, 1e-5), (1e-7, 1e-4)];

/// Width-4 generator for 8×8 inputs.
pub fn tiny_generator() -> GeneratorArch {
    GeneratorArch {
        width: 4,
        outer_kernel: 3,
        inner_kernel: 3,
        blocks_per_side: 1,
        dropout: 0.5,
    }
}

/// Width-4 discriminator; on 8×8 inputs the global path ends at 1×1.
pub fn tiny_discriminator() -> DiscriminatorArch {
    DiscriminatorArch {
        widths: [4, 4],
        kernel: 3,
        slope: 0.2,
        global_blocks: 2,
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform values in `[-1, 1]`.
pub fn rand_tensor(shape: &[usize], seed: u64) -> Tensor {
    Tensor::uniform(shape, 1.0, &mut rng(seed))
}

/// Flattens named parameter sets into one map with `prefix.` keys.
pub fn merge(sets: &[(&str, &ParamSet)]) -> BTreeMap<String, Tensor> {
    let mut out = BTreeMap::new();
    for (prefix, set) in sets {
        for (k, v) in &set.params {
            out.insert(format!("{prefix}.{k}"), v.clone());
        }
    }
    out
}

/// The vars of one prefix, keyed by their unprefixed names.
pub fn bound(vars: &BTreeMap<String, Var>, prefix: &str) -> Bound {
    let p = format!("{prefix}.");
    Bound::from_vars(
        vars.iter()
            .filter_map(|(k, v)| k.strip_prefix(&p).map(|s| (s.to_string(), *v)))
            .collect(),
    )
}

pub type Builder<'a> = dyn Fn(&mut Graph, &BTreeMap<String, Var>) -> Var + 'a;

/// Compares tape gradients of `build` with central differences over every
/// entry of `params` (at most `per_tensor` probes per tensor). An entry
/// counts as a mismatch when it fails at both probe settings.
pub fn grad_mismatches(params: &BTreeMap<String, Tensor>, build: &Builder<'_>, per_tensor: usize) -> Vec<GradMismatch> {
    let mut g = Graph::new();
    let vars: BTreeMap<String, Var> = params.iter().map(|(k, t)| (k.clone(), g.param(t.clone()))).collect();
    let loss = build(&mut g, &vars);
    let mut grads = g.backward(loss).unwrap();
    let analytic: BTreeMap<String, Tensor> = vars
        .iter()
        .filter_map(|(k, v)| grads.take(*v).map(|t| (k.clone(), t)))
        .collect();
    let numeric = |p: &BTreeMap<String, Tensor>| {
        let mut g = Graph::new();
        let vars: BTreeMap<String, Var> = p.iter().map(|(k, t)| (k.clone(), g.input(t.clone()))).collect();
        let loss = build(&mut g, &vars);
        g.value(loss).item()
    };
    let [(s1, f1), (s2, f2)] = FD_PROBES;
    let coarse = check_gradients(params, &analytic, numeric, s1, GRAD_TOL, f1, Some(per_tensor));
    let fine = check_gradients(params, &analytic, numeric, s2, GRAD_TOL, f2, Some(per_tensor));
    coarse
        .into_iter()
        .filter(|m| fine.iter().any(|f| f.name == m.name && f.index == m.index))
        .collect()
}

/// Synthetic font `seed` rendered and painted with a random gradient.
pub fn colored_font(seed: u64) -> (mcgan::font_data::GlyphStack, mcgan::font_data::ColorGlyphSet) {
    use mcgan::font_data::{apply_gradient, ColorGlyphSet, GradientSpec, SyntheticFont};
    let stack = SyntheticFont::from_seed(seed).render().unwrap();
    let grad = GradientSpec::random(&mut rng(seed + 1000));
    let images = stack.channels().iter().map(|g| apply_gradient(g, &grad).unwrap()).collect();
    (stack, ColorGlyphSet::new(images).unwrap())
}

/// A set from the low 26 bits of `bits`.
pub fn set_from_bits(bits: u32) -> mcgan::LetterSet {
    mcgan::LetterSet::from_indices((0..26).filter(|i| bits >> i & 1 == 1)).unwrap()
}
