//! Finite-difference builders for every loss term on 8×8 inputs and
//! width-4 networks, with dropout active.

use std::collections::BTreeMap;

use mcgan::gan::losses::{discriminate, l1, lsgan_discriminator, lsgan_generator, select_items};
use mcgan::glyph_net::{build_d1_spec, build_g1_spec};
use mcgan::mcgan_stack::{glyphnet_end_terms, transform_t, LeaveOneOutPlan, LetterWeights};
use mcgan::orna_net::{build_d2_spec, build_g2_spec, ornanet_generator_terms, MaskTarget};
use mcgan::LetterSet;
use mcgan_nn::gradcheck::GradMismatch;
use mcgan_nn::{forward, ForwardCtx, Graph, Mode, ParamSet, Tensor, Var};

use super::*;

struct GlyphNetFixture {
    g: ParamSet,
    d: ParamSet,
    x: Tensor,
    y: Tensor,
}

fn glyphnet_fixture() -> GlyphNetFixture {
    let gs = build_g1_spec(&tiny_generator());
    let ds = build_d1_spec(&tiny_discriminator());
    GlyphNetFixture {
        g: ParamSet::init(&gs, &mut rng(1)).unwrap(),
        d: ParamSet::init(&ds.spec, &mut rng(2)).unwrap(),
        x: rand_tensor(&[2, 26, 8, 8], 3),
        y: rand_tensor(&[2, 26, 8, 8], 4),
    }
}

/// GlyphNet terms: 0 L1, 1 generator LSGAN local, 2 generator LSGAN
/// global, 3 discriminator local, 4 discriminator global.
fn glyphnet_term(f: &GlyphNetFixture, g: &mut Graph, vars: &BTreeMap<String, Var>, term: usize) -> Var {
    let gs = build_g1_spec(&tiny_generator());
    let ds = build_d1_spec(&tiny_discriminator());
    let (gb, db) = (bound(vars, "g"), bound(vars, "d"));
    let mut r = rng(9);
    let mut ctx = ForwardCtx::new(Mode::Train, &mut r);
    let x = g.input(f.x.clone());
    let y = g.input(f.y.clone());
    let out = forward(&gs, g, &gb, &f.g, x, &mut ctx).unwrap();
    let fake = discriminate(&ds, g, &db, &f.d, x, out, &mut ctx).unwrap();
    match term {
        0 => l1(g, out, y).unwrap(),
        1 | 2 => {
            let (lo, gl) = lsgan_generator(g, &fake);
            if term == 1 {
                lo
            } else {
                gl
            }
        }
        _ => {
            let real = discriminate(&ds, g, &db, &f.d, x, y, &mut ctx).unwrap();
            let (lo, gl) = lsgan_discriminator(g, &real, &fake).unwrap();
            if term == 3 {
                lo
            } else {
                gl
            }
        }
    }
}

/// Mismatches of each GlyphNet pretraining term.
pub fn glyphnet_mismatches(per_tensor: usize) -> Vec<(&'static str, Vec<GradMismatch>)> {
    let f = glyphnet_fixture();
    let params = merge(&[("g", &f.g), ("d", &f.d)]);
    ["l1", "g_lsgan_local", "g_lsgan_global", "d_lsgan_local", "d_lsgan_global"]
        .into_iter()
        .enumerate()
        .map(|(term, name)| (name, grad_mismatches(&params, &|g, v| glyphnet_term(&f, g, v, term), per_tensor)))
        .collect()
}

struct OrnaFixture {
    g: ParamSet,
    d: ParamSet,
    x: Tensor,
    y: Tensor,
    observed: Vec<usize>,
}

fn orna_fixture() -> OrnaFixture {
    OrnaFixture {
        g: ParamSet::init(&build_g2_spec(&tiny_generator()), &mut rng(5)).unwrap(),
        d: ParamSet::init(&build_d2_spec(&tiny_discriminator()).spec, &mut rng(6)).unwrap(),
        x: rand_tensor(&[4, 3, 8, 8], 7),
        y: rand_tensor(&[2, 3, 8, 8], 8),
        observed: vec![1, 3],
    }
}

/// OrnaNet terms: 0 LSGAN local, 1 LSGAN global, 2 L1, 3 mask MSE, 4 and 5
/// the discriminator's local and global terms.
fn orna_term(f: &OrnaFixture, g: &mut Graph, vars: &BTreeMap<String, Var>, term: usize, target: MaskTarget) -> Var {
    let gs = build_g2_spec(&tiny_generator());
    let ds = build_d2_spec(&tiny_discriminator());
    let (gb, db) = (bound(vars, "g"), bound(vars, "d"));
    let mut r = rng(10);
    let mut ctx = ForwardCtx::new(Mode::Train, &mut r);
    let x = g.input(f.x.clone());
    let y = g.input(f.y.clone());
    let out = forward(&gs, g, &gb, &f.g, x, &mut ctx).unwrap();
    let fake = discriminate(&ds, g, &db, &f.d, x, out, &mut ctx).unwrap();
    if term >= 4 {
        let x_obs = select_items(g, x, &f.observed).unwrap();
        let real = discriminate(&ds, g, &db, &f.d, x_obs, y, &mut ctx).unwrap();
        let (lo, gl) = lsgan_discriminator(g, &real, &fake).unwrap();
        return if term == 4 { lo } else { gl };
    }
    let t = ornanet_generator_terms(g, out, x, y, &f.observed, &fake, 20.0, target).unwrap();
    [t.lsgan_local, t.lsgan_global, t.l1, t.mask_mse][term]
}

/// Mismatches of each OrnaNet term, with the mask term under both targets.
pub fn ornanet_mismatches(per_tensor: usize) -> Vec<(&'static str, Vec<GradMismatch>)> {
    let f = orna_fixture();
    let params = merge(&[("g", &f.g), ("d", &f.d)]);
    let names = ["lsgan_local", "lsgan_global", "l1", "mask_mse", "d_local", "d_global"];
    let mut out: Vec<_> = names
        .into_iter()
        .enumerate()
        .map(|(term, name)| {
            let bad = grad_mismatches(&params, &|g, v| orna_term(&f, g, v, term, MaskTarget::Truth), per_tensor);
            (name, bad)
        })
        .collect();
    let input = grad_mismatches(&params, &|g, v| orna_term(&f, g, v, 3, MaskTarget::Input), per_tensor);
    out.push(("mask_mse_input_target", input));
    out
}

/// GlyphNet terms of the joint objective: 0 weighted L1 to the frozen
/// predictions, 1 mask MSE of 𝒯(G₁) against the observed shapes.
fn glyph_end_term(g1: &ParamSet, g: &mut Graph, vars: &BTreeMap<String, Var>, term: usize) -> Var {
    let spec = build_g1_spec(&tiny_generator());
    let observed = LetterSet::from_word("BDG").unwrap();
    let plan = LeaveOneOutPlan::new(observed).unwrap();
    let mut r = rng(11);
    let mut ctx = ForwardCtx::new(Mode::Train, &mut r);
    let x = g.input(rand_tensor(&[plan.num_stacks(), 26, 8, 8], 12));
    let out = forward(&spec, g, &bound(vars, "g"), g1, x, &mut ctx).unwrap();
    let full = plan.assemble(g, out).unwrap();
    let frozen = g.input(rand_tensor(&[1, 26, 8, 8], 13));
    let masks = g.input(rand_tensor(&[3, 3, 8, 8], 14));
    let weights = LetterWeights::default().for_set(observed);
    let (wl1, mask) = glyphnet_end_terms(g, full, frozen, masks, &observed.to_vec(), &weights, 20.0).unwrap();
    [wl1, mask][term]
}

/// Mismatches of the GlyphNet-side fine-tuning terms.
pub fn glyph_end_mismatches(per_tensor: usize) -> Vec<(&'static str, Vec<GradMismatch>)> {
    let g1 = ParamSet::init(&build_g1_spec(&tiny_generator()), &mut rng(15)).unwrap();
    let params = merge(&[("g", &g1)]);
    ["weighted_l1", "mask_mse"]
        .into_iter()
        .enumerate()
        .map(|(term, name)| (name, grad_mismatches(&params, &|g, v| glyph_end_term(&g1, g, v, term), per_tensor)))
        .collect()
}

/// Mismatches of an OrnaNet L1 loss differentiated through 𝒯 into both
/// generators.
pub fn joint_mismatches(per_tensor: usize) -> Vec<GradMismatch> {
    let g1 = ParamSet::init(&build_g1_spec(&tiny_generator()), &mut rng(16)).unwrap();
    let g2 = ParamSet::init(&build_g2_spec(&tiny_generator()), &mut rng(17)).unwrap();
    let params = merge(&[("g1", &g1), ("g2", &g2)]);
    let build = |g: &mut Graph, vars: &BTreeMap<String, Var>| {
        let observed = LetterSet::from_word("AE").unwrap();
        let plan = LeaveOneOutPlan::new(observed).unwrap();
        let mut r = rng(18);
        let mut ctx = ForwardCtx::new(Mode::Train, &mut r);
        let x = g.input(rand_tensor(&[plan.num_stacks(), 26, 8, 8], 19));
        let out1 = forward(&build_g1_spec(&tiny_generator()), g, &bound(vars, "g1"), &g1, x, &mut ctx).unwrap();
        let full = plan.assemble(g, out1).unwrap();
        let x2 = transform_t(g, full).unwrap();
        let out2 = forward(&build_g2_spec(&tiny_generator()), g, &bound(vars, "g2"), &g2, x2, &mut ctx).unwrap();
        let picked = select_items(g, out2, &observed.to_vec()).unwrap();
        let y = g.input(rand_tensor(&[2, 3, 8, 8], 20));
        l1(g, picked, y).unwrap()
    };
    grad_mismatches(&params, &build, per_tensor)
}
