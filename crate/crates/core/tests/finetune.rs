//! Leave-one-out planning, the λ schedule, the GlyphNet-side loss and the
//! joint fine-tuning step.

mod common;

use common::oracles::plan_violations;
use common::*;
use mcgan::font_data::GlyphStack;
use mcgan::gan::GeneratorArch;
use mcgan::glyph_net::build_g1_spec;
use mcgan::mcgan_stack::{
    glyphnet_end_loss, glyphnet_end_terms, transform_t_tensor, FineTuneState, LeaveOneOutPlan, LetterWeights,
    TermToggles, TrainConfig,
};
use mcgan::orna_net::Lambda2Schedule;
use mcgan::{LetterSet, NUM_LETTERS};
use mcgan_nn::{Graph, ParamSet, Tensor};
use proptest::prelude::*;
use rand::Rng;

fn assert_plan(s: LetterSet) {
    let plan = LeaveOneOutPlan::new(s).unwrap();
    let errs = plan_violations(s, &plan);
    assert!(errs.is_empty(), "S = {:?}: {errs:?}", s.to_vec());
}

#[test]
fn plan_invariants_for_small_and_nearly_full_sets_exhaustively() {
    let mut checked = 0;
    for a in 0..NUM_LETTERS {
        assert_plan(LetterSet::from_indices([a]).unwrap());
        assert_plan(LetterSet::ALL.without(a));
        checked += 2;
        for b in a + 1..NUM_LETTERS {
            assert_plan(LetterSet::from_indices([a, b]).unwrap());
            checked += 1;
        }
    }
    assert_eq!(checked, 26 + 26 + 325);
}

#[test]
fn plan_invariants_for_random_sets() {
    let mut r = rng(42);
    for _ in 0..1000 {
        let bits = r.random_range(1..(1u32 << NUM_LETTERS) - 1);
        assert_plan(set_from_bits(bits));
    }
}

#[test]
fn tower_needs_six_stacks() {
    let plan = LeaveOneOutPlan::new(LetterSet::from_word("TOWER").unwrap()).unwrap();
    assert_eq!(plan.num_stacks(), 6);
}

#[test]
fn full_and_empty_sets_are_rejected() {
    assert!(LeaveOneOutPlan::new(LetterSet::EMPTY).is_err());
    assert!(LeaveOneOutPlan::new(LetterSet::ALL).is_err());
}

proptest! {
    #[test]
    fn plan_invariants_hold_for_any_set(bits in 1u32..(1 << 26) - 1) {
        let s = set_from_bits(bits);
        let plan = LeaveOneOutPlan::new(s).unwrap();
        let errs = plan_violations(s, &plan);
        prop_assert!(errs.is_empty(), "{:?}", errs);
    }

    /// Assembling tags each plane with its stack and letter, and every
    /// letter arrives from the stack the plan names.
    #[test]
    fn assembly_reads_the_named_stack(bits in 1u32..(1 << 26) - 1) {
        let plan = LeaveOneOutPlan::new(set_from_bits(bits)).unwrap();
        let n = plan.num_stacks();
        let mut t = Tensor::zeros(&[n, 26, 2, 2]);
        for i in 0..n {
            for c in 0..26 {
                t.plane_mut(i, c).fill((100 * i + c) as f64);
            }
        }
        let out = plan.assemble_tensor(&t).unwrap();
        for &(stack, letter) in plan.extract() {
            prop_assert_eq!(out.plane(0, letter)[0], (100 * stack + letter) as f64);
        }
    }
}

#[test]
fn lambda2_drops_at_epoch_200_and_letter_weights_follow_observation() {
    let s = Lambda2Schedule::default();
    assert_eq!((s.at(0), s.at(199), s.at(200), s.at(399)), (300.0, 300.0, 3.0, 3.0));
    let tower = LetterSet::from_word("TOWER").unwrap();
    let w = LetterWeights::default().for_set(tower);
    for (l, &wl) in w.iter().enumerate() {
        assert_eq!(wl, if tower.contains(l) { 10.0 } else { 1.0 });
    }
}

fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

#[test]
fn glyph_end_loss_matches_scalar_loops() {
    let (h, w) = (64, 64);
    let full = rand_tensor(&[1, 26, h, w], 1);
    let frozen = rand_tensor(&[1, 26, h, w], 2);
    let observed = [2usize, 7, 19];
    let masks = rand_tensor(&[3, 3, h, w], 3);
    let weights: Vec<f64> = (0..26).map(|l| if observed.contains(&l) { 10.0 } else { 1.0 }).collect();
    let k = 20.0;
    let got = glyphnet_end_loss(&full, &frozen, &masks, &observed, &weights, 10.0, 300.0, k).unwrap();

    let mut l1 = 0.0;
    for (l, &wt) in weights.iter().enumerate() {
        for p in 0..h * w {
            l1 += wt * (full.plane(0, l)[p] - frozen.plane(0, l)[p]).abs();
        }
    }
    l1 /= (26 * h * w) as f64;
    let mut mse = 0.0;
    for (i, &l) in observed.iter().enumerate() {
        for c in 0..3 {
            for p in 0..h * w {
                let d = sigmoid(k * masks.plane(i, c)[p]) - sigmoid(k * full.plane(0, l)[p]);
                mse += d * d;
            }
        }
    }
    mse /= (observed.len() * 3 * h * w) as f64;
    assert!((got.weighted_l1 - l1).abs() < 1e-12, "{} vs {l1}", got.weighted_l1);
    assert!((got.mask_mse - mse).abs() < 1e-12, "{} vs {mse}", got.mask_mse);
    assert!((got.total() - (10.0 * l1 + 300.0 * mse)).abs() < 1e-9);
}

/// At `G₁ = G₁′` with observed masks equal to `𝒯(G₁)`, both terms and
/// their gradients vanish.
#[test]
fn unchanged_predictions_are_stationary() {
    let full_t = rand_tensor(&[1, 26, 8, 8], 4);
    let observed = [0usize, 5];
    let t = transform_t_tensor(&full_t).unwrap();
    let masks_t = Tensor::stack_batch(&observed.map(|i| t.batch_item(i))).unwrap();
    let mut g = Graph::new();
    let full = g.param(full_t.clone());
    let frozen = g.input(full_t);
    let masks = g.input(masks_t);
    let weights = vec![3.0; 26];
    let (l1, mse) = glyphnet_end_terms(&mut g, full, frozen, masks, &observed, &weights, 20.0).unwrap();
    assert_eq!((g.value(l1).item(), g.value(mse).item()), (0.0, 0.0));
    let total = g.add(l1, mse).unwrap();
    let grad = g.backward(total).unwrap().take(full).unwrap();
    assert_eq!(grad.max_abs(), 0.0);
}

fn small_g1() -> (mcgan_nn::NetworkSpec, ParamSet) {
    let spec = build_g1_spec(&GeneratorArch {
        width: 4,
        ..GeneratorArch::reduced()
    });
    let params = ParamSet::init(&spec, &mut rng(30)).unwrap();
    (spec, params)
}

fn small_config() -> TrainConfig {
    let mut cfg = TrainConfig::reduced();
    cfg.orna_generator.width = 4;
    cfg
}

/// One joint step moves GlyphNet even with both GlyphNet-side terms off:
/// the only path is OrnaNet's loss back through 𝒯.
#[test]
fn one_step_moves_glyphnet_through_transform() {
    let (_, colored) = colored_font(0);
    let observed = colored.restrict(LetterSet::from_word("TOWER").unwrap()).unwrap();
    let (spec, g1) = small_g1();
    let mut cfg = small_config();
    cfg.glyph_adam.lr = 1e-3;
    cfg.terms = TermToggles {
        glyph_l1: false,
        glyph_mask: false,
        ..TermToggles::default()
    };
    let mut state = FineTuneState::new(&observed, &spec, &g1, cfg, None).unwrap();
    state.step().unwrap();
    assert!(state.g1.max_abs_diff(&g1) > 0.0);

    let mut off = small_config();
    off.terms = TermToggles {
        lsgan: false,
        l1: false,
        mask_mse: false,
        glyph_l1: false,
        glyph_mask: false,
    };
    let mut state = FineTuneState::new(&observed, &spec, &g1, off, None).unwrap();
    state.step().unwrap();
    assert_eq!(state.g1.max_abs_diff(&g1), 0.0);
}

fn stack_distance(a: &GlyphStack, b: &GlyphStack) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.channels().iter().zip(b.channels()) {
        s += x.pixels().iter().zip(y.pixels()).map(|(p, q)| (p - q).abs()).sum::<f64>();
    }
    s / (26 * 4096) as f64
}

/// A larger λ₃ keeps GlyphNet's predictions closer to the pretrained ones.
#[test]
fn larger_lambda3_freezes_glyphnet_more() {
    let (_, colored) = colored_font(1);
    let observed = colored.restrict(LetterSet::from_word("FONT").unwrap()).unwrap();
    let (spec, g1) = small_g1();
    let drift: Vec<f64> = [10.0, 1e3, 1e5]
        .iter()
        .map(|&lambda3| {
            let mut cfg = small_config();
            cfg.lambda3 = lambda3;
            cfg.glyph_adam.lr = 1e-3;
            let mut state = FineTuneState::new(&observed, &spec, &g1, cfg, None).unwrap();
            let frozen = GlyphStack::from_tensor(&state.g1_frozen, 0, LetterSet::ALL).unwrap();
            for _ in 0..4 {
                state.step().unwrap();
            }
            stack_distance(&state.glyph_predictions().unwrap(), &frozen)
        })
        .collect();
    assert!(drift[0] > drift[1] && drift[1] > drift[2], "{drift:?}");
}
