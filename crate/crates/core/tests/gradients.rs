//! Finite-difference checks of every loss term on 8×8 inputs and width-4
//! networks, with dropout active.

mod common;

use common::rand_tensor;
use common::terms::*;
use mcgan::mcgan_stack::transform_t;
use mcgan_nn::gradcheck::GradMismatch;
use mcgan_nn::Graph;

const PROBES: usize = 8;

fn assert_clean(results: Vec<(&str, Vec<GradMismatch>)>) {
    for (name, bad) in results {
        assert!(bad.is_empty(), "{name}: {} mismatches, first {:?}", bad.len(), bad.first());
    }
}

#[test]
fn glyphnet_l1_and_dual_lsgan() {
    assert_clean(glyphnet_mismatches(PROBES));
}

#[test]
fn ornanet_terms_including_sigmoid_mask() {
    assert_clean(ornanet_mismatches(PROBES));
}

#[test]
fn glyphnet_end_weighted_l1_and_mask() {
    assert_clean(glyph_end_mismatches(PROBES));
}

#[test]
fn joint_objective_reaches_glyphnet_through_transform() {
    assert_clean(vec![("joint", joint_mismatches(PROBES))]);
}

#[test]
fn transform_gradient_sums_three_copies() {
    let mut g = Graph::new();
    let x = g.param(rand_tensor(&[1, 26, 8, 8], 21));
    let t = transform_t(&mut g, x).unwrap();
    let loss = g.mean(t);
    let n = (26 * 3 * 64) as f64;
    let grad = g.backward(loss).unwrap().take(x).unwrap();
    for &v in grad.data() {
        assert!((v - 3.0 / n).abs() < 1e-15, "{v}");
    }
}

