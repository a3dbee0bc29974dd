//! Central finite-difference gradient checking.
//!
//! The check only ever evaluates the loss; it never looks at the tape, so it
//! is an independent oracle for [`Graph::backward`](crate::graph::Graph::backward).

use std::collections::BTreeMap;

use crate::tensor::Tensor;

#[derive(Debug, Clone)]
pub struct GradMismatch {
    pub name: String,
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub rel_error: f64,
}

/// Relative error with an absolute floor so that near-zero gradients do not
/// blow up the ratio.
pub fn relative_error(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Compares `analytic` gradients with central differences of `loss`.
///
/// `loss` receives the full parameter map with one entry perturbed. Every
/// element is probed unless `max_per_tensor` limits it, in which case an
/// evenly spaced subset is used. Returns all mismatches above `tol`.
pub fn check_gradients(
    params: &BTreeMap<String, Tensor>,
    analytic: &BTreeMap<String, Tensor>,
    mut loss: impl FnMut(&BTreeMap<String, Tensor>) -> f64,
    step: f64,
    tol: f64,
    floor: f64,
    max_per_tensor: Option<usize>,
) -> Vec<GradMismatch> {
    let mut work = params.clone();
    let mut bad = Vec::new();
    for (name, base) in params {
        let zeros = Tensor::zeros(base.shape());
        let grad = analytic.get(name).unwrap_or(&zeros);
        let n = base.len();
        let stride = max_per_tensor.map_or(1, |m| n.div_ceil(m.max(1)).max(1));
        for idx in (0..n).step_by(stride) {
            let orig = base.data()[idx];
            work.get_mut(name).expect("cloned map").data_mut()[idx] = orig + step;
            let up = loss(&work);
            work.get_mut(name).expect("cloned map").data_mut()[idx] = orig - step;
            let down = loss(&work);
            work.get_mut(name).expect("cloned map").data_mut()[idx] = orig;
            let numeric = (up - down) / (2.0 * step);
            let a = grad.data()[idx];
            let rel = relative_error(a, numeric, floor);
            if rel > tol {
                bad.push(GradMismatch {
                    name: name.clone(),
                    index: idx,
                    analytic: a,
                    numeric,
                    rel_error: rel,
                });
            }
        }
    }
    bad
}
