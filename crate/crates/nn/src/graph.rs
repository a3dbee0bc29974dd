//! Tape-based reverse-mode differentiation.
//!
//! A [`Graph`] records every operation applied to its [`Var`]s. Calling
//! [`Graph::backward`] on a scalar walks the tape in reverse and returns the
//! gradient of that scalar with respect to every leaf created with
//! [`Graph::param`]. A graph is single use: build it, run backward, drop it.

use rand::Rng;

use crate::error::{NnError, Result};
use crate::kernels::{self, ConvParams};
use crate::tensor::Tensor;

pub const BN_EPS: f64 = 1e-5;

/// Handle to a value recorded on a [`Graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

#[derive(Debug)]
enum Op {
    Leaf,
    Conv2d {
        x: Var,
        w: Var,
        b: Option<Var>,
        k: usize,
        params: ConvParams,
    },
    ConvTranspose2d {
        x: Var,
        w: Var,
        b: Option<Var>,
        k: usize,
        stride: usize,
        pad: usize,
        out_pad: usize,
    },
    /// Normalization with per-channel `mean` and `inv_std`; in training mode
    /// these are batch statistics and the input gradient includes their
    /// dependence on `x`.
    BatchNorm {
        x: Var,
        gamma: Var,
        beta: Var,
        mean: Vec<f64>,
        inv_std: Vec<f64>,
        batch_stats: bool,
    },
    Relu(Var),
    LeakyRelu(Var, f64),
    Tanh(Var),
    Sigmoid(Var, f64),
    Dropout(Var, Vec<f64>),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    AddScalar(Var),
    Abs(Var),
    Square(Var),
    Mean(Var),
    ScalePlanes(Var, Vec<f64>),
    ConcatChannels(Vec<Var>),
    SelectPlanes(Var, Vec<(usize, usize)>),
}

struct Node {
    value: Tensor,
    op: Op,
    requires_grad: bool,
}

/// Batch statistics produced by a training-mode batch norm.
#[derive(Debug, Clone)]
pub struct BatchStats {
    pub mean: Vec<f64>,
    /// Unbiased variance, as used for running averages.
    pub var: Vec<f64>,
}

#[derive(Default)]
pub struct Graph {
    nodes: Vec<Node>,
}

/// Gradients of a scalar with respect to the graph's parameters.
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
}

impl Gradients {
    pub fn get(&self, v: Var) -> Option<&Tensor> {
        self.grads.get(v.0).and_then(|g| g.as_ref())
    }

    pub fn take(&mut self, v: Var) -> Option<Tensor> {
        self.grads.get_mut(v.0).and_then(|g| g.take())
    }
}

fn accumulate(grads: &mut [Option<Tensor>], v: Var, g: Tensor) {
    match &mut grads[v.0] {
        Some(acc) => acc.add_assign(&g),
        slot => *slot = Some(g),
    }
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Tensor, op: Op, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn rg(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    /// A constant: no gradient flows into it.
    pub fn input(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Leaf, false)
    }

    /// A differentiable leaf.
    pub fn param(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Leaf, true)
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> &[usize] {
        self.nodes[v.0].value.shape()
    }

    /// Copies the value out of the graph.
    pub fn detach(&self, v: Var) -> Tensor {
        self.nodes[v.0].value.clone()
    }

    pub fn conv2d(
        &mut self,
        x: Var,
        w: Var,
        b: Option<Var>,
        stride: usize,
        pad: usize,
        groups: usize,
    ) -> Result<Var> {
        let (n, cin, h, wd) = self.value(x).dims4()?;
        let (cout, cin_g, k, k2) = self.value(w).dims4()?;
        if k != k2 || groups == 0 || cin % groups != 0 || cout % groups != 0 || cin_g * groups != cin
        {
            return Err(NnError::Shape(format!(
                "conv2d: input {:?} incompatible with weight {:?} and {} groups",
                self.shape(x),
                self.shape(w),
                groups
            )));
        }
        if h + 2 * pad < k || wd + 2 * pad < k {
            return Err(NnError::Shape(format!(
                "conv2d: kernel {k} larger than padded input {h}x{wd}"
            )));
        }
        if let Some(b) = b {
            self.value(b).expect_shape(&[cout])?;
        }
        let params = ConvParams {
            stride,
            pad,
            groups,
        };
        let (out, ho, wo) = kernels::conv2d_forward(
            self.value(x).data(),
            (n, cin, h, wd),
            self.value(w).data(),
            b.map(|b| self.value(b).data()),
            cout,
            k,
            params,
        );
        let rg = self.rg(x) || self.rg(w) || b.is_some_and(|b| self.rg(b));
        let value = Tensor::from_vec(&[n, cout, ho, wo], out)?;
        Ok(self.push(
            value,
            Op::Conv2d {
                x,
                w,
                b,
                k,
                params,
            },
            rg,
        ))
    }

    /// Transposed convolution; `w` has layout `cin×cout×k×k`.
    #[allow(clippy::too_many_arguments)]
    pub fn conv_transpose2d(
        &mut self,
        x: Var,
        w: Var,
        b: Option<Var>,
        stride: usize,
        pad: usize,
        out_pad: usize,
    ) -> Result<Var> {
        let (n, cin, h, wd) = self.value(x).dims4()?;
        let (wcin, cout, k, k2) = self.value(w).dims4()?;
        if wcin != cin || k != k2 || out_pad >= stride.max(1) {
            return Err(NnError::Shape(format!(
                "conv_transpose2d: input {:?} incompatible with weight {:?}",
                self.shape(x),
                self.shape(w)
            )));
        }
        let (out, ho, wo) = kernels::conv_transpose2d_forward(
            self.value(x).data(),
            (n, cin, h, wd),
            self.value(w).data(),
            b.map(|b| self.value(b).data()),
            cout,
            k,
            stride,
            pad,
            out_pad,
        );
        let rg = self.rg(x) || self.rg(w) || b.is_some_and(|b| self.rg(b));
        let value = Tensor::from_vec(&[n, cout, ho, wo], out)?;
        Ok(self.push(
            value,
            Op::ConvTranspose2d {
                x,
                w,
                b,
                k,
                stride,
                pad,
                out_pad,
            },
            rg,
        ))
    }

    /// Batch norm using the statistics of the current batch.
    pub fn batch_norm_train(&mut self, x: Var, gamma: Var, beta: Var) -> Result<(Var, BatchStats)> {
        let (n, c, h, w) = self.value(x).dims4()?;
        let hw = h * w;
        let m = (n * hw) as f64;
        let xv = self.value(x);
        let mut mean = vec![0.0; c];
        let mut var = vec![0.0; c];
        for ch in 0..c {
            let mut s = 0.0;
            for b in 0..n {
                s += xv.plane(b, ch).iter().sum::<f64>();
            }
            let mu = s / m;
            let mut ss = 0.0;
            for b in 0..n {
                ss += xv.plane(b, ch).iter().map(|v| (v - mu) * (v - mu)).sum::<f64>();
            }
            mean[ch] = mu;
            var[ch] = ss / m;
        }
        let inv_std: Vec<f64> = var.iter().map(|v| 1.0 / (v + BN_EPS).sqrt()).collect();
        let unbiased = var
            .iter()
            .map(|v| if m > 1.0 { v * m / (m - 1.0) } else { *v })
            .collect();
        let var = self.bn_apply(x, gamma, beta, mean.clone(), inv_std, true)?;
        Ok((
            var,
            BatchStats {
                mean,
                var: unbiased,
            },
        ))
    }

    /// Batch norm with fixed (running) statistics.
    pub fn batch_norm_eval(
        &mut self,
        x: Var,
        gamma: Var,
        beta: Var,
        running_mean: &[f64],
        running_var: &[f64],
    ) -> Result<Var> {
        let inv_std = running_var
            .iter()
            .map(|v| 1.0 / (v + BN_EPS).sqrt())
            .collect();
        self.bn_apply(x, gamma, beta, running_mean.to_vec(), inv_std, false)
    }

    fn bn_apply(
        &mut self,
        x: Var,
        gamma: Var,
        beta: Var,
        mean: Vec<f64>,
        inv_std: Vec<f64>,
        batch_stats: bool,
    ) -> Result<Var> {
        let (n, c, _, _) = self.value(x).dims4()?;
        self.value(gamma).expect_shape(&[c])?;
        self.value(beta).expect_shape(&[c])?;
        let mut out = self.value(x).clone();
        let gv = self.value(gamma).data();
        let bv = self.value(beta).data();
        for b in 0..n {
            for ch in 0..c {
                let (mu, is, g, be) = (mean[ch], inv_std[ch], gv[ch], bv[ch]);
                for v in out.plane_mut(b, ch) {
                    *v = g * (*v - mu) * is + be;
                }
            }
        }
        let rg = self.rg(x) || self.rg(gamma) || self.rg(beta);
        Ok(self.push(
            out,
            Op::BatchNorm {
                x,
                gamma,
                beta,
                mean,
                inv_std,
                batch_stats,
            },
            rg,
        ))
    }

    pub fn relu(&mut self, x: Var) -> Var {
        let out = self.value(x).map(|v| v.max(0.0));
        let rg = self.rg(x);
        self.push(out, Op::Relu(x), rg)
    }

    pub fn leaky_relu(&mut self, x: Var, slope: f64) -> Var {
        let out = self.value(x).map(|v| if v > 0.0 { v } else { slope * v });
        let rg = self.rg(x);
        self.push(out, Op::LeakyRelu(x, slope), rg)
    }

    pub fn tanh(&mut self, x: Var) -> Var {
        let out = self.value(x).map(f64::tanh);
        let rg = self.rg(x);
        self.push(out, Op::Tanh(x), rg)
    }

    /// Logistic sigmoid of `sharpness·x`.
    pub fn sigmoid(&mut self, x: Var, sharpness: f64) -> Var {
        let out = self.value(x).map(|v| sigmoid(sharpness * v));
        let rg = self.rg(x);
        self.push(out, Op::Sigmoid(x, sharpness), rg)
    }

    /// Inverted dropout: survivors are scaled by `1/(1-rate)`.
    pub fn dropout<R: Rng + ?Sized>(&mut self, x: Var, rate: f64, rng: &mut R) -> Var {
        let keep = 1.0 - rate;
        let mask: Vec<f64> = (0..self.value(x).len())
            .map(|_| {
                if rng.random::<f64>() < keep {
                    1.0 / keep
                } else {
                    0.0
                }
            })
            .collect();
        let mut out = self.value(x).clone();
        for (v, m) in out.data_mut().iter_mut().zip(&mask) {
            *v *= m;
        }
        let rg = self.rg(x);
        self.push(out, Op::Dropout(x, mask), rg)
    }

    fn check_same(&self, a: Var, b: Var, what: &str) -> Result<()> {
        if self.shape(a) != self.shape(b) {
            return Err(NnError::Shape(format!(
                "{what}: {:?} vs {:?}",
                self.shape(a),
                self.shape(b)
            )));
        }
        Ok(())
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.check_same(a, b, "add")?;
        let out = self.value(a).zip_map(self.value(b), |x, y| x + y);
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(out, Op::Add(a, b), rg))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.check_same(a, b, "sub")?;
        let out = self.value(a).zip_map(self.value(b), |x, y| x - y);
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(out, Op::Sub(a, b), rg))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.check_same(a, b, "mul")?;
        let out = self.value(a).zip_map(self.value(b), |x, y| x * y);
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(out, Op::Mul(a, b), rg))
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Var {
        let out = self.value(a).map(|v| v * c);
        let rg = self.rg(a);
        self.push(out, Op::Scale(a, c), rg)
    }

    pub fn add_scalar(&mut self, a: Var, c: f64) -> Var {
        let out = self.value(a).map(|v| v + c);
        let rg = self.rg(a);
        self.push(out, Op::AddScalar(a), rg)
    }

    pub fn abs(&mut self, a: Var) -> Var {
        let out = self.value(a).map(f64::abs);
        let rg = self.rg(a);
        self.push(out, Op::Abs(a), rg)
    }

    pub fn square(&mut self, a: Var) -> Var {
        let out = self.value(a).map(|v| v * v);
        let rg = self.rg(a);
        self.push(out, Op::Square(a), rg)
    }

    /// Mean over all elements, as a one-element tensor.
    pub fn mean(&mut self, a: Var) -> Var {
        let out = Tensor::scalar(self.value(a).mean());
        let rg = self.rg(a);
        self.push(out, Op::Mean(a), rg)
    }

    /// Multiplies every plane of channel `c` by `weights[c]`.
    pub fn scale_planes(&mut self, a: Var, weights: Vec<f64>) -> Result<Var> {
        let (n, c, _, _) = self.value(a).dims4()?;
        if weights.len() != c {
            return Err(NnError::Shape(format!(
                "scale_planes: {} weights for {} channels",
                weights.len(),
                c
            )));
        }
        let mut out = self.value(a).clone();
        for b in 0..n {
            for (ch, &wt) in weights.iter().enumerate() {
                for v in out.plane_mut(b, ch) {
                    *v *= wt;
                }
            }
        }
        let rg = self.rg(a);
        Ok(self.push(out, Op::ScalePlanes(a, weights), rg))
    }

    /// Concatenates along the channel axis.
    pub fn concat_channels(&mut self, parts: &[Var]) -> Result<Var> {
        let first = *parts
            .first()
            .ok_or_else(|| NnError::Shape("concat of zero tensors".into()))?;
        let (n, _, h, w) = self.value(first).dims4()?;
        let mut total = 0;
        for &p in parts {
            let (pn, pc, ph, pw) = self.value(p).dims4()?;
            if (pn, ph, pw) != (n, h, w) {
                return Err(NnError::Shape(format!(
                    "concat_channels: {:?} vs {:?}",
                    self.shape(p),
                    self.shape(first)
                )));
            }
            total += pc;
        }
        let hw = h * w;
        let mut data = Vec::with_capacity(n * total * hw);
        for b in 0..n {
            for &p in parts {
                let t = self.value(p);
                let c = t.shape()[1];
                data.extend_from_slice(&t.data()[b * c * hw..(b + 1) * c * hw]);
            }
        }
        let out = Tensor::from_vec(&[n, total, h, w], data)?;
        let rg = parts.iter().any(|&p| self.rg(p));
        Ok(self.push(out, Op::ConcatChannels(parts.to_vec()), rg))
    }

    /// Gathers whole planes: output plane `(i / out_c, i % out_c)` is input
    /// plane `picks[i] = (batch, channel)`.
    pub fn select_planes(
        &mut self,
        x: Var,
        out_n: usize,
        out_c: usize,
        picks: &[(usize, usize)],
    ) -> Result<Var> {
        let (n, c, h, w) = self.value(x).dims4()?;
        if picks.len() != out_n * out_c {
            return Err(NnError::Shape(format!(
                "select_planes: {} picks for {}x{} output planes",
                picks.len(),
                out_n,
                out_c
            )));
        }
        if let Some(bad) = picks.iter().find(|&&(pb, pc)| pb >= n || pc >= c) {
            return Err(NnError::Shape(format!(
                "select_planes: pick {bad:?} outside input {:?}",
                self.shape(x)
            )));
        }
        let mut out = Tensor::zeros(&[out_n, out_c, h, w]);
        let xv = self.value(x);
        for (i, &(pb, pc)) in picks.iter().enumerate() {
            out.plane_mut(i / out_c, i % out_c)
                .copy_from_slice(xv.plane(pb, pc));
        }
        let rg = self.rg(x);
        Ok(self.push(out, Op::SelectPlanes(x, picks.to_vec()), rg))
    }

    /// Gradient of the scalar `loss` with respect to every `param` leaf.
    pub fn backward(&self, loss: Var) -> Result<Gradients> {
        if self.value(loss).len() != 1 {
            return Err(NnError::Shape(format!(
                "backward needs a scalar, got {:?}",
                self.shape(loss)
            )));
        }
        let mut grads: Vec<Option<Tensor>> = Vec::with_capacity(loss.0 + 1);
        grads.resize_with(loss.0 + 1, || None);
        grads[loss.0] = Some(Tensor::ones(self.shape(loss)));
        for i in (0..=loss.0).rev() {
            let node = &self.nodes[i];
            if !node.requires_grad {
                grads[i] = None;
                continue;
            }
            if matches!(node.op, Op::Leaf) {
                continue;
            }
            let Some(gout) = grads[i].take() else {
                continue;
            };
            self.backward_node(i, &gout, &mut grads)?;
        }
        Ok(Gradients { grads })
    }

    fn backward_node(&self, i: usize, gout: &Tensor, grads: &mut [Option<Tensor>]) -> Result<()> {
        let node = &self.nodes[i];
        match &node.op {
            Op::Leaf => {}
            Op::Conv2d {
                x,
                w,
                b,
                k,
                params,
            } => {
                let xv = self.value(*x);
                let dims = xv.dims4()?;
                let wv = self.value(*w);
                let cout = wv.shape()[0];
                let (dx, dw, db) = kernels::conv2d_backward(
                    xv.data(),
                    dims,
                    wv.data(),
                    cout,
                    *k,
                    *params,
                    gout.data(),
                    self.rg(*x),
                );
                if let Some(dx) = dx {
                    accumulate(grads, *x, Tensor::from_vec(xv.shape(), dx)?);
                }
                if self.rg(*w) {
                    accumulate(grads, *w, Tensor::from_vec(wv.shape(), dw)?);
                }
                if let Some(b) = b.filter(|b| self.rg(*b)) {
                    accumulate(grads, b, Tensor::from_vec(&[cout], db)?);
                }
            }
            Op::ConvTranspose2d {
                x,
                w,
                b,
                k,
                stride,
                pad,
                out_pad,
            } => {
                let xv = self.value(*x);
                let dims = xv.dims4()?;
                let wv = self.value(*w);
                let cout = wv.shape()[1];
                let (dx, dw, db) = kernels::conv_transpose2d_backward(
                    xv.data(),
                    dims,
                    wv.data(),
                    cout,
                    *k,
                    *stride,
                    *pad,
                    *out_pad,
                    gout.data(),
                    self.rg(*x),
                );
                if let Some(dx) = dx {
                    accumulate(grads, *x, Tensor::from_vec(xv.shape(), dx)?);
                }
                if self.rg(*w) {
                    accumulate(grads, *w, Tensor::from_vec(wv.shape(), dw)?);
                }
                if let Some(b) = b.filter(|b| self.rg(*b)) {
                    accumulate(grads, b, Tensor::from_vec(&[cout], db)?);
                }
            }
            Op::BatchNorm {
                x,
                gamma,
                beta,
                mean,
                inv_std,
                batch_stats,
            } => {
                let xv = self.value(*x);
                let (n, c, h, w) = xv.dims4()?;
                let m = (n * h * w) as f64;
                let gv = self.value(*gamma).data();
                let mut dgamma = vec![0.0; c];
                let mut dbeta = vec![0.0; c];
                for b in 0..n {
                    for ch in 0..c {
                        for (&xi, &dy) in xv.plane(b, ch).iter().zip(gout.plane(b, ch)) {
                            dgamma[ch] += dy * (xi - mean[ch]) * inv_std[ch];
                            dbeta[ch] += dy;
                        }
                    }
                }
                if self.rg(*x) {
                    let mut dx = Tensor::zeros(xv.shape());
                    for b in 0..n {
                        for ch in 0..c {
                            let scale = gv[ch] * inv_std[ch];
                            let xs = xv.plane(b, ch);
                            let dys = gout.plane(b, ch);
                            let dxs = dx.plane_mut(b, ch);
                            for j in 0..xs.len() {
                                dxs[j] = if *batch_stats {
                                    let xhat = (xs[j] - mean[ch]) * inv_std[ch];
                                    scale * (dys[j] - dbeta[ch] / m - xhat * dgamma[ch] / m)
                                } else {
                                    scale * dys[j]
                                };
                            }
                        }
                    }
                    accumulate(grads, *x, dx);
                }
                if self.rg(*gamma) {
                    accumulate(grads, *gamma, Tensor::from_vec(&[c], dgamma)?);
                }
                if self.rg(*beta) {
                    accumulate(grads, *beta, Tensor::from_vec(&[c], dbeta)?);
                }
            }
            Op::Relu(x) => {
                let g = self
                    .value(*x)
                    .zip_map(gout, |v, d| if v > 0.0 { d } else { 0.0 });
                accumulate(grads, *x, g);
            }
            Op::LeakyRelu(x, slope) => {
                let g = self
                    .value(*x)
                    .zip_map(gout, |v, d| if v > 0.0 { d } else { slope * d });
                accumulate(grads, *x, g);
            }
            Op::Tanh(x) => {
                let g = node.value.zip_map(gout, |y, d| d * (1.0 - y * y));
                accumulate(grads, *x, g);
            }
            Op::Sigmoid(x, k) => {
                let g = node.value.zip_map(gout, |y, d| d * k * y * (1.0 - y));
                accumulate(grads, *x, g);
            }
            Op::Dropout(x, mask) => {
                let mut g = gout.clone();
                for (v, m) in g.data_mut().iter_mut().zip(mask) {
                    *v *= m;
                }
                accumulate(grads, *x, g);
            }
            Op::Add(a, b) => {
                if self.rg(*a) {
                    accumulate(grads, *a, gout.clone());
                }
                if self.rg(*b) {
                    accumulate(grads, *b, gout.clone());
                }
            }
            Op::Sub(a, b) => {
                if self.rg(*a) {
                    accumulate(grads, *a, gout.clone());
                }
                if self.rg(*b) {
                    accumulate(grads, *b, gout.map(|d| -d));
                }
            }
            Op::Mul(a, b) => {
                if self.rg(*a) {
                    accumulate(grads, *a, gout.zip_map(self.value(*b), |d, y| d * y));
                }
                if self.rg(*b) {
                    accumulate(grads, *b, gout.zip_map(self.value(*a), |d, x| d * x));
                }
            }
            Op::Scale(a, c) => accumulate(grads, *a, gout.map(|d| d * c)),
            Op::AddScalar(a) => accumulate(grads, *a, gout.clone()),
            Op::Abs(a) => {
                let g = self.value(*a).zip_map(gout, |v, d| {
                    if v > 0.0 {
                        d
                    } else if v < 0.0 {
                        -d
                    } else {
                        0.0
                    }
                });
                accumulate(grads, *a, g);
            }
            Op::Square(a) => {
                let g = self.value(*a).zip_map(gout, |v, d| 2.0 * v * d);
                accumulate(grads, *a, g);
            }
            Op::Mean(a) => {
                let av = self.value(*a);
                let d = gout.item() / av.len() as f64;
                accumulate(grads, *a, Tensor::full(av.shape(), d));
            }
            Op::ScalePlanes(a, weights) => {
                let mut g = gout.clone();
                let (n, _, _, _) = g.dims4()?;
                for b in 0..n {
                    for (ch, &wt) in weights.iter().enumerate() {
                        for v in g.plane_mut(b, ch) {
                            *v *= wt;
                        }
                    }
                }
                accumulate(grads, *a, g);
            }
            Op::ConcatChannels(parts) => {
                let (n, _, h, w) = gout.dims4()?;
                let hw = h * w;
                let total = gout.shape()[1];
                let mut offset = 0;
                for &p in parts {
                    let c = self.shape(p)[1];
                    if self.rg(p) {
                        let mut data = Vec::with_capacity(n * c * hw);
                        for b in 0..n {
                            let start = (b * total + offset) * hw;
                            data.extend_from_slice(&gout.data()[start..start + c * hw]);
                        }
                        accumulate(grads, p, Tensor::from_vec(&[n, c, h, w], data)?);
                    }
                    offset += c;
                }
            }
            Op::SelectPlanes(x, picks) => {
                let out_c = gout.shape()[1];
                let mut g = Tensor::zeros(self.shape(*x));
                for (i, &(pb, pc)) in picks.iter().enumerate() {
                    let src = gout.plane(i / out_c, i % out_c);
                    for (d, s) in g.plane_mut(pb, pc).iter_mut().zip(src) {
                        *d += s;
                    }
                }
                accumulate(grads, *x, g);
            }
        }
        Ok(())
    }
}

pub fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}
