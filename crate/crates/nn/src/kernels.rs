//! Convolution kernels built on im2col and a BLAS-style gemm.

/// Geometry of a zero-padded 2-d convolution over one sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvGeom {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
    pub kernel: usize,
    pub stride: usize,
    pub pad: usize,
}

impl ConvGeom {
    pub fn out_height(&self) -> usize {
        (self.height + 2 * self.pad - self.kernel) / self.stride + 1
    }

    pub fn out_width(&self) -> usize {
        (self.width + 2 * self.pad - self.kernel) / self.stride + 1
    }

    /// Rows of the im2col matrix.
    pub fn col_rows(&self) -> usize {
        self.channels * self.kernel * self.kernel
    }

    pub fn col_cols(&self) -> usize {
        self.out_height() * self.out_width()
    }
}

/// `c = a·b + beta·c` with row-major operands, optionally transposed.
///
/// `a` is `m×k` (stored `k×m` when `a_t`), `b` is `k×n` (stored `n×k` when
/// `b_t`), `c` is `m×n`.
#[allow(clippy::too_many_arguments)]
pub fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    a_t: bool,
    b: &[f64],
    b_t: bool,
    beta: f64,
    c: &mut [f64],
) {
    assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
    if m == 0 || n == 0 {
        return;
    }
    let (rsa, csa) = if a_t { (1, m as isize) } else { (k as isize, 1) };
    let (rsb, csb) = if b_t { (1, k as isize) } else { (n as isize, 1) };
    // SAFETY: bounds asserted above; strides describe the stated layouts.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

/// Unfolds `input` (`channels×height×width`) into `col_rows × col_cols`.
pub fn im2col(input: &[f64], g: &ConvGeom, cols: &mut [f64]) {
    let (ho, wo) = (g.out_height(), g.out_width());
    let hw_out = ho * wo;
    let k = g.kernel;
    for c in 0..g.channels {
        let plane = &input[c * g.height * g.width..(c + 1) * g.height * g.width];
        for ki in 0..k {
            for kj in 0..k {
                let row = (c * k + ki) * k + kj;
                let dst = &mut cols[row * hw_out..(row + 1) * hw_out];
                for oy in 0..ho {
                    let iy = (oy * g.stride + ki) as isize - g.pad as isize;
                    let line = &mut dst[oy * wo..(oy + 1) * wo];
                    if iy < 0 || iy >= g.height as isize {
                        line.fill(0.0);
                        continue;
                    }
                    let src = &plane[iy as usize * g.width..(iy as usize + 1) * g.width];
                    for (ox, v) in line.iter_mut().enumerate() {
                        let ix = (ox * g.stride + kj) as isize - g.pad as isize;
                        *v = if ix < 0 || ix >= g.width as isize {
                            0.0
                        } else {
                            src[ix as usize]
                        };
                    }
                }
            }
        }
    }
}

/// Adjoint of [`im2col`]: accumulates `cols` back into `output`.
pub fn col2im(cols: &[f64], g: &ConvGeom, output: &mut [f64]) {
    let (ho, wo) = (g.out_height(), g.out_width());
    let hw_out = ho * wo;
    let k = g.kernel;
    for c in 0..g.channels {
        let plane = &mut output[c * g.height * g.width..(c + 1) * g.height * g.width];
        for ki in 0..k {
            for kj in 0..k {
                let row = (c * k + ki) * k + kj;
                let src = &cols[row * hw_out..(row + 1) * hw_out];
                for oy in 0..ho {
                    let iy = (oy * g.stride + ki) as isize - g.pad as isize;
                    if iy < 0 || iy >= g.height as isize {
                        continue;
                    }
                    let dst = &mut plane[iy as usize * g.width..(iy as usize + 1) * g.width];
                    for ox in 0..wo {
                        let ix = (ox * g.stride + kj) as isize - g.pad as isize;
                        if ix >= 0 && (ix as usize) < g.width {
                            dst[ix as usize] += src[oy * wo + ox];
                        }
                    }
                }
            }
        }
    }
}

/// Static description of a (possibly grouped) convolution layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvParams {
    pub stride: usize,
    pub pad: usize,
    pub groups: usize,
}

/// Forward convolution. `x`: `n×cin×h×w`, `weight`: `cout×(cin/groups)×k×k`.
pub fn conv2d_forward(
    x: &[f64],
    (n, cin, h, w): (usize, usize, usize, usize),
    weight: &[f64],
    bias: Option<&[f64]>,
    cout: usize,
    k: usize,
    p: ConvParams,
) -> (Vec<f64>, usize, usize) {
    let cin_g = cin / p.groups;
    let cout_g = cout / p.groups;
    let geom = ConvGeom {
        channels: cin_g,
        height: h,
        width: w,
        kernel: k,
        stride: p.stride,
        pad: p.pad,
    };
    let (ho, wo) = (geom.out_height(), geom.out_width());
    let hw_out = ho * wo;
    let krows = geom.col_rows();
    let mut cols = vec![0.0; krows * hw_out];
    let mut out = vec![0.0; n * cout * hw_out];
    for b in 0..n {
        for g in 0..p.groups {
            let xin = &x[(b * cin + g * cin_g) * h * w..(b * cin + (g + 1) * cin_g) * h * w];
            im2col(xin, &geom, &mut cols);
            let wg = &weight[g * cout_g * krows..(g + 1) * cout_g * krows];
            let dst = &mut out[(b * cout + g * cout_g) * hw_out..(b * cout + (g + 1) * cout_g) * hw_out];
            gemm(cout_g, krows, hw_out, wg, false, &cols, false, 0.0, dst);
        }
        if let Some(bias) = bias {
            for (c, &bv) in bias.iter().enumerate() {
                for v in &mut out[(b * cout + c) * hw_out..(b * cout + c + 1) * hw_out] {
                    *v += bv;
                }
            }
        }
    }
    (out, ho, wo)
}

/// Gradients of [`conv2d_forward`] with respect to input, weight and bias.
#[allow(clippy::too_many_arguments)]
pub fn conv2d_backward(
    x: &[f64],
    (n, cin, h, w): (usize, usize, usize, usize),
    weight: &[f64],
    cout: usize,
    k: usize,
    p: ConvParams,
    dy: &[f64],
    need_dx: bool,
) -> (Option<Vec<f64>>, Vec<f64>, Vec<f64>) {
    let cin_g = cin / p.groups;
    let cout_g = cout / p.groups;
    let geom = ConvGeom {
        channels: cin_g,
        height: h,
        width: w,
        kernel: k,
        stride: p.stride,
        pad: p.pad,
    };
    let hw_out = geom.col_cols();
    let krows = geom.col_rows();
    let mut cols = vec![0.0; krows * hw_out];
    let mut dcols = vec![0.0; krows * hw_out];
    let mut dw = vec![0.0; weight.len()];
    let mut db = vec![0.0; cout];
    let mut dx = need_dx.then(|| vec![0.0; x.len()]);
    for b in 0..n {
        for g in 0..p.groups {
            let xin = &x[(b * cin + g * cin_g) * h * w..(b * cin + (g + 1) * cin_g) * h * w];
            im2col(xin, &geom, &mut cols);
            let dyg = &dy[(b * cout + g * cout_g) * hw_out..(b * cout + (g + 1) * cout_g) * hw_out];
            let dwg = &mut dw[g * cout_g * krows..(g + 1) * cout_g * krows];
            gemm(cout_g, hw_out, krows, dyg, false, &cols, true, 1.0, dwg);
            if let Some(dx) = dx.as_mut() {
                let wg = &weight[g * cout_g * krows..(g + 1) * cout_g * krows];
                gemm(krows, cout_g, hw_out, wg, true, dyg, false, 0.0, &mut dcols);
                let dxin =
                    &mut dx[(b * cin + g * cin_g) * h * w..(b * cin + (g + 1) * cin_g) * h * w];
                col2im(&dcols, &geom, dxin);
            }
        }
        for (c, dbc) in db.iter_mut().enumerate() {
            *dbc += dy[(b * cout + c) * hw_out..(b * cout + c + 1) * hw_out]
                .iter()
                .sum::<f64>();
        }
    }
    (dx, dw, db)
}

/// Output size of a transposed convolution along one axis.
pub fn conv_transpose_out(size: usize, k: usize, stride: usize, pad: usize, out_pad: usize) -> usize {
    (size - 1) * stride + k + out_pad - 2 * pad
}

/// Transposed convolution. `x`: `n×cin×h×w`, `weight`: `cin×cout×k×k`.
#[allow(clippy::too_many_arguments)]
pub fn conv_transpose2d_forward(
    x: &[f64],
    (n, cin, h, w): (usize, usize, usize, usize),
    weight: &[f64],
    bias: Option<&[f64]>,
    cout: usize,
    k: usize,
    stride: usize,
    pad: usize,
    out_pad: usize,
) -> (Vec<f64>, usize, usize) {
    let ho = conv_transpose_out(h, k, stride, pad, out_pad);
    let wo = conv_transpose_out(w, k, stride, pad, out_pad);
    // The adjoint convolution maps ho×wo (cout channels) down to h×w.
    let geom = ConvGeom {
        channels: cout,
        height: ho,
        width: wo,
        kernel: k,
        stride,
        pad,
    };
    debug_assert_eq!((geom.out_height(), geom.out_width()), (h, w));
    let krows = geom.col_rows();
    let hw_in = h * w;
    let mut cols = vec![0.0; krows * hw_in];
    let mut out = vec![0.0; n * cout * ho * wo];
    for b in 0..n {
        let xb = &x[b * cin * hw_in..(b + 1) * cin * hw_in];
        gemm(krows, cin, hw_in, weight, true, xb, false, 0.0, &mut cols);
        let ob = &mut out[b * cout * ho * wo..(b + 1) * cout * ho * wo];
        col2im(&cols, &geom, ob);
        if let Some(bias) = bias {
            for (c, &bv) in bias.iter().enumerate() {
                for v in &mut ob[c * ho * wo..(c + 1) * ho * wo] {
                    *v += bv;
                }
            }
        }
    }
    (out, ho, wo)
}

/// Gradients of [`conv_transpose2d_forward`].
#[allow(clippy::too_many_arguments)]
pub fn conv_transpose2d_backward(
    x: &[f64],
    (n, cin, h, w): (usize, usize, usize, usize),
    weight: &[f64],
    cout: usize,
    k: usize,
    stride: usize,
    pad: usize,
    out_pad: usize,
    dy: &[f64],
    need_dx: bool,
) -> (Option<Vec<f64>>, Vec<f64>, Vec<f64>) {
    let ho = conv_transpose_out(h, k, stride, pad, out_pad);
    let wo = conv_transpose_out(w, k, stride, pad, out_pad);
    let geom = ConvGeom {
        channels: cout,
        height: ho,
        width: wo,
        kernel: k,
        stride,
        pad,
    };
    let krows = geom.col_rows();
    let hw_in = h * w;
    let mut cols = vec![0.0; krows * hw_in];
    let mut dw = vec![0.0; weight.len()];
    let mut db = vec![0.0; cout];
    let mut dx = need_dx.then(|| vec![0.0; x.len()]);
    for b in 0..n {
        let dyb = &dy[b * cout * ho * wo..(b + 1) * cout * ho * wo];
        im2col(dyb, &geom, &mut cols);
        let xb = &x[b * cin * hw_in..(b + 1) * cin * hw_in];
        gemm(cin, hw_in, krows, xb, false, &cols, true, 1.0, &mut dw);
        if let Some(dx) = dx.as_mut() {
            let dxb = &mut dx[b * cin * hw_in..(b + 1) * cin * hw_in];
            gemm(cin, krows, hw_in, weight, false, &cols, false, 0.0, dxb);
        }
        for (c, dbc) in db.iter_mut().enumerate() {
            *dbc += dyb[c * ho * wo..(c + 1) * ho * wo].iter().sum::<f64>();
        }
    }
    (dx, dw, db)
}
