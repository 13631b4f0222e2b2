//! Per-sample layer kernels, forward and backward.
//!
//! Feature maps are channels-last `(h, w, c)`, row-major: `h` is the sensor
//! axis, `w` is time. A batch is the concatenation of its samples.
//! Convolution weights are `[c_out][c_in][kh][kw]`, dense weights
//! `[n_out][n_in]`.
//!
//! Convolutions unfold the batch into an `(batch·ho·wo) × (c_in·kh·kw)`
//! matrix and run a single GEMM, so the output lands directly in
//! channels-last order.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::math::{axpy, dot, exp, ln};

use crate::{Error, Result};

/// Geometry of a 2-D convolution with valid padding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvGeom {
    pub c_in: usize,
    pub h: usize,
    pub w: usize,
    pub c_out: usize,
    pub kh: usize,
    pub kw: usize,
    pub sh: usize,
    pub sw: usize,
}

impl ConvGeom {
    pub fn stride1(c_in: usize, h: usize, w: usize, c_out: usize, kh: usize, kw: usize) -> Self {
        ConvGeom { c_in, h, w, c_out, kh, kw, sh: 1, sw: 1 }
    }

    pub fn check(&self) -> Result<()> {
        if self.kh == 0 || self.kw == 0 || self.sh == 0 || self.sw == 0 || self.h < self.kh || self.w < self.kw {
            return Err(Error::ShapeMismatch(format!(
                "kernel ({}, {}) stride ({}, {}) does not fit input ({}, {})",
                self.kh, self.kw, self.sh, self.sw, self.h, self.w
            )));
        }
        Ok(())
    }

    pub fn out_h(&self) -> usize {
        (self.h - self.kh) / self.sh + 1
    }

    pub fn out_w(&self) -> usize {
        (self.w - self.kw) / self.sw + 1
    }

    pub fn in_len(&self) -> usize {
        self.c_in * self.h * self.w
    }

    pub fn out_len(&self) -> usize {
        self.c_out * self.out_h() * self.out_w()
    }

    pub fn weight_len(&self) -> usize {
        self.c_out * self.c_in * self.kh * self.kw
    }
}

fn expect_len(what: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::ShapeMismatch(format!("{what}: expected {want} values, got {got}")));
    }
    Ok(())
}

/// `c = a · b + beta · c` for row-major operands given as `(data, row
/// stride, column stride)`.
#[allow(clippy::too_many_arguments)]
fn gemm(m: usize, k: usize, n: usize, a: (&[f64], usize, usize), b: (&[f64], usize, usize), beta: f64, c: &mut [f64]) {
    let last = |rows: usize, cols: usize, rs: usize, cs: usize| (rows - 1) * rs + (cols - 1) * cs;
    if m == 0 || n == 0 {
        return;
    }
    assert!(c.len() >= m * n);
    if k == 0 {
        c[..m * n].iter_mut().for_each(|v| *v *= beta);
        return;
    }
    assert!(a.0.len() > last(m, k, a.1, a.2));
    assert!(b.0.len() > last(k, n, b.1, b.2));
    // SAFETY: the asserts above keep every strided access of `a`, `b` and the
    // dense `m × n` output inside the borrowed slices, which do not alias.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.0.as_ptr(),
            a.1 as isize,
            a.2 as isize,
            b.0.as_ptr(),
            b.1 as isize,
            b.2 as isize,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

/// Unfolds a batch into a `(batch·ho·wo) × (c_in·kh·kw)` matrix: row
/// `(b, i, j)`, column `(c, u, v)` holds `x[b][i·sh+u][j·sw+v][c]`.
pub fn im2col(g: &ConvGeom, batch: usize, x: &[f64]) -> Vec<f64> {
    let (ho, wo) = (g.out_h(), g.out_w());
    let k = g.c_in * g.kh * g.kw;
    let khw = g.kh * g.kw;
    let mut cols = vec![0.0; batch * ho * wo * k];
    let mut rows = cols.chunks_exact_mut(k);
    for b in 0..batch {
        let xb = &x[b * g.in_len()..(b + 1) * g.in_len()];
        for i in 0..ho {
            for j in 0..wo {
                let row = rows.next().expect("sized above");
                for u in 0..g.kh {
                    for v in 0..g.kw {
                        let src = ((i * g.sh + u) * g.w + j * g.sw + v) * g.c_in;
                        for (c, &val) in xb[src..src + g.c_in].iter().enumerate() {
                            row[c * khw + u * g.kw + v] = val;
                        }
                    }
                }
            }
        }
    }
    cols
}

/// Adjoint of [`im2col`]: scatter-adds rows back into input layout.
fn col2im(g: &ConvGeom, batch: usize, cols: &[f64]) -> Vec<f64> {
    let (ho, wo) = (g.out_h(), g.out_w());
    let k = g.c_in * g.kh * g.kw;
    let khw = g.kh * g.kw;
    let mut dx = vec![0.0; batch * g.in_len()];
    let mut rows = cols.chunks_exact(k);
    for b in 0..batch {
        let xb = &mut dx[b * g.in_len()..(b + 1) * g.in_len()];
        for i in 0..ho {
            for j in 0..wo {
                let row = rows.next().expect("sized by caller");
                for u in 0..g.kh {
                    for v in 0..g.kw {
                        let dst = ((i * g.sh + u) * g.w + j * g.sw + v) * g.c_in;
                        for (c, d) in xb[dst..dst + g.c_in].iter_mut().enumerate() {
                            *d += row[c * khw + u * g.kw + v];
                        }
                    }
                }
            }
        }
    }
    dx
}

/// Batched convolution,
/// `y[b][i][j][o] = bias[o] + Σ_c Σ_u Σ_v x[b][i·sh+u][j·sw+v][c] · w[o][c][u][v]`.
/// Returns the output and the unfolded input (reused by the backward pass).
pub fn conv2d_forward_batch(
    g: &ConvGeom,
    batch: usize,
    x: &[f64],
    w: &[f64],
    bias: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    g.check()?;
    expect_len("conv input", x.len(), batch * g.in_len())?;
    expect_len("conv weights", w.len(), g.weight_len())?;
    expect_len("conv bias", bias.len(), g.c_out)?;
    let rows = batch * g.out_h() * g.out_w();
    let k = g.c_in * g.kh * g.kw;
    let cols = im2col(g, batch, x);
    let mut y: Vec<f64> = bias.iter().copied().cycle().take(rows * g.c_out).collect();
    // y (rows × c_out) += cols (rows × k) · wᵀ (k × c_out)
    gemm(rows, k, g.c_out, (&cols, k, 1), (w, 1, k), 1.0, &mut y);
    Ok((y, cols))
}

pub fn conv2d_forward(g: &ConvGeom, x: &[f64], w: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    conv2d_forward_batch(g, 1, x, w, b).map(|(y, _)| y)
}

/// Batched convolution gradient given the unfolded input from the forward
/// pass. Accumulates into `dw` and `db`; returns `dL/dx` when `need_dx`.
#[allow(clippy::too_many_arguments)]
pub fn conv2d_backward_batch(
    g: &ConvGeom,
    batch: usize,
    cols: &[f64],
    w: &[f64],
    dy: &[f64],
    dw: &mut [f64],
    db: &mut [f64],
    need_dx: bool,
) -> Result<Option<Vec<f64>>> {
    g.check()?;
    let rows = batch * g.out_h() * g.out_w();
    let k = g.c_in * g.kh * g.kw;
    expect_len("conv columns", cols.len(), rows * k)?;
    expect_len("conv weights", w.len(), g.weight_len())?;
    expect_len("conv output grad", dy.len(), rows * g.c_out)?;
    expect_len("conv weight grad", dw.len(), g.weight_len())?;
    expect_len("conv bias grad", db.len(), g.c_out)?;
    for r in dy.chunks_exact(g.c_out) {
        for (d, v) in db.iter_mut().zip(r) {
            *d += v;
        }
    }
    // dw (c_out × k) += dyᵀ (c_out × rows) · cols (rows × k)
    gemm(g.c_out, rows, k, (dy, 1, g.c_out), (cols, k, 1), 1.0, dw);
    if !need_dx {
        return Ok(None);
    }
    // dcols (rows × k) = dy (rows × c_out) · w (c_out × k)
    let mut dcols = vec![0.0; rows * k];
    gemm(rows, g.c_out, k, (dy, g.c_out, 1), (w, k, 1), 0.0, &mut dcols);
    Ok(Some(col2im(g, batch, &dcols)))
}

/// Single-sample convolution gradient.
pub fn conv2d_backward(
    g: &ConvGeom,
    x: &[f64],
    w: &[f64],
    dy: &[f64],
    dw: &mut [f64],
    db: &mut [f64],
    need_dx: bool,
) -> Result<Option<Vec<f64>>> {
    g.check()?;
    expect_len("conv input", x.len(), g.in_len())?;
    let cols = im2col(g, 1, x);
    conv2d_backward_batch(g, 1, &cols, w, dy, dw, db, need_dx)
}

/// Non-overlapping pooling geometry (window = stride); trailing rows and
/// columns that do not fill a window are dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PoolGeom {
    pub c: usize,
    pub h: usize,
    pub w: usize,
    pub ph: usize,
    pub pw: usize,
}

impl PoolGeom {
    pub fn check(&self) -> Result<()> {
        if self.ph == 0 || self.pw == 0 || self.h < self.ph || self.w < self.pw {
            return Err(Error::ShapeMismatch(format!(
                "pool window ({}, {}) does not fit input ({}, {})",
                self.ph, self.pw, self.h, self.w
            )));
        }
        Ok(())
    }

    pub fn out_h(&self) -> usize {
        self.h / self.ph
    }

    pub fn out_w(&self) -> usize {
        self.w / self.pw
    }

    pub fn in_len(&self) -> usize {
        self.c * self.h * self.w
    }

    pub fn out_len(&self) -> usize {
        self.c * self.out_h() * self.out_w()
    }
}

/// Max over each window, per channel. Also returns the flat input index of
/// every selected element; the first maximum in row-major window order wins
/// ties.
pub fn maxpool_forward(g: &PoolGeom, x: &[f64]) -> Result<(Vec<f64>, Vec<u32>)> {
    g.check()?;
    expect_len("pool input", x.len(), g.in_len())?;
    let (ho, wo) = (g.out_h(), g.out_w());
    let mut y = Vec::with_capacity(g.out_len());
    let mut arg = Vec::with_capacity(g.out_len());
    for i in 0..ho {
        for j in 0..wo {
            for c in 0..g.c {
                let mut best = ((i * g.ph) * g.w + j * g.pw) * g.c + c;
                for u in 0..g.ph {
                    for v in 0..g.pw {
                        let idx = ((i * g.ph + u) * g.w + j * g.pw + v) * g.c + c;
                        if x[idx] > x[best] {
                            best = idx;
                        }
                    }
                }
                y.push(x[best]);
                arg.push(best as u32);
            }
        }
    }
    Ok((y, arg))
}

pub fn maxpool_backward(g: &PoolGeom, argmax: &[u32], dy: &[f64]) -> Result<Vec<f64>> {
    expect_len("pool output grad", dy.len(), g.out_len())?;
    expect_len("pool argmax", argmax.len(), g.out_len())?;
    let mut dx = vec![0.0; g.in_len()];
    for (&a, &d) in argmax.iter().zip(dy) {
        dx[a as usize] += d;
    }
    Ok(dx)
}

/// Mean over all `hw` spatial positions of each of the `c` channels.
pub fn global_avg_pool_forward(c: usize, hw: usize, x: &[f64]) -> Result<Vec<f64>> {
    expect_len("global pool input", x.len(), c * hw)?;
    let mut y = vec![0.0; c];
    for pos in x.chunks_exact(c) {
        for (s, v) in y.iter_mut().zip(pos) {
            *s += v;
        }
    }
    y.iter_mut().for_each(|s| *s /= hw as f64);
    Ok(y)
}

pub fn global_avg_pool_backward(c: usize, hw: usize, dy: &[f64]) -> Result<Vec<f64>> {
    expect_len("global pool output grad", dy.len(), c)?;
    let scaled: Vec<f64> = dy.iter().map(|d| d / hw as f64).collect();
    Ok(scaled.iter().copied().cycle().take(c * hw).collect())
}

/// Max over all spatial positions of each channel, with arg-max indices
/// (first occurrence wins).
pub fn global_max_pool_forward(c: usize, hw: usize, x: &[f64]) -> Result<(Vec<f64>, Vec<u32>)> {
    expect_len("global pool input", x.len(), c * hw)?;
    let mut arg: Vec<u32> = (0..c as u32).collect();
    for (p, pos) in x.chunks_exact(c).enumerate() {
        for (k, &v) in pos.iter().enumerate() {
            if v > x[arg[k] as usize] {
                arg[k] = (p * c + k) as u32;
            }
        }
    }
    Ok((arg.iter().map(|&a| x[a as usize]).collect(), arg))
}

/// `y = W x + b` with `W` stored `[n_out][n_in]`.
pub fn dense_forward(n_in: usize, n_out: usize, x: &[f64], w: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    expect_len("dense input", x.len(), n_in)?;
    expect_len("dense weights", w.len(), n_in * n_out)?;
    expect_len("dense bias", b.len(), n_out)?;
    Ok((0..n_out).map(|o| b[o] + dot(&w[o * n_in..(o + 1) * n_in], x)).collect())
}

pub fn dense_backward(
    n_in: usize,
    n_out: usize,
    x: &[f64],
    w: &[f64],
    dy: &[f64],
    dw: &mut [f64],
    db: &mut [f64],
) -> Result<Vec<f64>> {
    expect_len("dense output grad", dy.len(), n_out)?;
    expect_len("dense input", x.len(), n_in)?;
    let mut dx = vec![0.0; n_in];
    for o in 0..n_out {
        db[o] += dy[o];
        axpy(dy[o], x, &mut dw[o * n_in..(o + 1) * n_in]);
        axpy(dy[o], &w[o * n_in..(o + 1) * n_in], &mut dx);
    }
    Ok(dx)
}

pub fn relu_forward(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| if v > 0.0 { v } else { 0.0 }).collect()
}

/// Gradient through ReLU given its output.
pub fn relu_backward(y: &[f64], dy: &[f64]) -> Vec<f64> {
    y.iter().zip(dy).map(|(&v, &d)| if v > 0.0 { d } else { 0.0 }).collect()
}

/// Inverted dropout: keeps each unit with probability `1 - p` and scales
/// survivors by `1 / (1 - p)`. Returns the output and the per-unit scale.
pub fn dropout_forward<R: Rng + ?Sized>(p: f64, x: &[f64], rng: &mut R) -> (Vec<f64>, Vec<f64>) {
    if p <= 0.0 {
        return (x.to_vec(), vec![1.0; x.len()]);
    }
    let keep = 1.0 / (1.0 - p);
    let mask: Vec<f64> = x.iter().map(|_| if rng.random::<f64>() < p { 0.0 } else { keep }).collect();
    (x.iter().zip(&mask).map(|(a, m)| a * m).collect(), mask)
}

pub fn dropout_backward(mask: &[f64], dy: &[f64]) -> Vec<f64> {
    mask.iter().zip(dy).map(|(m, d)| m * d).collect()
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|&z| exp(z - max)).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// Cross-entropy of `softmax(logits)` against class `target`, and its
/// gradient with respect to the logits (`probs - onehot`).
pub fn softmax_cross_entropy(logits: &[f64], target: usize) -> (f64, Vec<f64>) {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + ln(logits.iter().map(|&z| exp(z - max)).sum::<f64>());
    let mut grad = softmax(logits);
    grad[target] -= 1.0;
    (lse - logits[target], grad)
}
