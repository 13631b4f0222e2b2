//! Central finite-difference checks of the hand-written gradients.
//!
//! Each check draws a random instance from `seed`, contracts the layer output
//! with a random vector to get a scalar, and compares every analytic partial
//! derivative with `(f(x + h) - f(x - h)) / 2h`. The result is the largest
//! relative error `|a - n| / max(|a|, |n|, FLOOR)`.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ops::{self, ConvGeom, PoolGeom};
use super::{GlobalPoolKind, LayerSpec, Model, ModelSpec, Shape, Variant};
use crate::gesture::GestureLabel;
use crate::norm::NormStats;
use crate::Result;

pub const STEP: f64 = 1e-5;
/// Denominator floor: components that vanish up to rounding are judged on
/// absolute error.
pub const FLOOR: f64 = 1e-2;

pub fn rel_err(a: f64, n: f64) -> f64 {
    libm::fabs(a - n) / libm::fmax(libm::fmax(libm::fabs(a), libm::fabs(n)), FLOOR)
}

/// Largest relative error between `analytic` and the central difference of
/// `f` around `x`, perturbing one coordinate at a time.
pub fn max_error(x: &[f64], analytic: &[f64], mut f: impl FnMut(&[f64]) -> Result<f64>) -> Result<f64> {
    assert_eq!(x.len(), analytic.len(), "one analytic partial per coordinate");
    let mut xp = x.to_vec();
    let mut worst: f64 = 0.0;
    for i in 0..x.len() {
        xp[i] = x[i] + STEP;
        let up = f(&xp)?;
        xp[i] = x[i] - STEP;
        let down = f(&xp)?;
        xp[i] = x[i];
        worst = worst.max(rel_err(analytic[i], (up - down) / (2.0 * STEP)));
    }
    Ok(worst)
}

fn uniform(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Distinct values at least 0.01 apart, so no max is within reach of a tie.
fn spread(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|i| i as f64 * 0.01 - n as f64 * 0.005).collect();
    for i in (1..n).rev() {
        v.swap(i, rng.random_range(0..=i));
    }
    v
}

/// Values bounded away from zero, so ReLU never sits near its kink.
fn off_zero(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let m = rng.random_range(0.05..1.0);
            if rng.random::<bool>() {
                m
            } else {
                -m
            }
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    Conv2d,
    /// Strided convolution with stride equal to the kernel.
    LatentPool,
    MaxPool,
    GlobalAvgPool,
    GlobalMaxPool,
    Dense,
    Relu,
    Dropout,
    SoftmaxCrossEntropy,
    /// A small model with every layer kind, through `loss_and_grad`.
    Network,
}

impl Check {
    pub const ALL: [Check; 10] = [
        Check::Conv2d,
        Check::LatentPool,
        Check::MaxPool,
        Check::GlobalAvgPool,
        Check::GlobalMaxPool,
        Check::Dense,
        Check::Relu,
        Check::Dropout,
        Check::SoftmaxCrossEntropy,
        Check::Network,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Conv2d => "conv2d",
            Check::LatentPool => "latent_pool",
            Check::MaxPool => "max_pool",
            Check::GlobalAvgPool => "global_avg_pool",
            Check::GlobalMaxPool => "global_max_pool",
            Check::Dense => "dense",
            Check::Relu => "relu",
            Check::Dropout => "dropout",
            Check::SoftmaxCrossEntropy => "softmax_cross_entropy",
            Check::Network => "network",
        }
    }

    /// Maximum relative error on the random instance drawn from `seed`.
    pub fn run(self, seed: u64) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match self {
            Check::Conv2d => conv(&mut rng, false),
            Check::LatentPool => conv(&mut rng, true),
            Check::MaxPool => maxpool(&mut rng),
            Check::GlobalAvgPool => global_avg(&mut rng),
            Check::GlobalMaxPool => global_max(&mut rng),
            Check::Dense => dense(&mut rng),
            Check::Relu => relu(&mut rng),
            Check::Dropout => dropout(&mut rng, seed),
            Check::SoftmaxCrossEntropy => softmax_ce(&mut rng),
            Check::Network => network(&mut rng, seed),
        }
    }
}

fn conv(rng: &mut ChaCha8Rng, strided: bool) -> Result<f64> {
    let kh = rng.random_range(1..=3);
    let kw = rng.random_range(1..=4);
    let (sh, sw) = if strided { (kh, kw) } else { (1, 1) };
    let c_in = rng.random_range(1..=3);
    let g = ConvGeom {
        c_in,
        h: kh + rng.random_range(0..=3),
        w: kw + rng.random_range(0..=5),
        // A latent pool maps c channels to c channels.
        c_out: if strided { c_in } else { rng.random_range(1..=4) },
        kh,
        kw,
        sh,
        sw,
    };
    let x = uniform(rng, g.in_len());
    let w = uniform(rng, g.weight_len());
    let b = uniform(rng, g.c_out);
    let c = uniform(rng, g.out_len());
    let loss = |x: &[f64], w: &[f64], b: &[f64]| Ok(dot(&c, &ops::conv2d_forward(&g, x, w, b)?));

    let mut dw = vec![0.0; w.len()];
    let mut db = vec![0.0; b.len()];
    let dx = ops::conv2d_backward(&g, &x, &w, &c, &mut dw, &mut db, true)?.unwrap_or_default();
    let ex = max_error(&x, &dx, |x| loss(x, &w, &b))?;
    let ew = max_error(&w, &dw, |w| loss(&x, w, &b))?;
    let eb = max_error(&b, &db, |b| loss(&x, &w, b))?;
    Ok(ex.max(ew).max(eb))
}

fn maxpool(rng: &mut ChaCha8Rng) -> Result<f64> {
    let (ph, pw) = (rng.random_range(1..=2), rng.random_range(1..=4));
    let g = PoolGeom {
        c: rng.random_range(1..=3),
        h: ph * rng.random_range(1..=3) + rng.random_range(0..ph),
        w: pw * rng.random_range(1..=4) + rng.random_range(0..pw),
        ph,
        pw,
    };
    let x = spread(rng, g.in_len());
    let c = uniform(rng, g.out_len());
    let (_, arg) = ops::maxpool_forward(&g, &x)?;
    let dx = ops::maxpool_backward(&g, &arg, &c)?;
    max_error(&x, &dx, |x| Ok(dot(&c, &ops::maxpool_forward(&g, x)?.0)))
}

fn global_avg(rng: &mut ChaCha8Rng) -> Result<f64> {
    let (c, hw) = (rng.random_range(1..=5), rng.random_range(1..=12));
    let x = uniform(rng, c * hw);
    let k = uniform(rng, c);
    let dx = ops::global_avg_pool_backward(c, hw, &k)?;
    max_error(&x, &dx, |x| Ok(dot(&k, &ops::global_avg_pool_forward(c, hw, x)?)))
}

/// Global max pooling has no standalone backward kernel; it is checked
/// through the model's backward pass.
fn global_max(rng: &mut ChaCha8Rng) -> Result<f64> {
    let c = rng.random_range(1..=6);
    let (h, w) = (rng.random_range(1..=3), rng.random_range(1..=6));
    let m = Model::new(ModelSpec {
        input: Shape::Map { c, h, w },
        layers: vec![LayerSpec::GlobalPool { kind: GlobalPoolKind::Max }],
        labels: GestureLabel::ALL[..c].to_vec(),
        norm: NormStats::IDENTITY,
        variant: None,
        init_seed: 0,
    })?;
    let x = spread(rng, c * h * w);
    let k = uniform(rng, c);
    let trace = m.forward_trace(&x, None)?;
    let dx = m.backward(&trace, &k, &mut [], true)?;
    max_error(&x, &dx, |x| Ok(dot(&k, m.forward_trace(x, None)?.logits())))
}

fn dense(rng: &mut ChaCha8Rng) -> Result<f64> {
    let (n_in, n_out) = (rng.random_range(1..=12), rng.random_range(1..=8));
    let x = uniform(rng, n_in);
    let w = uniform(rng, n_in * n_out);
    let b = uniform(rng, n_out);
    let c = uniform(rng, n_out);
    let loss = |x: &[f64], w: &[f64], b: &[f64]| Ok(dot(&c, &ops::dense_forward(n_in, n_out, x, w, b)?));
    let mut dw = vec![0.0; w.len()];
    let mut db = vec![0.0; n_out];
    let dx = ops::dense_backward(n_in, n_out, &x, &w, &c, &mut dw, &mut db)?;
    let ex = max_error(&x, &dx, |x| loss(x, &w, &b))?;
    let ew = max_error(&w, &dw, |w| loss(&x, w, &b))?;
    let eb = max_error(&b, &db, |b| loss(&x, &w, b))?;
    Ok(ex.max(ew).max(eb))
}

fn relu(rng: &mut ChaCha8Rng) -> Result<f64> {
    let n = rng.random_range(1..=40);
    let x = off_zero(rng, n);
    let c = uniform(rng, n);
    let dx = ops::relu_backward(&ops::relu_forward(&x), &c);
    max_error(&x, &dx, |x| Ok(dot(&c, &ops::relu_forward(x))))
}

fn dropout(rng: &mut ChaCha8Rng, seed: u64) -> Result<f64> {
    let n = rng.random_range(1..=40);
    let p = rng.random_range(0.0..0.8);
    let x = uniform(rng, n);
    let c = uniform(rng, n);
    // Re-seeding reproduces the same mask on every evaluation.
    let fwd = |x: &[f64]| ops::dropout_forward(p, x, &mut ChaCha8Rng::seed_from_u64(seed)).0;
    let (_, mask) = ops::dropout_forward(p, &x, &mut ChaCha8Rng::seed_from_u64(seed));
    let dx = ops::dropout_backward(&mask, &c);
    max_error(&x, &dx, |x| Ok(dot(&c, &fwd(x))))
}

fn softmax_ce(rng: &mut ChaCha8Rng) -> Result<f64> {
    let n = rng.random_range(2..=8);
    let z: Vec<f64> = uniform(rng, n).iter().map(|v| v * 4.0).collect();
    let t = rng.random_range(0..n);
    let (_, d) = ops::softmax_cross_entropy(&z, t);
    max_error(&z, &d, |z| Ok(ops::softmax_cross_entropy(z, t).0))
}

/// Loss of `model` with its parameters replaced by `params`, dropout masks
/// drawn from `drop_seed`.
fn loss_with(model: &Model, params: &[f64], x: &[f64], t: &[usize], drop_seed: Option<u64>) -> Result<f64> {
    let mut m = model.clone();
    m.params_mut().copy_from_slice(params);
    let mut scratch = vec![0.0; m.param_count()];
    let mut rng = drop_seed.map(ChaCha8Rng::seed_from_u64);
    Ok(m.loss_and_grad(x, t, rng.as_mut(), &mut scratch)?.0)
}

fn network(rng: &mut ChaCha8Rng, seed: u64) -> Result<f64> {
    let (h, c1, c2) = (rng.random_range(2..=3), rng.random_range(2..=3), rng.random_range(2..=3));
    let global = if seed.is_multiple_of(2) { GlobalPoolKind::Avg } else { GlobalPoolKind::Max };
    let mut m = Model::new(ModelSpec {
        input: Shape::Map { c: 1, h, w: 14 },
        layers: vec![
            LayerSpec::Conv2d { kh: 1, kw: 3, c_in: 1, c_out: c1 },
            LayerSpec::Relu,
            LayerSpec::MaxPool { ph: 1, pw: 2 },
            LayerSpec::Dropout { p: 0.3 },
            LayerSpec::Conv2d { kh: 2, kw: 2, c_in: c1, c_out: c2 },
            LayerSpec::Relu,
            LayerSpec::LatentPool { ph: 1, pw: 2, c: c2 },
            LayerSpec::GlobalPool { kind: global },
            LayerSpec::Dropout { p: 0.2 },
            LayerSpec::Dense { n_in: c2, n_out: 4 },
            LayerSpec::Softmax,
        ],
        labels: GestureLabel::ALL[..4].to_vec(),
        norm: NormStats::IDENTITY,
        variant: None,
        init_seed: seed,
    })?;
    // Jitter keeps hidden units away from exact zeros.
    let n = m.param_count();
    let jitter = uniform(rng, n);
    for (p, j) in m.params_mut().iter_mut().zip(jitter) {
        *p += 0.05 * j;
    }
    let batch = 2;
    let x = uniform(rng, batch * h * 14);
    let t: Vec<usize> = (0..batch).map(|_| rng.random_range(0..4)).collect();
    let drop_seed = seed.wrapping_add(77);
    let mut grad = vec![0.0; n];
    m.loss_and_grad(&x, &t, Some(&mut ChaCha8Rng::seed_from_u64(drop_seed)), &mut grad)?;
    let params = m.params().to_vec();
    max_error(&params, &grad, |p| loss_with(&m, p, &x, &t, Some(drop_seed)))
}

/// A full published architecture, checked on `samples` randomly chosen
/// parameters.
pub fn standard_model(variant: Variant, samples: usize, seed: u64) -> Result<f64> {
    let m = Model::new(ModelSpec::standard(variant, GlobalPoolKind::Avg, NormStats::IDENTITY, seed))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = uniform(&mut rng, m.spec().input.len());
    let t = [rng.random_range(0..m.spec().labels.len())];
    let mut grad = vec![0.0; m.param_count()];
    m.loss_and_grad(&x, &t, None, &mut grad)?;
    let idx: Vec<usize> = (0..samples).map(|_| rng.random_range(0..m.param_count())).collect();
    let base = m.params().to_vec();
    let sub_x: Vec<f64> = idx.iter().map(|&i| base[i]).collect();
    let sub_g: Vec<f64> = idx.iter().map(|&i| grad[i]).collect();
    let mut params = base.clone();
    max_error(&sub_x, &sub_g, |sub| {
        for (&i, &v) in idx.iter().zip(sub) {
            params[i] = v;
        }
        loss_with(&m, &params, &x, &t, None)
    })
}
