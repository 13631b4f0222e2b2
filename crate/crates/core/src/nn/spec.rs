//! Layer descriptions, static shape checking and parameter accounting.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::gesture::N_CLASSES;
use crate::window::{N_CHANNELS, WINDOW_LEN};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GlobalPoolKind {
    Avg,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LayerSpec {
    /// Valid padding, stride 1.
    Conv2d {
        kh: usize,
        kw: usize,
        c_in: usize,
        c_out: usize,
    },
    /// Window = stride.
    MaxPool {
        ph: usize,
        pw: usize,
    },
    /// Learned pooling: a strided convolution with kernel = stride = window,
    /// `c -> c` channels, with bias and no activation.
    LatentPool {
        ph: usize,
        pw: usize,
        c: usize,
    },
    GlobalPool {
        kind: GlobalPoolKind,
    },
    Dense {
        n_in: usize,
        n_out: usize,
    },
    Dropout {
        p: f64,
    },
    Relu,
    Softmax,
}

impl LayerSpec {
    pub fn name(&self) -> &'static str {
        match self {
            LayerSpec::Conv2d { .. } => "conv2d",
            LayerSpec::MaxPool { .. } => "maxpool",
            LayerSpec::LatentPool { .. } => "latentpool",
            LayerSpec::GlobalPool { kind: GlobalPoolKind::Avg } => "global_avg_pool",
            LayerSpec::GlobalPool { kind: GlobalPoolKind::Max } => "global_max_pool",
            LayerSpec::Dense { .. } => "dense",
            LayerSpec::Dropout { .. } => "dropout",
            LayerSpec::Relu => "relu",
            LayerSpec::Softmax => "softmax",
        }
    }

    /// Number of trainable scalars (weights then bias).
    pub fn param_count(&self) -> usize {
        match *self {
            LayerSpec::Conv2d { kh, kw, c_in, c_out } => kh * kw * c_in * c_out + c_out,
            LayerSpec::LatentPool { ph, pw, c } => ph * pw * c * c + c,
            LayerSpec::Dense { n_in, n_out } => n_in * n_out + n_out,
            _ => 0,
        }
    }

    /// Length of the weight part of the parameter block.
    pub fn weight_count(&self) -> usize {
        match *self {
            LayerSpec::Conv2d { c_out, .. } => self.param_count() - c_out,
            LayerSpec::LatentPool { c, .. } => self.param_count() - c,
            LayerSpec::Dense { n_out, .. } => self.param_count() - n_out,
            _ => 0,
        }
    }

    /// Fan-in used for He initialization.
    pub fn fan_in(&self) -> usize {
        match *self {
            LayerSpec::Conv2d { kh, kw, c_in, .. } => kh * kw * c_in,
            LayerSpec::LatentPool { ph, pw, c } => ph * pw * c,
            LayerSpec::Dense { n_in, .. } => n_in,
            _ => 0,
        }
    }

    /// Output shape for the given input shape, or a shape error.
    pub fn output_shape(&self, input: Shape) -> Result<Shape> {
        let mismatch = |why: String| Err(Error::ShapeMismatch(format!("{}: {why} (input {input})", self.name())));
        match (*self, input) {
            (LayerSpec::Conv2d { kh, kw, c_in, c_out }, Shape::Map { c, h, w }) => {
                if c != c_in {
                    return mismatch(format!("expects {c_in} input channels"));
                }
                if h < kh || w < kw || kh == 0 || kw == 0 || c_out == 0 {
                    return mismatch(format!("kernel ({kh}, {kw}) does not fit"));
                }
                Ok(Shape::Map { c: c_out, h: h - kh + 1, w: w - kw + 1 })
            }
            (LayerSpec::MaxPool { ph, pw }, Shape::Map { c, h, w }) => {
                if ph == 0 || pw == 0 || h < ph || w < pw {
                    return mismatch(format!("window ({ph}, {pw}) does not fit"));
                }
                Ok(Shape::Map { c, h: h / ph, w: w / pw })
            }
            (LayerSpec::LatentPool { ph, pw, c: lc }, Shape::Map { c, h, w }) => {
                if c != lc {
                    return mismatch(format!("expects {lc} channels"));
                }
                if ph == 0 || pw == 0 || h < ph || w < pw {
                    return mismatch(format!("window ({ph}, {pw}) does not fit"));
                }
                Ok(Shape::Map { c, h: h / ph, w: w / pw })
            }
            (LayerSpec::GlobalPool { .. }, Shape::Map { c, .. }) => Ok(Shape::Vector(c)),
            (LayerSpec::Dense { n_in, n_out }, Shape::Vector(n)) => {
                if n != n_in {
                    return mismatch(format!("expects {n_in} inputs"));
                }
                Ok(Shape::Vector(n_out))
            }
            (LayerSpec::Dropout { p }, s) => {
                if !(0.0..1.0).contains(&p) {
                    return mismatch(format!("probability {p} outside [0, 1)"));
                }
                Ok(s)
            }
            (LayerSpec::Relu, s) => Ok(s),
            (LayerSpec::Softmax, Shape::Vector(n)) => Ok(Shape::Vector(n)),
            _ => mismatch("incompatible input rank".into()),
        }
    }
}

/// Activation shape of a single sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Shape {
    /// `h × w` positions with `c` channels each, stored channels-last; `h` is
    /// the sensor axis and `w` is time.
    Map {
        c: usize,
        h: usize,
        w: usize,
    },
    Vector(usize),
}

impl Shape {
    pub fn len(&self) -> usize {
        match *self {
            Shape::Map { c, h, w } => c * h * w,
            Shape::Vector(n) => n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl fmt::Display for Shape {
    /// Batch-of-one NHWC notation: `(1, h, w, c)` or `(1, n)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Shape::Map { c, h, w } => write!(f, "(1,{h},{w},{c})"),
            Shape::Vector(n) => write!(f, "(1,{n})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Max-pooling CNN.
    CnnMax,
    /// Latent-pooling CNN.
    CnnLp,
}

impl Variant {
    pub fn tag(self) -> &'static str {
        match self {
            Variant::CnnMax => "cnn-max",
            Variant::CnnLp => "cnn-lp",
        }
    }

    pub fn from_tag(s: &str) -> Option<Self> {
        match s {
            "cnn-max" => Some(Variant::CnnMax),
            "cnn-lp" => Some(Variant::CnnLp),
            _ => None,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Input of both recognizer variants: one feature map of 6 sensor rows × 250 steps.
pub const INPUT_SHAPE: Shape = Shape::Map { c: 1, h: N_CHANNELS, w: WINDOW_LEN };

/// The four-block recognizer.
///
/// ```text
/// conv(1,11) 1->12  relu  pool(1,4)  dropout .5
/// conv(1,11) 12->24 relu  pool(1,2)  dropout .5
/// conv(6,11) 24->32 relu  global pool dropout .5
/// dense 32->6 softmax
/// ```
///
/// `pool` is a max pool for [`Variant::CnnMax`] and a latent pool for
/// [`Variant::CnnLp`].
pub fn architecture(variant: Variant, global: GlobalPoolKind) -> Vec<LayerSpec> {
    let pool = |ph, pw, c| match variant {
        Variant::CnnMax => LayerSpec::MaxPool { ph, pw },
        Variant::CnnLp => LayerSpec::LatentPool { ph, pw, c },
    };
    let drop = LayerSpec::Dropout { p: 0.5 };
    alloc::vec![
        LayerSpec::Conv2d { kh: 1, kw: 11, c_in: 1, c_out: 12 },
        LayerSpec::Relu,
        pool(1, 4, 12),
        drop,
        LayerSpec::Conv2d { kh: 1, kw: 11, c_in: 12, c_out: 24 },
        LayerSpec::Relu,
        pool(1, 2, 24),
        drop,
        LayerSpec::Conv2d { kh: N_CHANNELS, kw: 11, c_in: 24, c_out: 32 },
        LayerSpec::Relu,
        LayerSpec::GlobalPool { kind: global },
        drop,
        LayerSpec::Dense { n_in: 32, n_out: N_CLASSES },
        LayerSpec::Softmax,
    ]
}

/// Output shape of every layer, checking the whole chain.
pub fn shape_chain(input: Shape, layers: &[LayerSpec]) -> Result<Vec<Shape>> {
    let mut shapes = Vec::with_capacity(layers.len());
    let mut s = input;
    for (i, l) in layers.iter().enumerate() {
        s = l.output_shape(s).map_err(|e| match e {
            Error::ShapeMismatch(m) => Error::ShapeMismatch(format!("layer {i}: {m}")),
            other => other,
        })?;
        shapes.push(s);
    }
    Ok(shapes)
}

pub fn param_count(layers: &[LayerSpec]) -> usize {
    layers.iter().map(LayerSpec::param_count).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    /// Counts straight from the kernel shapes, independent of `LayerSpec::param_count`.
    fn counting_oracle(layers: &[LayerSpec]) -> usize {
        let mut total = 0;
        for l in layers {
            total += match l {
                LayerSpec::Conv2d { kh, kw, c_in, c_out } => {
                    let mut n = 0;
                    for _o in 0..*c_out {
                        n += 1;
                        for _ in 0..(kh * kw * c_in) {
                            n += 1;
                        }
                    }
                    n
                }
                LayerSpec::LatentPool { ph, pw, c } => (0..*c).map(|_| 1 + ph * pw * c).sum(),
                LayerSpec::Dense { n_in, n_out } => (0..*n_out).map(|_| n_in + 1).sum(),
                _ => 0,
            };
        }
        total
    }

    #[test]
    fn parameter_counts() {
        let max = architecture(Variant::CnnMax, GlobalPoolKind::Avg);
        let lp = architecture(Variant::CnnLp, GlobalPoolKind::Avg);
        assert_eq!(param_count(&max), 54_254);
        assert_eq!(param_count(&lp), 56_018);
        assert_eq!(param_count(&lp) - param_count(&max), 1_764);
        assert_eq!(counting_oracle(&max), 54_254);
        assert_eq!(counting_oracle(&lp), 56_018);
        let per_layer: Vec<usize> = max.iter().map(|l| l.param_count()).filter(|&n| n > 0).collect();
        assert_eq!(per_layer, [144, 3_192, 50_720, 198]);
        assert_eq!(LayerSpec::LatentPool { ph: 1, pw: 4, c: 12 }.param_count(), 588);
        assert_eq!(LayerSpec::LatentPool { ph: 1, pw: 2, c: 24 }.param_count(), 1_176);
        assert_eq!(LayerSpec::Dense { n_in: 32, n_out: 6 }.param_count(), 198);
    }

    #[test]
    fn derived_shape_chain() {
        for v in [Variant::CnnMax, Variant::CnnLp] {
            let shapes = shape_chain(INPUT_SHAPE, &architecture(v, GlobalPoolKind::Avg)).unwrap();
            let s: Vec<String> = shapes.iter().map(|s| s.to_string()).collect();
            assert_eq!(s[0], "(1,6,240,12)");
            assert_eq!(s[2], "(1,6,60,12)");
            assert_eq!(s[4], "(1,6,50,24)");
            assert_eq!(s[6], "(1,6,25,24)");
            assert_eq!(s[8], "(1,1,15,32)");
            assert_eq!(s[10], "(1,32)");
            assert_eq!(s[13], "(1,6)");
        }
    }

    #[test]
    fn mutated_chains_are_rejected() {
        let base = architecture(Variant::CnnLp, GlobalPoolKind::Avg);
        let mut bad = base.clone();
        bad[4] = LayerSpec::Conv2d { kh: 1, kw: 11, c_in: 13, c_out: 24 };
        assert!(shape_chain(INPUT_SHAPE, &bad).is_err());
        let mut bad = base.clone();
        bad[8] = LayerSpec::Conv2d { kh: 7, kw: 11, c_in: 24, c_out: 32 };
        assert!(shape_chain(INPUT_SHAPE, &bad).is_err());
        let mut bad = base.clone();
        bad[12] = LayerSpec::Dense { n_in: 31, n_out: 6 };
        assert!(shape_chain(INPUT_SHAPE, &bad).is_err());
        let mut bad = base.clone();
        bad.swap(10, 12);
        assert!(shape_chain(INPUT_SHAPE, &bad).is_err());
        let mut bad = base;
        bad[6] = LayerSpec::LatentPool { ph: 1, pw: 2, c: 12 };
        assert!(shape_chain(INPUT_SHAPE, &bad).is_err());
    }
}
