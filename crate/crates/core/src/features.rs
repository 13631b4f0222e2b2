//! 42-dimensional time-domain feature vector: seven statistics for each of
//! the six motion channels.
//!
//! Layout is channel-major: for each channel in `[ax, ay, az, gx, gy, gz]`
//! the values `[mean, min, max, median, std, skewness, kurtosis]`. All
//! moments use the population (1/N) definition. Channels whose second
//! central moment is below `1e-12` report skewness and kurtosis as 0.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::math::{powf, sqrt};
use crate::window::{ImuWindow, N_CHANNELS};

pub const STATS_PER_CHANNEL: usize = 7;
pub const N_FEATURES: usize = STATS_PER_CHANNEL * N_CHANNELS;
pub const STAT_NAMES: [&str; STATS_PER_CHANNEL] = ["mean", "min", "max", "median", "std", "skewness", "kurtosis"];

const MIN_M2: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum KurtosisConvention {
    /// Fourth standardized moment minus 3 (normal distribution -> 0).
    #[default]
    Excess,
    /// Fourth standardized moment (normal distribution -> 3).
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector(pub [f64; N_FEATURES]);

impl FeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// The seven statistics of one channel.
    pub fn channel(&self, c: usize) -> &[f64] {
        &self.0[c * STATS_PER_CHANNEL..(c + 1) * STATS_PER_CHANNEL]
    }
}

/// Statistics of a single series, in feature order.
pub fn channel_stats(x: &[f64], kurtosis: KurtosisConvention) -> [f64; STATS_PER_CHANNEL] {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in x {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;

    let mut sorted: Vec<f64> = x.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let len = sorted.len();
    let median = if len.is_multiple_of(2) { 0.5 * (sorted[len / 2 - 1] + sorted[len / 2]) } else { sorted[len / 2] };

    let (skew, kurt) = if m2 < MIN_M2 {
        (0.0, 0.0)
    } else {
        let raw = m4 / (m2 * m2);
        let k = match kurtosis {
            KurtosisConvention::Excess => raw - 3.0,
            KurtosisConvention::Raw => raw,
        };
        (m3 / powf(m2, 1.5), k)
    };
    // Rounding can push the mean a hair outside [min, max] on near-constant data.
    let (lo, hi) = (sorted[0], sorted[len - 1]);
    [mean.clamp(lo, hi), lo, hi, median, sqrt(m2), skew, kurt]
}

pub fn extract_features(window: &ImuWindow) -> FeatureVector {
    extract_features_with(window, KurtosisConvention::Excess)
}

pub fn extract_features_with(window: &ImuWindow, kurtosis: KurtosisConvention) -> FeatureVector {
    let mut out = [0.0; N_FEATURES];
    for (c, ch) in window.channels().enumerate() {
        out[c * STATS_PER_CHANNEL..(c + 1) * STATS_PER_CHANNEL].copy_from_slice(&channel_stats(ch, kurtosis));
    }
    FeatureVector(out)
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use crate::window::WINDOW_LEN;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    /// Textbook statistics computed independently: powi-based moments,
    /// order statistics by selection of ranks.
    fn oracle(x: &[f64]) -> [f64; 7] {
        let n = x.len();
        let mean: f64 = x.iter().fold(0.0, |a, b| a + b) / n as f64;
        let moment = |k: i32| x.iter().map(|v| (v - mean).powi(k)).sum::<f64>() / n as f64;
        let (m2, m3, m4) = (moment(2), moment(3), moment(4));
        let rank = |r: usize| {
            // r-th smallest via counting
            *x.iter()
                .find(|&&v| {
                    let less = x.iter().filter(|&&w| w < v).count();
                    let leq = x.iter().filter(|&&w| w <= v).count();
                    less <= r && r < leq
                })
                .unwrap()
        };
        let median = if n.is_multiple_of(2) { (rank(n / 2 - 1) + rank(n / 2)) / 2.0 } else { rank(n / 2) };
        let min = x.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let (skew, kurt) = if m2 < 1e-12 { (0.0, 0.0) } else { (m3 / m2.sqrt().powi(3), m4 / m2.powi(2) - 3.0) };
        [mean, min, max, median, m2.sqrt(), skew, kurt]
    }

    fn window_of(ch: impl Fn(usize) -> [f64; WINDOW_LEN]) -> ImuWindow {
        ImuWindow::from_channels(core::array::from_fn(ch)).unwrap()
    }

    #[test]
    fn constant_channel() {
        let w = window_of(|c| [c as f64 - 2.5; WINDOW_LEN]);
        let f = extract_features(&w);
        for c in 0..6 {
            let v = c as f64 - 2.5;
            assert_eq!(f.channel(c), &[v, v, v, v, 0.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn tiled_one_to_four() {
        // 250 = 62 full tiles + [1, 2]; use a symmetric tiling instead so the
        // distribution really is {1,2,3,4} uniform plus a symmetric remainder.
        let mut x = [0.0; WINDOW_LEN];
        for (i, v) in x.iter_mut().enumerate().take(248) {
            *v = (i % 4 + 1) as f64;
        }
        x[248] = 2.0;
        x[249] = 3.0;
        let s = channel_stats(&x, KurtosisConvention::Excess);
        assert!((s[0] - 2.5).abs() < 1e-12);
        assert_eq!(s[3], 2.5);
        assert_eq!((s[1], s[2]), (1.0, 4.0));
        assert!(s[5].abs() < 1e-12);

        let pure = [1.0, 2.0, 3.0, 4.0];
        let p = channel_stats(&pure, KurtosisConvention::Excess);
        assert_eq!(p[0], 2.5);
        assert_eq!(p[3], 2.5);
        assert!((p[4] - 1.25f64.sqrt()).abs() < 1e-12);
        assert!((p[4] - 1.118034).abs() < 1e-6);
        assert_eq!(p[5], 0.0);
    }

    #[test]
    fn normal_excess_kurtosis_near_zero() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut total = 0.0;
        for _ in 0..100 {
            let x: Vec<f64> = (0..WINDOW_LEN).map(|_| StandardNormal.sample(&mut rng)).collect();
            total += channel_stats(&x, KurtosisConvention::Excess)[6];
        }
        assert!((total / 100.0).abs() < 0.5, "mean excess kurtosis {}", total / 100.0);
    }

    #[test]
    fn raw_convention_adds_three() {
        let x: Vec<f64> = (0..WINDOW_LEN).map(|i| ((i * i) % 17) as f64).collect();
        let e = channel_stats(&x, KurtosisConvention::Excess);
        let r = channel_stats(&x, KurtosisConvention::Raw);
        assert!((r[6] - e[6] - 3.0).abs() < 1e-12);
    }

    fn series() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-100.0f64..100.0, WINDOW_LEN)
    }

    proptest! {
        #[test]
        fn matches_oracle(x in series()) {
            let s = channel_stats(&x, KurtosisConvention::Excess);
            let o = oracle(&x);
            for k in 0..7 {
                prop_assert!((s[k] - o[k]).abs() <= 1e-10 * (1.0 + o[k].abs()), "stat {}: {} vs {}", k, s[k], o[k]);
            }
        }

        #[test]
        fn ordering_invariants(x in series()) {
            let s = channel_stats(&x, KurtosisConvention::Excess);
            prop_assert!(s[1] <= s[3] && s[3] <= s[2]);
            prop_assert!(s[1] <= s[0] && s[0] <= s[2]);
        }

        #[test]
        fn shift_invariance(x in series(), c in -50.0f64..50.0) {
            let a = channel_stats(&x, KurtosisConvention::Excess);
            let shifted: Vec<f64> = x.iter().map(|v| v + c).collect();
            let b = channel_stats(&shifted, KurtosisConvention::Excess);
            for k in 0..4 {
                prop_assert!((b[k] - (a[k] + c)).abs() < 1e-9);
            }
            for k in 4..7 {
                prop_assert!((b[k] - a[k]).abs() < 1e-9);
            }
        }

        #[test]
        fn scale_equivariance(x in series(), a in 0.1f64..10.0) {
            let s = channel_stats(&x, KurtosisConvention::Excess);
            let scaled: Vec<f64> = x.iter().map(|v| v * a).collect();
            let t = channel_stats(&scaled, KurtosisConvention::Excess);
            prop_assert!((t[4] - a * s[4]).abs() < 1e-9 * (1.0 + a * s[4]));
            prop_assert!((t[5] - s[5]).abs() < 1e-9);
            prop_assert!((t[6] - s[6]).abs() < 1e-9);
        }

        #[test]
        fn negation_flips_skew(x in series()) {
            let s = channel_stats(&x, KurtosisConvention::Excess);
            let neg: Vec<f64> = x.iter().map(|v| -v).collect();
            let t = channel_stats(&neg, KurtosisConvention::Excess);
            prop_assert!((t[5] + s[5]).abs() < 1e-12);
        }

        #[test]
        fn vector_is_channel_major(vals in prop::collection::vec(-5.0f64..5.0, 6 * WINDOW_LEN)) {
            let w = ImuWindow::from_vec(vals).unwrap();
            let f = extract_features(&w);
            prop_assert!(f.0.iter().all(|v| v.is_finite()));
            for c in 0..6 {
                prop_assert_eq!(f.channel(c), &channel_stats(w.channel(c), KurtosisConvention::Excess)[..]);
            }
        }
    }
}
