//! Per-channel z-score normalization with statistics frozen on a training split.

use serde::{Deserialize, Serialize};

use crate::math::sqrt;
use crate::window::{ImuWindow, N_CHANNELS, WINDOW_LEN};
use crate::{Error, Result};

/// Channels whose standard deviation falls below this are rejected.
pub const MIN_STD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub mean: [f64; N_CHANNELS],
    pub std: [f64; N_CHANNELS],
}

impl NormStats {
    /// Statistics that leave windows unchanged.
    pub const IDENTITY: NormStats = NormStats { mean: [0.0; N_CHANNELS], std: [1.0; N_CHANNELS] };

    pub fn validate(&self) -> Result<()> {
        for c in 0..N_CHANNELS {
            if !(self.std[c] >= MIN_STD) || !self.mean[c].is_finite() || !self.std[c].is_finite() {
                return Err(Error::DegenerateChannel { channel: c });
            }
        }
        Ok(())
    }
}

/// Pooled per-channel mean and population standard deviation over every
/// sample and timestep of the given windows.
pub fn compute_norm_stats<'a, I>(windows: I) -> Result<NormStats>
where
    I: IntoIterator<Item = &'a ImuWindow>,
    I::IntoIter: Clone,
{
    let iter = windows.into_iter();
    let mut n = 0usize;
    let mut sum = [0.0; N_CHANNELS];
    for w in iter.clone() {
        n += 1;
        for (c, ch) in w.channels().enumerate() {
            sum[c] += ch.iter().sum::<f64>();
        }
    }
    if n == 0 {
        return Err(Error::Empty("no training windows for normalization statistics"));
    }
    let count = (n * WINDOW_LEN) as f64;
    let mean = sum.map(|s| s / count);
    let mut sq = [0.0; N_CHANNELS];
    for w in iter {
        for (c, ch) in w.channels().enumerate() {
            sq[c] += ch.iter().map(|v| (v - mean[c]) * (v - mean[c])).sum::<f64>();
        }
    }
    let std = sq.map(|s| sqrt(s / count));
    let stats = NormStats { mean, std };
    stats.validate()?;
    Ok(stats)
}

/// `(x - mean[c]) / std[c]` for every value of channel `c`.
pub fn normalize(window: &ImuWindow, stats: &NormStats) -> ImuWindow {
    let mut out = window.clone();
    normalize_in_place(&mut out, stats);
    out
}

pub fn normalize_in_place(window: &mut ImuWindow, stats: &NormStats) {
    for c in 0..N_CHANNELS {
        let (m, s) = (stats.mean[c], stats.std[c]);
        for v in window.channel_mut(c) {
            *v = (*v - m) / s;
        }
    }
}
