//! IMU samples, fixed-size classifier windows, and stream windowing.
//!
//! A window holds the six motion channels in the fixed order
//! `[ax, ay, az, gx, gy, gz]`, each resampled to 250 points spaced 20 ms
//! apart (50 Hz over 5 s). The last grid point coincides with the window end
//! time, so a window ending at `t` covers the instants `t - 4980, ..., t`.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const N_CHANNELS: usize = 6;
pub const WINDOW_LEN: usize = 250;
pub const SAMPLE_RATE_HZ: u64 = 50;
pub const SAMPLE_PERIOD_MS: u64 = 1000 / SAMPLE_RATE_HZ;
/// Nominal window duration.
pub const WINDOW_MS: u64 = 5000;
/// Time between the first and last grid point of a window.
pub const WINDOW_SPAN_MS: u64 = (WINDOW_LEN as u64 - 1) * SAMPLE_PERIOD_MS;
/// Streaming recognition runs once per second.
pub const STRIDE_MS: u64 = 1000;

pub const CHANNEL_NAMES: [&str; N_CHANNELS] = ["ax", "ay", "az", "gx", "gy", "gz"];

/// One reading of the accelerometer (m/s²) and gyroscope (rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImuSample {
    pub t_ms: u64,
    pub ax: f64,
    pub ay: f64,
    pub az: f64,
    pub gx: f64,
    pub gy: f64,
    pub gz: f64,
}

impl ImuSample {
    pub fn new(t_ms: u64, values: [f64; N_CHANNELS]) -> Self {
        let [ax, ay, az, gx, gy, gz] = values;
        ImuSample { t_ms, ax, ay, az, gx, gy, gz }
    }

    pub fn values(&self) -> [f64; N_CHANNELS] {
        [self.ax, self.ay, self.az, self.gx, self.gy, self.gz]
    }
}

/// A 6 × 250 block of motion data, channel-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImuWindow {
    data: Vec<f64>,
}

impl ImuWindow {
    pub fn zeros() -> Self {
        ImuWindow { data: vec![0.0; N_CHANNELS * WINDOW_LEN] }
    }

    /// Wraps channel-major data. Fails unless there are exactly 1500 finite values.
    pub fn from_vec(data: Vec<f64>) -> Result<Self> {
        if data.len() != N_CHANNELS * WINDOW_LEN {
            return Err(Error::ShapeMismatch(alloc::format!(
                "window needs {} values, got {}",
                N_CHANNELS * WINDOW_LEN,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::ShapeMismatch(alloc::format!(
                "non-finite value at channel {} index {}",
                i / WINDOW_LEN,
                i % WINDOW_LEN
            )));
        }
        Ok(ImuWindow { data })
    }

    pub fn from_channels(channels: [[f64; WINDOW_LEN]; N_CHANNELS]) -> Result<Self> {
        Self::from_vec(channels.iter().flatten().copied().collect())
    }

    #[inline]
    pub fn channel(&self, c: usize) -> &[f64] {
        &self.data[c * WINDOW_LEN..(c + 1) * WINDOW_LEN]
    }

    #[inline]
    pub fn channel_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.data[c * WINDOW_LEN..(c + 1) * WINDOW_LEN]
    }

    pub fn channels(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(WINDOW_LEN)
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }
}

fn check_monotonic(stream: &[ImuSample]) -> Result<()> {
    match stream.windows(2).position(|w| w[1].t_ms < w[0].t_ms) {
        Some(i) => Err(Error::NonMonotonic { index: i + 1 }),
        None => Ok(()),
    }
}

/// Linear interpolation of every channel onto the 250-point grid ending at
/// `end_ms`. Grid points outside the stream hold the nearest edge value.
fn resample_ending_at(stream: &[ImuSample], end_ms: u64) -> ImuWindow {
    let mut out = ImuWindow::zeros();
    let start = end_ms - WINDOW_SPAN_MS;
    // `hi` is the first sample strictly after the query time; queries ascend.
    let mut hi = 0usize;
    for k in 0..WINDOW_LEN {
        let tq = start + k as u64 * SAMPLE_PERIOD_MS;
        while hi < stream.len() && stream[hi].t_ms <= tq {
            hi += 1;
        }
        let values = if hi == 0 {
            stream[0].values()
        } else if hi == stream.len() {
            stream[hi - 1].values()
        } else {
            let (a, b) = (&stream[hi - 1], &stream[hi]);
            let frac = (tq - a.t_ms) as f64 / (b.t_ms - a.t_ms) as f64;
            let (va, vb) = (a.values(), b.values());
            core::array::from_fn(|c| va[c] + frac * (vb[c] - va[c]))
        };
        for (c, v) in values.into_iter().enumerate() {
            out.data[c * WINDOW_LEN + k] = v;
        }
    }
    out
}

/// Resample the most recent part of a stream onto a classifier window.
///
/// The stream must be time-ordered and span at least one full window grid
/// (4980 ms between first and last timestamp).
pub fn resample_to_window(stream: &[ImuSample]) -> Result<ImuWindow> {
    if stream.len() < 2 {
        return Err(Error::NotEnoughSamples { needed: 2, got: stream.len() });
    }
    check_monotonic(stream)?;
    let span_ms = stream[stream.len() - 1].t_ms - stream[0].t_ms;
    if span_ms < WINDOW_SPAN_MS {
        return Err(Error::TooShort { span_ms, needed_ms: WINDOW_SPAN_MS });
    }
    Ok(resample_ending_at(stream, stream[stream.len() - 1].t_ms))
}

/// Emission times of the once-per-second recognizer for a stream starting at
/// `t0` and ending at `t_end`: `t0 + 5000, t0 + 6000, ...` up to `t_end`.
pub fn emission_times(t0: u64, t_end: u64) -> impl Iterator<Item = u64> {
    let first = t0 + WINDOW_MS;
    let count = if t_end < first { 0 } else { (t_end - first) / STRIDE_MS + 1 };
    (0..count).map(move |k| first + k * STRIDE_MS)
}

/// Windows emitted once per second, each covering the trailing five seconds.
/// Returns `(end_ms, window)` pairs; a stream shorter than 5 s yields nothing.
pub fn sliding_windows(stream: &[ImuSample]) -> Result<Vec<(u64, ImuWindow)>> {
    check_monotonic(stream)?;
    let (Some(first), Some(last)) = (stream.first(), stream.last()) else {
        return Ok(Vec::new());
    };
    let mut out = Vec::new();
    let mut upto = 0usize;
    for end in emission_times(first.t_ms, last.t_ms) {
        // Only samples up to (and one past) the emission time may be used.
        while upto < stream.len() && stream[upto].t_ms <= end {
            upto += 1;
        }
        let visible = &stream[..(upto + 1).min(stream.len())];
        out.push((end, resample_ending_at(visible, end)));
    }
    Ok(out)
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn uniform_stream(duration_ms: u64, period_ms: u64, f: impl Fn(u64) -> [f64; 6]) -> Vec<ImuSample> {
        (0..=duration_ms / period_ms)
            .map(|k| {
                let t = k * period_ms;
                ImuSample::new(t, f(t))
            })
            .collect()
    }

    /// Straightforward per-point linear interpolation, searching the whole
    /// stream for every query.
    fn oracle_interp(stream: &[ImuSample], tq: f64, c: usize) -> f64 {
        let ts: Vec<f64> = stream.iter().map(|s| s.t_ms as f64).collect();
        let vs: Vec<f64> = stream.iter().map(|s| s.values()[c]).collect();
        if tq <= ts[0] {
            return if tq < ts[0] { vs[0] } else { vs[ts.iter().rposition(|&t| t == ts[0]).unwrap()] };
        }
        if tq >= ts[ts.len() - 1] {
            return vs[vs.len() - 1];
        }
        let mut i = 0;
        for j in 0..ts.len() {
            if ts[j] <= tq {
                i = j;
            }
        }
        let w = (tq - ts[i]) / (ts[i + 1] - ts[i]);
        vs[i] * (1.0 - w) + vs[i + 1] * w
    }

    #[test]
    fn constant_stream_gives_constant_window() {
        let s = uniform_stream(6000, 13, |_| [3.0; 6]);
        let w = resample_to_window(&s).unwrap();
        assert!(w.as_slice().iter().all(|&v| v == 3.0));
    }

    #[test]
    fn exact_grid_passes_through() {
        let s: Vec<_> = (0..250u64)
            .map(|k| ImuSample::new(k * 20, core::array::from_fn(|c| (k * 7 + c as u64) as f64 * 0.37)))
            .collect();
        let w = resample_to_window(&s).unwrap();
        for c in 0..6 {
            for k in 0..250 {
                assert_eq!(w.channel(c)[k], s[k].values()[c]);
            }
        }
    }

    #[test]
    fn ramp_at_100hz() {
        // ramp 0..1 over exactly one window span, sampled every 10 ms
        let s = uniform_stream(WINDOW_SPAN_MS, 10, |t| [t as f64 / WINDOW_SPAN_MS as f64; 6]);
        let w = resample_to_window(&s).unwrap();
        for c in 0..6 {
            for k in 0..250 {
                let tq = (k as u64 * 20) as f64;
                let expected = oracle_interp(&s, tq, c);
                assert!((w.channel(c)[k] - expected).abs() < 1e-12);
                assert!((w.channel(c)[k] - k as f64 / 249.0).abs() < 1e-12);
            }
        }
        assert_eq!(w.channel(0)[0], 0.0);
        assert!((w.channel(0)[249] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        let short = uniform_stream(4960, 20, |_| [0.0; 6]);
        assert!(matches!(resample_to_window(&short), Err(Error::TooShort { span_ms: 4960, .. })));
        let mut bad = uniform_stream(6000, 20, |_| [0.0; 6]);
        bad[10].t_ms = 5;
        assert_eq!(resample_to_window(&bad), Err(Error::NonMonotonic { index: 10 }));
        assert!(matches!(resample_to_window(&bad[..1]), Err(Error::NotEnoughSamples { .. })));
    }

    #[test]
    fn sliding_window_counts() {
        let five = uniform_stream(5000, 20, |_| [0.0; 6]);
        assert_eq!(sliding_windows(&five).unwrap().len(), 1);
        let nine = uniform_stream(9000, 20, |_| [0.0; 6]);
        let ends: Vec<u64> = sliding_windows(&nine).unwrap().iter().map(|(t, _)| *t).collect();
        assert_eq!(ends, [5000, 6000, 7000, 8000, 9000]);
        let short = uniform_stream(4900, 20, |_| [0.0; 6]);
        assert!(sliding_windows(&short).unwrap().is_empty());
        assert!(sliding_windows(&[]).unwrap().is_empty());
    }

    #[test]
    fn sliding_window_matches_truncated_resample() {
        let s = uniform_stream(8000, 10, |t| [(t as f64 * 0.01).sin(); 6]);
        for (end, w) in sliding_windows(&s).unwrap() {
            let upto: Vec<_> = s.iter().copied().filter(|x| x.t_ms <= end).collect();
            assert_eq!(w, resample_to_window(&upto).unwrap());
        }
    }

    fn random_stream() -> impl Strategy<Value = Vec<ImuSample>> {
        prop::collection::vec((0u64..60, prop::array::uniform6(-10.0f64..10.0)), 200..400).prop_map(|steps| {
            let mut t = 0;
            steps
                .into_iter()
                .map(|(dt, v)| {
                    t += dt;
                    ImuSample::new(t, v)
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn resample_matches_oracle(s in random_stream()) {
            let span = s.last().unwrap().t_ms - s[0].t_ms;
            prop_assume!(span >= WINDOW_SPAN_MS);
            let w = resample_to_window(&s).unwrap();
            let end = s.last().unwrap().t_ms;
            for c in 0..6 {
                for k in 0..WINDOW_LEN {
                    let tq = (end - WINDOW_SPAN_MS + k as u64 * 20) as f64;
                    prop_assert!((w.channel(c)[k] - oracle_interp(&s, tq, c)).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn sliding_count_formula(secs in 5u64..30) {
            let s = uniform_stream(secs * 1000, 20, |_| [1.0; 6]);
            prop_assert_eq!(sliding_windows(&s).unwrap().len() as u64, secs - 5 + 1);
        }
    }
}
