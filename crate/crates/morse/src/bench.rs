//! Wall-clock latency of single-window inference.

use std::time::Instant;

use morse_core::ImuWindow;
use serde::Serialize;

use crate::{Error, Result};

/// Reported watch latency, kept next to desk numbers for context only.
pub const PAPER_WATCH_MS: f64 = 68.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatencyStats {
    pub n: usize,
    pub mean_ms: f64,
    /// Nearest-rank 95th percentile.
    pub p95_ms: f64,
    pub min_ms: f64,
    pub max_ms: f64,
    pub paper_watch_ms: f64,
}

impl LatencyStats {
    pub fn from_samples(mut ms: Vec<f64>) -> Result<Self> {
        if ms.is_empty() {
            return Err(Error::EmptyBenchmark);
        }
        ms.sort_by(f64::total_cmp);
        let n = ms.len();
        let rank = ((0.95 * n as f64).ceil() as usize).clamp(1, n);
        Ok(LatencyStats {
            n,
            mean_ms: ms.iter().sum::<f64>() / n as f64,
            p95_ms: ms[rank - 1],
            min_ms: ms[0],
            max_ms: ms[n - 1],
            paper_watch_ms: PAPER_WATCH_MS,
        })
    }
}

/// Times `infer` once per window, after one untimed warm-up call.
pub fn benchmark_inference<T>(windows: &[ImuWindow], mut infer: impl FnMut(&ImuWindow) -> T) -> Result<LatencyStats> {
    let first = windows.first().ok_or(Error::EmptyBenchmark)?;
    std::hint::black_box(infer(first));
    let ms = windows
        .iter()
        .map(|w| {
            let t = Instant::now();
            std::hint::black_box(infer(w));
            t.elapsed().as_secs_f64() * 1e3
        })
        .collect();
    LatencyStats::from_samples(ms)
}
