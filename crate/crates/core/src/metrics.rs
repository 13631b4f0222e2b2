//! Confusion matrices, per-class scores and the false-positive projection.

use alloc::format;

use serde::{Deserialize, Serialize};

use crate::gesture::{GestureLabel, N_CLASSES};
use crate::{Error, Result};

/// One window per second of streaming.
pub const WINDOWS_PER_HOUR: f64 = 3600.0;

/// Counts indexed `[truth][predicted]` by label code.
pub type Confusion = [[u64; N_CLASSES]; N_CLASSES];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub confusion: Confusion,
    pub accuracy: f64,
    pub precision: [f64; N_CLASSES],
    pub recall: [f64; N_CLASSES],
    pub f1: [f64; N_CLASSES],
    /// Mean F1 over classes with at least one true or predicted sample.
    pub macro_f1: f64,
    pub support: [u64; N_CLASSES],
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl Metrics {
    /// Precision and recall with a zero denominator count as 0. A class that
    /// never occurs and is never predicted gets F1 = 1 and is left out of
    /// the macro average.
    pub fn from_confusion(confusion: Confusion) -> Result<Self> {
        let total: u64 = confusion.iter().flatten().sum();
        if total == 0 {
            return Err(Error::Empty("no predictions to score"));
        }
        let mut precision = [0.0; N_CLASSES];
        let mut recall = [0.0; N_CLASSES];
        let mut f1 = [0.0; N_CLASSES];
        let mut support = [0u64; N_CLASSES];
        let mut macro_sum = 0.0;
        let mut macro_n = 0usize;
        for k in 0..N_CLASSES {
            let tp = confusion[k][k];
            let truth: u64 = confusion[k].iter().sum();
            let predicted: u64 = confusion.iter().map(|row| row[k]).sum();
            support[k] = truth;
            precision[k] = ratio(tp, predicted);
            recall[k] = ratio(tp, truth);
            if truth == 0 && predicted == 0 {
                f1[k] = 1.0;
                continue;
            }
            f1[k] = ratio(2 * tp, truth + predicted);
            macro_sum += f1[k];
            macro_n += 1;
        }
        let trace: u64 = (0..N_CLASSES).map(|k| confusion[k][k]).sum();
        Ok(Metrics {
            confusion,
            accuracy: ratio(trace, total),
            precision,
            recall,
            f1,
            macro_f1: macro_sum / macro_n as f64,
            support,
        })
    }

    pub fn total(&self) -> u64 {
        self.support.iter().sum()
    }

    /// Share of true-Random windows predicted as any signal, if any exist.
    pub fn random_to_signal_rate(&self) -> Option<f64> {
        let row = &self.confusion[GestureLabel::Random.code()];
        let n: u64 = row.iter().sum();
        (n > 0).then(|| ratio(n - row[GestureLabel::Random.code()], n))
    }
}

pub fn confusion_matrix(truth: &[GestureLabel], predicted: &[GestureLabel]) -> Result<Confusion> {
    if truth.len() != predicted.len() {
        return Err(Error::ShapeMismatch(format!("{} true labels but {} predictions", truth.len(), predicted.len())));
    }
    let mut c = [[0u64; N_CLASSES]; N_CLASSES];
    for (t, p) in truth.iter().zip(predicted) {
        c[t.code()][p.code()] += 1;
    }
    Ok(c)
}

pub fn confusion_and_f1(truth: &[GestureLabel], predicted: &[GestureLabel]) -> Result<Metrics> {
    Metrics::from_confusion(confusion_matrix(truth, predicted)?)
}

pub fn add_confusion(acc: &mut Confusion, other: &Confusion) {
    for (ra, rb) in acc.iter_mut().zip(other) {
        for (a, b) in ra.iter_mut().zip(rb) {
            *a += b;
        }
    }
}

/// Expected false alarms per hour: Random→signal rate × windows per hour.
/// A confusion without Random samples projects 0.
pub fn project_false_positives(metrics: &Metrics, windows_per_hour: f64) -> f64 {
    fp_per_hour(metrics.random_to_signal_rate().unwrap_or(0.0), windows_per_hour)
}

pub fn fp_per_hour(random_to_signal_rate: f64, windows_per_hour: f64) -> f64 {
    random_to_signal_rate * windows_per_hour
}

/// Mean and population standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
    (m, crate::math::sqrt(v))
}
