//! Exhaustive k-nearest-neighbour vote under the Euclidean metric.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::FeatureSet;
use crate::math::sqrt;
use crate::{Error, Result};

pub const DEFAULT_K: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub n_classes: usize,
    pub train: FeatureSet,
}

impl KnnModel {
    pub fn new(k: usize, n_classes: usize, train: FeatureSet) -> Result<Self> {
        if k == 0 || k > train.len() {
            return Err(Error::InvalidConfig(format!("k = {k} needs 1 <= k <= {}", train.len())));
        }
        if train.n_classes() > n_classes {
            return Err(Error::InvalidConfig(format!("labels exceed {n_classes} classes")));
        }
        Ok(KnnModel { k, n_classes, train })
    }

    /// The `k` nearest training rows as (distance, index), nearest first.
    /// Equal distances are ordered by training index.
    pub fn neighbours(&self, q: &[f64]) -> Vec<(f64, usize)> {
        let mut d: Vec<(f64, usize)> = (0..self.train.len())
            .map(|i| {
                let s: f64 = self.train.row(i).iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
                (sqrt(s), i)
            })
            .collect();
        let order = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        d.select_nth_unstable_by(self.k - 1, order);
        d.truncate(self.k);
        d.sort_unstable_by(order);
        d
    }

    /// Majority label among the `k` nearest rows and its vote count. Vote
    /// ties go to the label with the smaller summed distance, then to the
    /// smaller label.
    pub fn vote(&self, q: &[f64]) -> (usize, u32) {
        let mut votes = vec![0u32; self.n_classes];
        let mut dist = vec![0.0f64; self.n_classes];
        for (di, i) in self.neighbours(q) {
            let y = self.train.y[i];
            votes[y] += 1;
            dist[y] += di;
        }
        let mut best = 0;
        for c in 1..self.n_classes {
            if votes[c] > votes[best] || (votes[c] == votes[best] && dist[c] < dist[best]) {
                best = c;
            }
        }
        (best, votes[best])
    }

    pub fn predict(&self, q: &[f64]) -> usize {
        self.vote(q).0
    }
}
