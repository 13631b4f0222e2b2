//! Classical classifiers over the 42 time-domain features.
//!
//! All models work on row-major feature matrices with class indices
//! `0..n_classes`; [`pipeline`] wires them to windows and gesture labels.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::math::sqrt;
use crate::{Error, Result};

pub mod knn;
pub mod lr;
pub mod pipeline;
pub mod tree;

pub use knn::KnnModel;
pub use lr::{LrConfig, LrModel};
pub use pipeline::{BaselineConfig, BaselineKind, BaselineLearner, BaselineModel};
pub use tree::{ForestConfig, ForestModel, TreeConfig, TreeModel};

/// Row-major samples with class indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSet {
    pub dim: usize,
    pub x: Vec<f64>,
    pub y: Vec<usize>,
}

impl FeatureSet {
    pub fn new(dim: usize, x: Vec<f64>, y: Vec<usize>) -> Result<Self> {
        if dim == 0 || x.len() != dim * y.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} values cannot hold {} rows of {} features",
                x.len(),
                y.len(),
                dim
            )));
        }
        if y.is_empty() {
            return Err(Error::Empty("feature set has no rows"));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("feature values must be finite".into()));
        }
        Ok(FeatureSet { dim, x, y })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.dim..(i + 1) * self.dim]
    }

    pub fn n_classes(&self) -> usize {
        self.y.iter().max().map_or(0, |m| m + 1)
    }
}

/// Per-feature z-score fitted on a training set. Constant features keep a
/// unit scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(set: &FeatureSet) -> Self {
        let n = set.len() as f64;
        let mut mean = alloc::vec![0.0; set.dim];
        for i in 0..set.len() {
            for (m, v) in mean.iter_mut().zip(set.row(i)) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = alloc::vec![0.0; set.dim];
        for i in 0..set.len() {
            for ((s, v), m) in var.iter_mut().zip(set.row(i)).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var.into_iter().map(|v| sqrt(v / n)).map(|s| if s < 1e-12 { 1.0 } else { s }).collect();
        Standardizer { mean, std }
    }

    pub fn apply_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter().zip(&self.mean).zip(&self.std).map(|((v, m), s)| (v - m) / s).collect()
    }

    pub fn apply(&self, set: &FeatureSet) -> FeatureSet {
        let x = (0..set.len()).flat_map(|i| self.apply_row(set.row(i))).collect();
        FeatureSet { dim: set.dim, x, y: set.y.clone() }
    }
}

/// Index of the largest count; ties go to the smallest index.
pub(crate) fn majority(counts: &[u32]) -> usize {
    let mut best = 0;
    for (k, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = k;
        }
    }
    best
}
