//! Multinomial logistic (softmax) regression trained with Adam.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::FeatureSet;
use crate::math::{argmax, dot};
use crate::nn::ops::softmax_cross_entropy;
use crate::optim::{adam_step, AdamConfig, AdamState};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    pub seed: u64,
}

impl Default for LrConfig {
    fn default() -> Self {
        LrConfig { epochs: 100, batch_size: 32, adam: AdamConfig { lr: 0.01, ..AdamConfig::default() }, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrModel {
    pub dim: usize,
    pub n_classes: usize,
    /// `[class][feature]`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl LrModel {
    pub fn zeros(dim: usize, n_classes: usize) -> Self {
        LrModel { dim, n_classes, weights: vec![0.0; dim * n_classes], bias: vec![0.0; n_classes] }
    }

    fn params(&self) -> Vec<f64> {
        let mut p = self.weights.clone();
        p.extend_from_slice(&self.bias);
        p
    }

    fn set_params(&mut self, p: &[f64]) {
        let (w, b) = p.split_at(self.weights.len());
        self.weights.copy_from_slice(w);
        self.bias.copy_from_slice(b);
    }

    pub fn logits(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n_classes).map(|k| self.bias[k] + dot(&self.weights[k * self.dim..(k + 1) * self.dim], x)).collect()
    }

    pub fn probs(&self, x: &[f64]) -> Vec<f64> {
        crate::nn::ops::softmax(&self.logits(x))
    }

    /// Most probable class and its probability.
    pub fn predict(&self, x: &[f64]) -> (usize, f64) {
        let p = self.probs(x);
        let k = argmax(&p);
        (k, p[k])
    }

    /// Mean cross-entropy over `rows` and its gradient, laid out as all
    /// weights then all biases.
    pub fn loss_and_grad(&self, set: &FeatureSet, rows: &[usize]) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; self.weights.len() + self.bias.len()];
        let mut loss = 0.0;
        let (gw, gb) = grad.split_at_mut(self.weights.len());
        for &i in rows {
            let x = set.row(i);
            let (l, d) = softmax_cross_entropy(&self.logits(x), set.y[i]);
            loss += l;
            for (k, dk) in d.iter().enumerate() {
                gb[k] += dk;
                for (g, xv) in gw[k * self.dim..(k + 1) * self.dim].iter_mut().zip(x) {
                    *g += dk * xv;
                }
            }
        }
        let n = rows.len().max(1) as f64;
        grad.iter_mut().for_each(|g| *g /= n);
        (loss / n, grad)
    }
}

/// Mini-batch Adam from zero weights with seeded shuffling.
pub fn lr_train(set: &FeatureSet, n_classes: usize, cfg: &LrConfig) -> Result<LrModel> {
    cfg.adam.validate()?;
    if cfg.batch_size == 0 || cfg.epochs == 0 {
        return Err(Error::InvalidConfig("logistic regression needs epochs >= 1 and batch size >= 1".into()));
    }
    if set.n_classes() > n_classes {
        return Err(Error::InvalidConfig(format!("labels exceed {n_classes} classes")));
    }
    let mut model = LrModel::zeros(set.dim, n_classes);
    let mut params = model.params();
    let mut state = AdamState::new(params.len());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..set.len()).collect();
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            let (loss, grad) = model.loss_and_grad(set, batch);
            if !loss.is_finite() {
                return Err(Error::Divergence { epoch });
            }
            adam_step(&mut params, &grad, &mut state, &cfg.adam)?;
            model.set_params(&params);
        }
    }
    Ok(model)
}
