//! Mini-batch training with early stopping on validation error.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::LabeledWindow;
use crate::math::{argmax, ln};
use crate::nn::Model;
use crate::norm::normalize;
use crate::optim::{adam_step, AdamConfig, AdamState};
use crate::window::{N_CHANNELS, WINDOW_LEN};
use crate::{Error, Result};

/// Default schedule, sized so a full single-core LOSO run of one CNN takes
/// minutes. The published schedule is kept as the `PAPER_*` constants.
pub const DESK_MIN_EPOCHS: usize = 10;
pub const DESK_PATIENCE: usize = 5;
pub const DESK_MAX_EPOCHS: usize = 20;
pub const PAPER_MIN_EPOCHS: usize = 2000;
pub const PAPER_PATIENCE: usize = 200;
pub const PAPER_MAX_EPOCHS: usize = 10_000;

const EVAL_BATCH: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Training never stops before this many epochs.
    pub min_epochs: usize,
    /// Epochs without validation improvement that end training.
    pub patience: usize,
    /// Samples per mini-batch; a value at least the training size gives full-batch descent.
    pub batch_size: usize,
    /// Seeds shuffling and dropout.
    pub seed: u64,
    pub max_epochs: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            min_epochs: DESK_MIN_EPOCHS,
            patience: DESK_PATIENCE,
            batch_size: 32,
            seed: 0,
            max_epochs: DESK_MAX_EPOCHS,
        }
    }
}

impl TrainConfig {
    pub fn paper(seed: u64) -> Self {
        TrainConfig {
            min_epochs: PAPER_MIN_EPOCHS,
            patience: PAPER_PATIENCE,
            max_epochs: PAPER_MAX_EPOCHS,
            seed,
            ..TrainConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidConfig(format!("training: {what}")));
        if self.patience == 0 {
            return bad("patience must be at least 1");
        }
        if self.batch_size == 0 {
            return bad("batch size must be at least 1");
        }
        if self.min_epochs == 0 || self.max_epochs < self.min_epochs {
            return bad("need 1 <= min_epochs <= max_epochs");
        }
        Ok(())
    }
}

/// Normalized inputs and class indices, ready for batching.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensors {
    pub x: Vec<f64>,
    pub y: Vec<usize>,
}

impl Tensors {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    fn sample(&self, i: usize) -> &[f64] {
        &self.x[i * SAMPLE_LEN..(i + 1) * SAMPLE_LEN]
    }
}

const SAMPLE_LEN: usize = N_CHANNELS * WINDOW_LEN;

/// Normalizes windows with the model's stored statistics and maps labels to
/// output indices.
pub fn tensorize<'a, I>(model: &Model, samples: I) -> Result<Tensors>
where
    I: IntoIterator<Item = &'a LabeledWindow>,
{
    let labels = &model.spec().labels;
    let norm = &model.spec().norm;
    let mut x = Vec::new();
    let mut y = Vec::new();
    for s in samples {
        let idx = labels
            .iter()
            .position(|&l| l == s.label)
            .ok_or_else(|| Error::UnknownLabel(format!("{} is not an output of the model", s.label)))?;
        x.extend_from_slice(normalize(&s.window, norm).as_slice());
        y.push(idx);
    }
    Ok(Tensors { x, y })
}

/// Eval-mode mean cross-entropy and accuracy.
pub fn evaluate(model: &Model, set: &Tensors) -> Result<(f64, f64)> {
    if set.is_empty() {
        return Err(Error::Empty("evaluation set is empty"));
    }
    let n_out = model.spec().labels.len();
    let mut loss = 0.0;
    let mut correct = 0usize;
    for (xb, yb) in set.x.chunks(EVAL_BATCH * SAMPLE_LEN).zip(set.y.chunks(EVAL_BATCH)) {
        let probs = model.forward_batch_normalized(xb)?;
        for (p, &t) in probs.chunks_exact(n_out).zip(yb) {
            loss -= ln(p[t].max(f64::MIN_POSITIVE));
            correct += usize::from(argmax(p) == t);
        }
    }
    let n = set.len() as f64;
    Ok((loss / n, correct as f64 / n))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    /// Accuracy of the training-mode (dropout on) predictions seen during the epoch.
    pub train_accuracy: f64,
    pub val_loss: f64,
    pub val_accuracy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    Patience,
    MaxEpochs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub epochs: Vec<EpochRecord>,
    /// 1-based epoch of the returned checkpoint.
    pub best_epoch: usize,
    pub best_val_accuracy: f64,
    pub best_val_loss: f64,
    pub stop: StopReason,
}

/// Owns a model under training together with its optimizer state.
pub struct Trainer {
    model: Model,
    adam: AdamConfig,
    state: AdamState,
    rng: ChaCha8Rng,
    batch_size: usize,
    grad: Vec<f64>,
    order: Vec<usize>,
    epoch: usize,
}

impl Trainer {
    pub fn new(model: Model, batch_size: usize, seed: u64, adam: AdamConfig) -> Result<Self> {
        adam.validate()?;
        if batch_size == 0 {
            return Err(Error::InvalidConfig("training: batch size must be at least 1".into()));
        }
        let n = model.param_count();
        Ok(Trainer {
            model,
            adam,
            state: AdamState::new(n),
            rng: ChaCha8Rng::seed_from_u64(seed),
            batch_size,
            grad: vec![0.0; n],
            order: Vec::new(),
            epoch: 0,
        })
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn into_model(self) -> Model {
        self.model
    }

    pub fn epochs_done(&self) -> usize {
        self.epoch
    }

    /// One shuffled pass over `set`. Returns the mean training loss and the
    /// training-mode accuracy.
    pub fn run_epoch(&mut self, set: &Tensors) -> Result<(f64, f64)> {
        if set.is_empty() {
            return Err(Error::Empty("training set is empty"));
        }
        self.epoch += 1;
        self.order.clear();
        self.order.extend(0..set.len());
        self.order.shuffle(&mut self.rng);
        let mut xb = Vec::with_capacity(self.batch_size * SAMPLE_LEN);
        let mut yb = Vec::with_capacity(self.batch_size);
        let mut total = 0.0;
        let mut correct = 0usize;
        for chunk in self.order.chunks(self.batch_size) {
            xb.clear();
            yb.clear();
            for &i in chunk {
                xb.extend_from_slice(set.sample(i));
                yb.push(set.y[i]);
            }
            self.grad.iter_mut().for_each(|g| *g = 0.0);
            let (loss, pred) = self.model.loss_and_grad(&xb, &yb, Some(&mut self.rng), &mut self.grad)?;
            if !loss.is_finite() {
                return Err(Error::Divergence { epoch: self.epoch });
            }
            total += loss;
            correct += pred.iter().zip(&yb).filter(|(p, t)| p == t).count();
            let scale = 1.0 / chunk.len() as f64;
            self.grad.iter_mut().for_each(|g| *g *= scale);
            adam_step(self.model.params_mut(), &self.grad, &mut self.state, &self.adam)?;
        }
        let n = set.len() as f64;
        Ok((total / n, correct as f64 / n))
    }
}

/// Trains until validation error has not improved for `patience` epochs
/// (but at least `min_epochs`, at most `max_epochs`) and returns the
/// parameters of the epoch with the lowest validation error. Ties on error
/// go to the lower validation loss, then to the earlier epoch.
pub fn train(
    model: Model,
    train_set: &Tensors,
    val_set: &Tensors,
    cfg: &TrainConfig,
    adam: &AdamConfig,
) -> Result<(Model, History)> {
    cfg.validate()?;
    if val_set.is_empty() {
        return Err(Error::Empty("validation set is empty"));
    }
    let mut trainer = Trainer::new(model, cfg.batch_size, cfg.seed, *adam)?;
    let mut epochs = Vec::new();
    let mut best: Option<(f64, f64, usize, Vec<f64>)> = None;
    let mut since_best = 0usize;
    let stop = loop {
        let (train_loss, train_accuracy) = trainer.run_epoch(train_set)?;
        let epoch = trainer.epochs_done();
        let (val_loss, val_accuracy) = evaluate(trainer.model(), val_set)?;
        if !val_loss.is_finite() {
            return Err(Error::Divergence { epoch });
        }
        epochs.push(EpochRecord { epoch, train_loss, train_accuracy, val_loss, val_accuracy });
        let improved = match &best {
            None => true,
            Some((acc, loss, _, _)) => val_accuracy > *acc || (val_accuracy == *acc && val_loss < *loss),
        };
        if improved {
            best = Some((val_accuracy, val_loss, epoch, trainer.model().params().to_vec()));
            since_best = 0;
        } else {
            since_best += 1;
        }
        if epoch >= cfg.min_epochs && since_best >= cfg.patience {
            break StopReason::Patience;
        }
        if epoch >= cfg.max_epochs {
            break StopReason::MaxEpochs;
        }
    };
    let (best_val_accuracy, best_val_loss, best_epoch, params) = best.expect("at least one epoch ran");
    let mut model = trainer.into_model();
    model.params_mut().copy_from_slice(&params);
    Ok((model, History { epochs, best_epoch, best_val_accuracy, best_val_loss, stop }))
}
