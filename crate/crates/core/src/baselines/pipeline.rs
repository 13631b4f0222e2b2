//! Baseline classifiers over windows: normalize → features → (standardize) → model.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::knn::DEFAULT_K;
use super::lr::lr_train;
use super::tree::{dt_train, rf_train};
use super::{FeatureSet, ForestConfig, ForestModel, KnnModel, LrConfig, LrModel, Standardizer, TreeConfig, TreeModel};
use crate::dataset::LabeledWindow;
use crate::features::extract_features;
use crate::gesture::{GestureLabel, N_CLASSES};
use crate::loso::{FitOutcome, Learner, Split};
use crate::norm::{normalize, NormStats};
use crate::seed::derive;
use crate::window::ImuWindow;
use crate::{Error, Result};

/// Version of the JSON baseline model schema.
pub const BASELINE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineKind {
    Lr,
    Knn,
    Dt,
    Rf,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 4] = [BaselineKind::Lr, BaselineKind::Knn, BaselineKind::Dt, BaselineKind::Rf];

    pub fn tag(self) -> &'static str {
        match self {
            BaselineKind::Lr => "lr",
            BaselineKind::Knn => "knn",
            BaselineKind::Dt => "dt",
            BaselineKind::Rf => "rf",
        }
    }

    pub fn from_tag(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.tag() == s)
    }

    /// Whether features are z-scored before the classifier.
    pub fn standardizes(self) -> bool {
        matches!(self, BaselineKind::Lr | BaselineKind::Knn)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub kind: BaselineKind,
    pub k: usize,
    pub lr: LrConfig,
    pub tree: TreeConfig,
    pub forest: ForestConfig,
}

impl BaselineConfig {
    pub fn new(kind: BaselineKind) -> Self {
        BaselineConfig {
            kind,
            k: DEFAULT_K,
            lr: LrConfig::default(),
            tree: TreeConfig::default(),
            forest: ForestConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Classifier {
    Lr(LrModel),
    Knn(KnnModel),
    Dt(TreeModel),
    Rf(ForestModel),
}

/// A fitted baseline with everything needed to classify raw windows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineModel {
    pub format_version: u32,
    pub kind: BaselineKind,
    /// Window z-score statistics of the training split.
    pub norm: NormStats,
    pub standardizer: Option<Standardizer>,
    pub classifier: Classifier,
}

/// Features of normalized windows, labelled by gesture code.
pub fn window_features<'a, I>(samples: I, norm: &NormStats) -> Result<FeatureSet>
where
    I: IntoIterator<Item = &'a LabeledWindow>,
{
    let mut x = Vec::new();
    let mut y = Vec::new();
    for s in samples {
        x.extend_from_slice(extract_features(&normalize(&s.window, norm)).as_slice());
        y.push(s.label.code());
    }
    FeatureSet::new(crate::features::N_FEATURES, x, y)
}

fn share(count: u32, total: u32) -> f64 {
    if total == 0 {
        0.0
    } else {
        count as f64 / total as f64
    }
}

impl BaselineModel {
    pub fn fit(cfg: &BaselineConfig, train: &[&LabeledWindow], norm: NormStats, seed: u64) -> Result<Self> {
        norm.validate()?;
        let raw = window_features(train.iter().copied(), &norm)?;
        let standardizer = cfg.kind.standardizes().then(|| Standardizer::fit(&raw));
        let set = match &standardizer {
            Some(s) => s.apply(&raw),
            None => raw,
        };
        let classifier = match cfg.kind {
            BaselineKind::Lr => {
                Classifier::Lr(lr_train(&set, N_CLASSES, &LrConfig { seed: derive(seed, &[2]), ..cfg.lr })?)
            }
            BaselineKind::Knn => Classifier::Knn(KnnModel::new(cfg.k, N_CLASSES, set)?),
            BaselineKind::Dt => Classifier::Dt(dt_train(&set, N_CLASSES, &cfg.tree, derive(seed, &[3]))?),
            BaselineKind::Rf => {
                Classifier::Rf(rf_train(&set, N_CLASSES, &ForestConfig { seed: derive(seed, &[4]), ..cfg.forest })?)
            }
        };
        Ok(BaselineModel { format_version: BASELINE_FORMAT_VERSION, kind: cfg.kind, norm, standardizer, classifier })
    }

    pub fn check_version(&self) -> Result<()> {
        if self.format_version != BASELINE_FORMAT_VERSION {
            return Err(Error::InvalidConfig(alloc::format!(
                "unsupported baseline model format version {}",
                self.format_version
            )));
        }
        Ok(())
    }

    /// The classifier's input for a raw window.
    pub fn features(&self, window: &ImuWindow) -> Vec<f64> {
        let f = extract_features(&normalize(window, &self.norm));
        match &self.standardizer {
            Some(s) => s.apply_row(f.as_slice()),
            None => f.as_slice().to_vec(),
        }
    }

    /// Label and a confidence in [0, 1]: the class probability for LR and
    /// the vote share otherwise.
    pub fn predict(&self, window: &ImuWindow) -> (GestureLabel, f64) {
        let x = self.features(window);
        let (code, conf) = match &self.classifier {
            Classifier::Lr(m) => m.predict(&x),
            Classifier::Knn(m) => {
                let (c, v) = m.vote(&x);
                (c, v as f64 / m.k as f64)
            }
            Classifier::Dt(t) => {
                let leaf = t.leaf(&x);
                let c = super::majority(leaf);
                (c, share(leaf[c], leaf.iter().sum()))
            }
            Classifier::Rf(f) => {
                let v = f.votes(&x);
                let c = super::majority(&v);
                (c, share(v[c], v.iter().sum()))
            }
        };
        (GestureLabel::ALL[code], conf)
    }

    pub fn predict_label(&self, window: &ImuWindow) -> GestureLabel {
        let x = self.features(window);
        let code = match &self.classifier {
            Classifier::Lr(m) => m.predict(&x).0,
            Classifier::Knn(m) => m.predict(&x),
            Classifier::Dt(t) => t.predict(&x),
            Classifier::Rf(f) => f.predict(&x),
        };
        GestureLabel::ALL[code]
    }
}

/// Cross-validation adapter. The validation subject is not used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineLearner {
    pub cfg: BaselineConfig,
}

impl Learner for BaselineLearner {
    fn name(&self) -> String {
        String::from(self.cfg.kind.tag())
    }

    fn fit_predict(&self, split: &Split<'_>, seed: u64) -> Result<FitOutcome> {
        let model = BaselineModel::fit(&self.cfg, &split.train, split.norm, seed)?;
        Ok(FitOutcome {
            predictions: split.test.iter().map(|s| model.predict_label(&s.window)).collect(),
            best_epoch: None,
            epochs_run: None,
        })
    }
}
