//! Loading either kind of trained model from disk.
//!
//! CNNs use the binary format in [`crate::model_file`]. Baselines are JSON
//! documents holding the serialized [`BaselineModel`]: `format_version`,
//! `kind`, the normalization statistics, the optional feature standardizer
//! and the classifier itself (tagged by `type`).

use std::fs;
use std::path::Path;

use morse_core::baselines::pipeline::{BaselineModel, BASELINE_FORMAT_VERSION};
use morse_core::nn::{predict_from_probs, Model, Prediction};
use morse_core::{GestureLabel, ImuWindow};

use crate::model_file::{from_bytes, is_model_file, ModelHeader};
use crate::{Error, Result};

pub fn baseline_to_json(model: &BaselineModel) -> Result<String> {
    serde_json::to_string(model).map_err(|e| Error::BadModel(e.to_string()))
}

pub fn baseline_from_json(text: &str) -> Result<BaselineModel> {
    #[derive(serde::Deserialize)]
    struct Version {
        format_version: u32,
    }
    let v: Version = serde_json::from_str(text).map_err(|e| Error::BadModel(format!("baseline: {e}")))?;
    if v.format_version != BASELINE_FORMAT_VERSION {
        return Err(Error::UnsupportedVersion { found: v.format_version, expected: BASELINE_FORMAT_VERSION });
    }
    let m: BaselineModel = serde_json::from_str(text).map_err(|e| Error::BadModel(format!("baseline: {e}")))?;
    m.check_version()?;
    Ok(m)
}

pub fn save_baseline(path: &Path, model: &BaselineModel) -> Result<()> {
    fs::write(path, baseline_to_json(model)?).map_err(|e| Error::io(path, e))
}

pub fn load_baseline(path: &Path) -> Result<BaselineModel> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    baseline_from_json(&text)
}

// One instance per process, so the size gap is harmless.
#[allow(clippy::large_enum_variant)]
pub enum AnyModel {
    Cnn { model: Model, header: ModelHeader },
    Baseline(BaselineModel),
}

impl AnyModel {
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        if is_model_file(&bytes) {
            let (model, header) = from_bytes(&bytes)?;
            return Ok(AnyModel::Cnn { model, header });
        }
        let text = std::str::from_utf8(&bytes).map_err(|_| Error::BadModel("neither MRSE1 binary nor JSON".into()))?;
        Ok(AnyModel::Baseline(baseline_from_json(text)?))
    }

    pub fn name(&self) -> String {
        match self {
            AnyModel::Cnn { model, .. } => model.spec().variant.map_or("cnn".into(), |v| v.tag().into()),
            AnyModel::Baseline(b) => b.kind.tag().into(),
        }
    }

    /// Label and confidence with the Random fallback below `threshold`.
    pub fn predict(&self, window: &ImuWindow, threshold: f64) -> Prediction {
        match self {
            AnyModel::Cnn { model, .. } => model.predict(window, threshold),
            AnyModel::Baseline(b) => {
                let (label, conf) = b.predict(window);
                let mut probs = [0.0; 6];
                probs[label.code()] = conf;
                // Only the winning class has a score, so a fallback reports 0.
                predict_from_probs(&GestureLabel::ALL, &probs, threshold)
            }
        }
    }

    pub fn predict_label(&self, window: &ImuWindow) -> GestureLabel {
        match self {
            AnyModel::Cnn { model, .. } => model.predict(window, 0.0).label,
            AnyModel::Baseline(b) => b.predict_label(window),
        }
    }
}
