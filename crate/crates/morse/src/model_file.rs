//! Binary CNN model files.
//!
//! Layout, all little-endian:
//!
//! ```text
//! b"MRSE1\n" | u32 header length | UTF-8 JSON header | f32 parameters
//! ```
//!
//! Parameters follow the layer order of the header. Each trainable layer
//! contributes its weights (`[c_out][c_in][kh][kw]` for convolutions and
//! latent pools, `[n_out][n_in]` for dense layers) and then its bias.

use std::fs;
use std::path::Path;

use morse_core::nn::{LayerSpec, Model, ModelSpec, Shape, Variant};
use morse_core::train::History;
use morse_core::{GestureLabel, NormStats};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const MAGIC: &[u8; 6] = b"MRSE1\n";
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerEntry {
    pub layer: LayerSpec,
    pub output: Shape,
    pub params: usize,
}

/// Outcome of the training run that produced the weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSummary {
    pub epochs_run: usize,
    pub best_epoch: usize,
    pub best_val_accuracy: f64,
    pub best_val_loss: f64,
    pub train_subjects: Vec<u32>,
    pub val_subjects: Vec<u32>,
    pub seed: u64,
}

impl TrainingSummary {
    pub fn from_history(h: &History, train_subjects: Vec<u32>, val_subjects: Vec<u32>, seed: u64) -> Self {
        TrainingSummary {
            epochs_run: h.epochs.len(),
            best_epoch: h.best_epoch,
            best_val_accuracy: h.best_val_accuracy,
            best_val_loss: h.best_val_loss,
            train_subjects,
            val_subjects,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelHeader {
    pub format_version: u32,
    pub variant: Option<Variant>,
    pub input: Shape,
    pub layers: Vec<LayerEntry>,
    pub labels: Vec<GestureLabel>,
    pub norm: NormStats,
    pub init_seed: u64,
    pub param_count: usize,
    pub training: Option<TrainingSummary>,
}

impl ModelHeader {
    pub fn describe(model: &Model, training: Option<TrainingSummary>) -> Self {
        let spec = model.spec();
        let layers = spec
            .layers
            .iter()
            .zip(model.shapes())
            .map(|(l, s)| LayerEntry { layer: *l, output: *s, params: l.param_count() })
            .collect();
        ModelHeader {
            format_version: MODEL_FORMAT_VERSION,
            variant: spec.variant,
            input: spec.input,
            layers,
            labels: spec.labels.clone(),
            norm: spec.norm,
            init_seed: spec.init_seed,
            param_count: model.param_count(),
            training,
        }
    }

    pub fn spec(&self) -> ModelSpec {
        ModelSpec {
            input: self.input,
            layers: self.layers.iter().map(|e| e.layer).collect(),
            labels: self.labels.clone(),
            norm: self.norm,
            variant: self.variant,
            init_seed: self.init_seed,
        }
    }
}

pub fn to_bytes(model: &Model, training: Option<TrainingSummary>) -> Result<Vec<u8>> {
    let header = ModelHeader::describe(model, training);
    let json = serde_json::to_vec(&header).map_err(|e| Error::BadModel(e.to_string()))?;
    let len = u32::try_from(json.len()).map_err(|_| Error::BadModel("header too large".into()))?;
    let mut out = Vec::with_capacity(MAGIC.len() + 4 + json.len() + 4 * model.param_count());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&len.to_le_bytes());
    out.extend_from_slice(&json);
    for &p in model.params() {
        out.extend_from_slice(&(p as f32).to_le_bytes());
    }
    Ok(out)
}

pub fn is_model_file(bytes: &[u8]) -> bool {
    bytes.starts_with(MAGIC)
}

pub fn from_bytes(bytes: &[u8]) -> Result<(Model, ModelHeader)> {
    if !is_model_file(bytes) {
        return Err(Error::BadModel("missing MRSE1 magic".into()));
    }
    let rest = &bytes[MAGIC.len()..];
    let len_bytes: [u8; 4] = rest
        .get(..4)
        .and_then(|b| b.try_into().ok())
        .ok_or_else(|| Error::BadModel("truncated header length".into()))?;
    let len = u32::from_le_bytes(len_bytes) as usize;
    let json = rest.get(4..4 + len).ok_or_else(|| Error::BadModel("truncated header".into()))?;

    // Check the version before the full schema so newer files fail cleanly.
    #[derive(Deserialize)]
    struct Version {
        format_version: u32,
    }
    let v: Version = serde_json::from_slice(json).map_err(|e| Error::BadModel(format!("header: {e}")))?;
    if v.format_version != MODEL_FORMAT_VERSION {
        return Err(Error::UnsupportedVersion { found: v.format_version, expected: MODEL_FORMAT_VERSION });
    }
    let header: ModelHeader = serde_json::from_slice(json).map_err(|e| Error::BadModel(format!("header: {e}")))?;

    let body = &rest[4 + len..];
    let spec = header.spec();
    let n = spec.param_count();
    if header.param_count != n {
        return Err(Error::BadModel(format!("header claims {} parameters, layers hold {n}", header.param_count)));
    }
    if body.len() != 4 * n {
        return Err(Error::BadModel(format!("expected {} parameter bytes, found {}", 4 * n, body.len())));
    }
    let params = body.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64).collect();
    let model = Model::with_params(spec, params)?;
    Ok((model, header))
}

pub fn save_model(path: &Path, model: &Model, training: Option<TrainingSummary>) -> Result<()> {
    fs::write(path, to_bytes(model, training)?).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<(Model, ModelHeader)> {
    from_bytes(&fs::read(path).map_err(|e| Error::io(path, e))?)
}
