//! Minimal network engine for the recognizer: layer kernels with hand-written
//! gradients, static shape checking and a flat parameter store.

pub mod gradcheck;
mod model;
pub mod ops;
pub mod spec;

pub use model::{predict_from_probs, Model, ModelSpec, Prediction, Trace};
pub use spec::{architecture, param_count, shape_chain, GlobalPoolKind, LayerSpec, Shape, Variant, INPUT_SHAPE};
