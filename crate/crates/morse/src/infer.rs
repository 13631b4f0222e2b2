//! Once-per-second recognition over a raw sample stream.

use morse_core::mesh::{Action, ScriptLine};
use morse_core::nn::Prediction;
use morse_core::window::sliding_windows;
use morse_core::ImuSample;

use crate::artifact::AnyModel;
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct Emission {
    pub t_ms: u64,
    pub prediction: Prediction,
}

impl Emission {
    /// `<t_ms> <label> <confidence>`.
    pub fn line(&self) -> String {
        format!("{} {} {:.4}", self.t_ms, self.prediction.label, self.prediction.confidence)
    }
}

/// One prediction per emitted window, in time order.
pub fn infer_stream(model: &AnyModel, stream: &[ImuSample], threshold: f64) -> Result<Vec<Emission>> {
    Ok(sliding_windows(stream)?
        .into_iter()
        .map(|(t_ms, w)| Emission { t_ms, prediction: model.predict(&w, threshold) })
        .collect())
}

/// Scenario lines that hand each recognized gesture to `node`; the
/// simulator's gating decides what is actually broadcast.
pub fn gesture_script(node: &str, emissions: &[Emission]) -> Vec<ScriptLine> {
    emissions
        .iter()
        .map(|e| ScriptLine {
            t_ms: e.t_ms,
            node: node.to_string(),
            action: Action::Gesture { label: e.prediction.label, confidence: e.prediction.confidence },
        })
        .collect()
}
