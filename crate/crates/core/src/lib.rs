//! Core of the MoRSE arm-gesture pipeline.
//!
//! Everything here is pure computation over owned buffers and builds without
//! `std` (only `alloc` is required), so the recognizer, the Morse renderer and
//! the broadcast gating logic can be embedded on a watch-class target. File
//! formats, the command line and wall-clock benchmarking live in the `morse`
//! companion crate.
//!
//! ```text
//! IMU stream -> resample/slide (window) -> z-score (norm)
//!            -> CNN / CNN-lp (nn)           -> label + confidence
//!            -> 42 time-domain stats (features) -> LR / kNN / DT / RF (baselines)
//! label -> Morse code -> vibration timeline (morse)
//! label -> gating -> 10 s broadcast -> reception (mesh)
//! ```

#![cfg_attr(not(any(feature = "std", test)), no_std)]
// `!(x >= lo)` is the deliberate NaN-rejecting form of range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod baselines;
pub mod dataset;
mod error;
pub mod features;
pub mod gesture;
pub mod loso;
mod math;
pub mod mesh;
pub mod metrics;
pub mod morse;
pub mod nn;
pub mod norm;
pub mod optim;
pub mod seed;
pub mod synth;
pub mod train;
pub mod window;

pub use dataset::{Dataset, DatasetMeta, Hand, LabeledWindow};
pub use error::{Error, Result};
pub use gesture::GestureLabel;
pub use norm::NormStats;
pub use window::{ImuSample, ImuWindow};
