//! Std side of the MoRSE gesture pipeline: file formats, parallel
//! cross-validation, reports, latency benchmarks and the `morse` command.
//!
//! All computation lives in [`morse_core`], re-exported here as `core`.

pub mod artifact;
pub mod bench;
pub mod config;
pub mod csv_io;
mod error;
pub mod infer;
pub mod model_file;
pub mod report;

pub use error::{Error, Result};
pub use morse_core as core;

/// `--version` text; names the model file format it reads and writes.
pub const LONG_VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (model format 1)");
