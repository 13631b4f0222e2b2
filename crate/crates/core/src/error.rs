use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("stream too short: spans {span_ms} ms, need at least {needed_ms} ms")]
    TooShort { span_ms: u64, needed_ms: u64 },
    #[error("timestamps decrease at sample {index}")]
    NonMonotonic { index: usize },
    #[error("need at least {needed} samples, got {got}")]
    NotEnoughSamples { needed: usize, got: usize },
    #[error("channel {channel} has zero variance")]
    DegenerateChannel { channel: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("training diverged at epoch {epoch} (non-finite loss)")]
    Divergence { epoch: usize },
    #[error("cross-validation needs at least {needed} distinct subjects, found {found}")]
    InsufficientSubjects { needed: usize, found: usize },
    #[error("the Random class has no Morse code")]
    NoCodeForRandom,
    #[error("empty Morse code")]
    EmptyCode,
    #[error("malformed Morse code: {0}")]
    MalformedCode(String),
    #[error("malformed timeline: {0}")]
    MalformedTimeline(String),
    #[error("transmission gating violated: {0}")]
    GatingViolation(String),
    #[error("scenario line {line}: {msg}")]
    MalformedScript { line: usize, msg: String },
    #[error("unknown gesture label {0:?}")]
    UnknownLabel(String),
}
