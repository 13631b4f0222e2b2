use std::io;
use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{0}")]
    Stream(#[from] io::Error),
    #[error("{0}")]
    SchemaMismatch(String),
    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },
    #[error("{0}")]
    BadModel(String),
    #[error("unsupported format version {found} (expected {expected})")]
    UnsupportedVersion { found: u32, expected: u32 },
    #[error("benchmark needs at least one window")]
    EmptyBenchmark,
    #[error(transparent)]
    Core(#[from] morse_core::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Process exit status: 2 usage, 3 I/O, 4 validation or format, 5 divergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 2,
            Error::Io { .. } | Error::Stream(_) => 3,
            Error::Core(morse_core::Error::Divergence { .. }) => 5,
            _ => 4,
        }
    }

    /// Short machine-readable tag printed before the message.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Usage(_) => "usage",
            Error::Io { .. } | Error::Stream(_) => "io",
            Error::SchemaMismatch(_) => "schema_mismatch",
            Error::Parse { .. } => "parse",
            Error::BadModel(_) => "bad_model",
            Error::UnsupportedVersion { .. } => "unsupported_version",
            Error::EmptyBenchmark => "empty_benchmark",
            Error::Core(morse_core::Error::Divergence { .. }) => "divergence",
            Error::Core(_) => "invalid",
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        let line = e.position().map(|p| p.line()).unwrap_or(0);
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Stream(io),
            csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
                Error::SchemaMismatch(format!("line {line}: expected {expected_len} fields, found {len}"))
            }
            other => Error::Parse { line, msg: format!("{other:?}") },
        }
    }
}
