use std::path::PathBuf;

/// Everything that can go wrong inside the harness.
///
/// Variants map one-to-one onto the failure classes the harness reports:
/// validation of inputs, split/regime construction, metrics, the wire
/// protocol, file ingestion and rendering.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("split error: {0}")]
    Split(String),

    #[error("regime error: {0}")]
    Regime(String),

    #[error("metric error: {0}")]
    Metric(String),

    #[error("ensemble member {member} failed: {source}")]
    Ensemble {
        member: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("encode error: {0}")]
    Encode(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("remote model error [{code}]: {message}")]
    RemoteModel { code: String, message: String },

    #[error("transport error: {0}")]
    Transport(String),

    #[error("timed out after {0:.1} s waiting for a response")]
    Timeout(f64),

    #[error("capability error: {0}")]
    Capability(String),

    #[error("{path}:{line}: parse error: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("{path}: format error: {message}")]
    Format { path: PathBuf, message: String },

    #[error("render error: {0}")]
    Render(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Wire-level error code for this error, as used in protocol error payloads.
    pub fn wire_code(&self) -> &'static str {
        match self {
            Error::Protocol(_) | Error::Encode(_) => "PROTOCOL",
            Error::Shape(_) | Error::Validation(_) => "SHAPE",
            Error::Timeout(_) => "TIMEOUT",
            Error::Capability(_) => "CAPABILITY",
            _ => "REMOTE",
        }
    }
}
