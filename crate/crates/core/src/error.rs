use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed PGM header: {0}")]
    MalformedHeader(String),
    #[error("unsupported depth: maxval {0} exceeds 255")]
    UnsupportedDepth(u32),
    #[error("truncated PGM payload: expected {expected} samples, found {found}")]
    TruncatedPayload { expected: usize, found: usize },

    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("network spec error: {0}")]
    NetworkSpec(String),
    #[error("weight error: {0}")]
    Weights(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("feature table error: {0}")]
    Table(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("singular system: {0}")]
    Singular(String),
    #[error("model file error: {0}")]
    ModelFormat(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
