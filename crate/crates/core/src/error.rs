use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid manifest {path}: {reason}")]
    Manifest { path: PathBuf, reason: String },

    #[error("missing layer file {0}")]
    MissingLayer(PathBuf),

    #[error("size mismatch in {path}: expected {expected} bytes, found {found}")]
    SizeMismatch {
        path: PathBuf,
        expected: u64,
        found: u64,
    },

    #[error("non-finite value at layer {layer}, point {point}, coordinate {coord}")]
    NonFinite {
        layer: usize,
        point: usize,
        coord: usize,
    },

    #[error("invalid layer stack: {0}")]
    InvalidStack(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "no radius gives beta0 in [{lo}, {hi}]; achievable values bracketing the target: \
         below={below:?}, above={above:?}"
    )]
    Infeasible {
        lo: usize,
        hi: usize,
        below: Option<usize>,
        above: Option<usize>,
    },

    #[error("simplex cap exceeded: more than {cap} simplices")]
    SimplexCap { cap: usize },

    #[error("complex has {size} simplices, above the oracle cap of {cap}")]
    OracleCap { size: usize, cap: usize },

    #[error("mismatched complexes: {0}")]
    Mismatch(String),

    #[error("invalid filtration: {0}")]
    InvalidFiltration(String),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
