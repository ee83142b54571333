use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("non-finite sample at index {index}")]
    NonFinite { index: usize },

    #[error("multiplier `{0}` does not map real fields to real fields")]
    NotRealPreserving(String),

    #[error("support leaves the periodic box: {0}")]
    Wraparound(String),

    #[error("supports are not separated: distance {distance} < {required}")]
    SupportsOverlap { distance: f64, required: f64 },

    #[error("profile does not decay at the box boundary: |u| = {magnitude:e} > {tolerance:e}")]
    BoundaryDecay { magnitude: f64, tolerance: f64 },

    #[error("CFL violated at step {step}: dt = {dt} exceeds {limit}")]
    Cfl { step: u64, dt: f64, limit: f64 },

    #[error("solution blew up at step {step} (t = {t})")]
    BlowUp { step: u64, t: f64 },

    #[error("construction inconsistency: {0}")]
    Construction(String),

    #[error("missing input file {0}")]
    MissingInput(PathBuf),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed data in {path}: {reason}")]
    Malformed { path: PathBuf, reason: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
    let path = path.into();
    move |source| Error::Io { path, source }
}
