//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An operation that needs data received none.
    #[error("empty input: {0}")]
    EmptyInput(String),

    /// Malformed text input; `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Not enough points for the requested statistic.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A domain value violates its invariant; `field` names the offender.
    #[error("invalid parameter `{field}`: {message}")]
    InvalidParameter { field: &'static str, message: String },

    /// Collinear/rank-deficient input where a 2D or 3D extent is required.
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    /// The alpha-complex is empty at the requested radius.
    #[error("alpha radius {0} too small: no triangles survive the filter")]
    AlphaTooSmall(f64),

    /// Parameter vector has the wrong length for the primitive kind.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// Objective returned a non-finite value during optimization.
    #[error("objective evaluation failed at coordinate {coordinate}: {message}")]
    ObjectiveEvaluation { coordinate: usize, message: String },

    /// Start point or iterate violates the box constraints.
    #[error("bounds violation: {0}")]
    Bounds(String),

    /// Every candidate primitive failed to fit.
    #[error("classification failed: {0}")]
    ClassificationFailure(String),

    /// A query point falls outside the DEM extent (or on NODATA cells).
    #[error("point ({x}, {y}) outside DEM extent")]
    OutOfExtent { x: f64, y: f64 },

    /// Base elevation at or above the eave; no solid can be built.
    #[error("invalid base elevation: {0}")]
    InvalidBase(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
