use thiserror::Error;

/// Errors raised by the library. Axiom failures are never errors: they are
/// reported as entries in the various report types.
#[derive(Debug, Error)]
pub enum Error {
    #[error("morphisms are not composable: mismatch {mismatch:.3e}")]
    NotComposable { mismatch: f64 },
    #[error("path endpoints do not match: mismatch {mismatch:.3e}")]
    EndpointMismatch { mismatch: f64 },
    #[error("path has no samples")]
    EmptyPath,
    #[error("sample index {index} out of range for a path with {len} samples")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("logarithm requested at or beyond the cut locus of {group} (angle {angle:.6})")]
    LogBranch { group: String, angle: f64 },
    #[error("point does not lie over the start of the path: mismatch {mismatch:.3e}")]
    FiberMismatch { mismatch: f64 },
    #[error("base point {point:?} lies outside the domain box")]
    OutOfDomain { point: Vec<f64> },
    #[error("input path is not horizontal: residual {residual:.3e} exceeds {tolerance:.3e}")]
    NotHorizontalInput { residual: f64, tolerance: f64 },
    #[error("no fiber element relates the two points: mismatch {mismatch:.3e}")]
    FiberSolveFailed { mismatch: f64 },
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("invalid fixture: {0}")]
    Fixture(String),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
