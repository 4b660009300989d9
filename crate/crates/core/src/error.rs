use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("shape mismatch: expected {expected} values, found {found}")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("malformed raster header: {0}")]
    MalformedHeader(String),

    #[error("unsupported raster version {0}")]
    UnsupportedVersion(u32),

    #[error("unsupported dtype {0:?}")]
    UnsupportedDtype(String),

    #[error("raster kind mismatch: expected {expected}, found {found}")]
    KindMismatch { expected: &'static str, found: String },

    #[error("payload holds {found} bytes but header requires {expected}")]
    PayloadMismatch { expected: usize, found: usize },

    #[error("point is not on the sphere: | |x - y| - r | = {residual:e}")]
    NotOnSphere { residual: f64 },

    #[error("artifact line is undefined: x coincides with z = y - r(y)∇r(y)")]
    DegenerateArtifactLine,

    #[error("norm inequality fails at the sphere center: |∇r| = {0}")]
    NormViolated(f64),

    #[error("center {0:?} lies outside the valid center set: {1}")]
    InvalidCenter([f64; 2], String),

    #[error("region is unbounded and cannot be sampled")]
    UnboundedRegion,

    #[error("radius function is not positive at {0:?}")]
    NonPositiveRadius([f64; 2]),

    #[error("zero diagonal in triangular system at row {0}")]
    ZeroDiagonal(usize),

    #[error("sinogram does not cover radial band [{lo}, {hi}]")]
    InsufficientCoverage { lo: f64, hi: f64 },

    #[error("non-finite objective at iteration {0}")]
    NonFinite(usize),

    #[error("config error: {0}")]
    Config(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("io error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("png encoding failed: {0}")]
    Png(#[from] png::EncodingError),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn at_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Config problems and numerical failures map to distinct process exit codes.
    pub fn is_config_error(&self) -> bool {
        match self {
            Error::Config(_) | Error::InvalidInput(_) => true,
            Error::Stage { source, .. } => source.is_config_error(),
            _ => false,
        }
    }
}
