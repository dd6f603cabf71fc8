use std::path::PathBuf;

/// Errors raised anywhere in the toolkit.
///
/// Every variant maps to a stable kebab-case [`Error::code`] so front ends can
/// print machine-parseable diagnostics.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Unreadable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot decode {path}: {message}")]
    Decode { path: PathBuf, message: String },
    #[error("{path} has {channels} channels; only single-channel rasters are supported")]
    MultiChannel { path: PathBuf, channels: u8 },
    #[error("{path} is zero-sized")]
    ZeroSized { path: PathBuf },
    #[error("{path}: mask pixel value {value} is neither 0 nor 255")]
    InvalidMaskValue { path: PathBuf, value: u16 },
    #[error("I/O failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid sidecar metadata {path}: {message}")]
    Metadata { path: PathBuf, message: String },
    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("invalid parameter {name}: {message}")]
    InvalidParameter { name: &'static str, message: String },
    #[error("empty stack")]
    EmptyStack,
    #[error("adaptive threshold window is {pixels} px; at least 3 px required")]
    WindowTooSmall { pixels: usize },
    #[error("curve does not fit in a {width}x{height} canvas with margin {margin} px")]
    CurveExceedsCanvas {
        width: usize,
        height: usize,
        margin: f64,
    },
    #[error("id mismatch at position {index}: {left} vs {right}")]
    IdMismatch {
        index: usize,
        left: String,
        right: String,
    },
    #[error("empty set")]
    EmptySet,
    #[error("non-positive reference tortuosity {value} for {id}")]
    NonPositiveDenominator { id: String, value: f64 },
    #[error("need at least {needed} images, got {available}")]
    InsufficientImages { needed: usize, available: usize },
    #[error("split fractions sum to {sum}, expected 1")]
    BadFractions { sum: f64 },
    #[error("backend unreachable: {0}")]
    BackendUnreachable(String),
    #[error("backend exited with status {status}: {stderr}")]
    BackendFailed { status: String, stderr: String },
    #[error("backend timed out after {seconds} s")]
    BackendTimeout { seconds: f64 },
    #[error("backend protocol violation: {0}")]
    Protocol(String),
    #[error("n={n}, repetition={repetition}: {source}")]
    SweepJob {
        n: usize,
        repetition: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::Unreadable { .. } => "unreadable",
            Error::Decode { .. } => "decode",
            Error::MultiChannel { .. } => "multi-channel",
            Error::ZeroSized { .. } => "zero-sized",
            Error::InvalidMaskValue { .. } => "invalid-mask-value",
            Error::Io { .. } => "io",
            Error::Metadata { .. } => "metadata",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::InvalidParameter { .. } => "invalid-parameter",
            Error::EmptyStack => "empty-stack",
            Error::WindowTooSmall { .. } => "window-too-small",
            Error::CurveExceedsCanvas { .. } => "curve-exceeds-canvas",
            Error::IdMismatch { .. } => "id-mismatch",
            Error::EmptySet => "empty-set",
            Error::NonPositiveDenominator { .. } => "non-positive-denominator",
            Error::InsufficientImages { .. } => "insufficient-images",
            Error::BadFractions { .. } => "bad-fractions",
            Error::BackendUnreachable(_) => "backend-unreachable",
            Error::BackendFailed { .. } => "backend-failed",
            Error::BackendTimeout { .. } => "backend-timeout",
            Error::Protocol(_) => "protocol-violation",
            Error::SweepJob { source, .. } => source.code(),
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn param(name: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
