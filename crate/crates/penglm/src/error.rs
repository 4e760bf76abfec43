//! Crate-wide error type.

use thiserror::Error;

/// Everything that can go wrong across fitting, selection, and simulation.
#[derive(Debug, Error)]
pub enum Error {
    /// A dataset failed validation (shape, finiteness, response support).
    #[error("invalid data: {0}")]
    InvalidData(String),

    /// A parameter or option violated its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// A numeric evaluation left the representable range (overflow, NaN).
    #[error("numeric domain error: {0}")]
    Domain(String),

    /// A matrix needed in factored form was singular or indefinite.
    #[error("ill-conditioned matrix in {context}: reciprocal condition number {rcond:.3e}")]
    Conditioning { context: String, rcond: f64 },

    /// The optimization problem has no finite minimizer.
    #[error("unbounded problem: {0}")]
    Unbounded(String),

    /// The requested penalty/rate combination is outside the supported theory.
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    /// An iterative routine exhausted its budget without meeting its certificate.
    #[error("no convergence: {0}")]
    NoConvergence(String),

    /// A Monte-Carlo harness kept too few replications to report anything.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Every fit along a tuning grid failed; the message lists per-lambda causes.
    #[error("all fits on the tuning grid failed:\n{0}")]
    AllFitsFailed(String),

    /// A run configuration was malformed or internally inconsistent.
    #[error("config error: {0}")]
    Config(String),

    /// A data file could not be parsed.
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable machine-readable tag for report records.
    pub fn kind_str(&self) -> &'static str {
        match self {
            Error::InvalidData(_) => "invalid_data",
            Error::InvalidParam(_) => "invalid_parameter",
            Error::Domain(_) => "domain",
            Error::Conditioning { .. } => "conditioning",
            Error::Unbounded(_) => "unbounded",
            Error::UnsupportedRegime(_) => "unsupported_regime",
            Error::NoConvergence(_) => "no_convergence",
            Error::InsufficientData(_) => "insufficient_data",
            Error::AllFitsFailed(_) => "all_fits_failed",
            Error::Config(_) => "config",
            Error::Parse { .. } => "parse",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
            Error::Io(_) => "io",
        }
    }
}
