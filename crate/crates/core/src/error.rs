use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("truncation too small (dim {dim}): {reason}")]
    TruncationTooSmall { dim: usize, reason: String },

    #[error("grid too narrow: {0}")]
    GridTooNarrow(String),

    #[error("optimised energy {optimized} is not below the initial energy {initial}")]
    NoImprovement { optimized: f64, initial: f64 },

    #[error("fit did not converge: {0}")]
    FitDidNotConverge(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("time step too coarse: {0}")]
    StepTooCoarse(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Coarse grouping used for process exit codes and FFI status codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Numerical,
    Io,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Config(_) | Error::InvalidParameter(_) => ErrorClass::Config,
            Error::Io(_) => ErrorClass::Io,
            _ => ErrorClass::Numerical,
        }
    }

    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::TruncationTooSmall { .. } => "truncation",
            Error::GridTooNarrow(_) => "grid",
            Error::NoImprovement { .. } => "no-improvement",
            Error::FitDidNotConverge(_) => "fit",
            Error::DegenerateData(_) => "degenerate-data",
            Error::StepTooCoarse(_) => "step",
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn truncation(dim: usize, reason: impl Into<String>) -> Self {
        Error::TruncationTooSmall {
            dim,
            reason: reason.into(),
        }
    }
}
