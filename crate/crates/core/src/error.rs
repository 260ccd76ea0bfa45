use thiserror::Error;

/// Errors raised by the estimators and the variance machinery.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error in `{parameter}`: {message}")]
    Domain {
        parameter: &'static str,
        message: String,
    },

    #[error("dimension mismatch: expected d={expected}, got d={found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("profile is not invertible at grey value {value}: {message}")]
    Invertibility { value: f64, message: String },

    #[error("normalization constant alpha_f = {alpha:e} vanishes; estimator undefined")]
    Normalization { alpha: f64 },

    #[error("window does not cover the support tube: {message}")]
    Coverage { message: String },

    #[error(
        "lattice sum not converged at xi_max = {xi_max}: tail bound is {tail_ratio:.3e} of the partial sum; try xi_max >= {suggested}"
    )]
    Truncation {
        xi_max: f64,
        tail_ratio: f64,
        suggested: f64,
    },

    #[error("evaluation point outside transition zone: {message}")]
    OutsideTransitionZone { message: String },

    #[error("root bracketing failed: {message}")]
    RootBracketing { message: String },

    #[error("unsupported: {message}")]
    Unsupported { message: String },
}

impl Error {
    pub(crate) fn domain(parameter: &'static str, message: impl Into<String>) -> Self {
        Error::Domain {
            parameter,
            message: message.into(),
        }
    }

    /// Name of the configuration parameter most directly responsible, if known.
    pub fn parameter(&self) -> Option<&'static str> {
        match self {
            Error::Domain { parameter, .. } => Some(parameter),
            Error::DimensionMismatch { .. } => Some("dim"),
            Error::Invertibility { .. } => Some("psf"),
            Error::Normalization { .. } => Some("weight"),
            Error::Coverage { .. } => Some("window"),
            Error::Truncation { .. } => Some("xi_max"),
            Error::OutsideTransitionZone { .. } => Some("t"),
            Error::RootBracketing { .. } => Some("a"),
            Error::Unsupported { .. } => None,
        }
    }

    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "domain",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::Invertibility { .. } => "invertibility",
            Error::Normalization { .. } => "normalization",
            Error::Coverage { .. } => "coverage",
            Error::Truncation { .. } => "truncation",
            Error::OutsideTransitionZone { .. } => "outside_transition_zone",
            Error::RootBracketing { .. } => "root_bracketing",
            Error::Unsupported { .. } => "unsupported",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
