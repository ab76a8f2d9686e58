use thiserror::Error;

/// Errors raised by the model, rate and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PurcellError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported configuration: {0}")]
    UnsupportedConfiguration(String),

    #[error("truncation risk: {0}")]
    TruncationRisk(String),

    #[error("singular configuration: {0}")]
    SingularConfiguration(String),

    #[error("no real root: {0}")]
    NoRealRoot(String),

    #[error("integration failure at t = {time:e}: {reason}")]
    IntegrationFailure { time: f64, reason: String },

    #[error("fit rejected: {0}")]
    FitQuality(String),
}

pub type Result<T> = std::result::Result<T, PurcellError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(PurcellError::InvalidArgument(msg.into()))
}
