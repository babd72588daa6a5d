use std::process::ExitCode;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter is outside its domain. `field` names the offending input.
    #[error("invalid value for `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("adaptive quadrature on [{lo}, {hi}] did not reach tolerance {tolerance:e} (estimated error {estimate:e})")]
    QuadratureFailure {
        lo: f64,
        hi: f64,
        tolerance: f64,
        estimate: f64,
    },

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("dimension mismatch: expected {expected} entries, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.exit_status())
    }

    pub fn exit_status(&self) -> u8 {
        match self {
            Error::InvalidParameter { .. } | Error::Unsupported(_) | Error::Config(_) => 2,
            Error::Io(_) => 3,
            Error::QuadratureFailure { .. }
            | Error::DimensionMismatch { .. }
            | Error::Numerical(_) => 4,
        }
    }
}
