use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical failure: {message}")]
    NumericalFailure {
        message: String,
        /// Last residual or offending value, when one exists.
        residual: Option<f64>,
        /// Step index at which the failure was detected.
        step: Option<usize>,
    },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Process exit status for this error: validation and capacity problems
    /// are `2`, numerical failures `3`, I/O failures `4`.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) | Error::Capacity(_) => 2,
            Error::NumericalFailure { .. } => 3,
            Error::Io(_) => 4,
        }
    }

    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::NumericalFailure { .. } => "numerical-failure",
            Error::Capacity(_) => "capacity",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
