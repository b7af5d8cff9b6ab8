use thiserror::Error;

/// Errors produced by the numerical kernels and the scenario harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid lattice parameters: {0}")]
    InvalidParams(String),

    #[error("invalid weight spec: {0}")]
    InvalidSpec(String),

    #[error("lattice mismatch: {0}")]
    LatticeMismatch(String),

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("invalid exponents: {0}")]
    InvalidExponents(String),

    /// No covering cube fits inside the extended region.
    #[error("insufficient padding: {0}")]
    InsufficientPadding(String),

    #[error("empty cube family: {0}")]
    EmptyFamily(String),

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Resource failures map to a distinct process exit code in the CLI.
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::Budget(_))
    }

    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config { .. }
                | Error::InvalidParams(_)
                | Error::InvalidSpec(_)
                | Error::InvalidExponents(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
