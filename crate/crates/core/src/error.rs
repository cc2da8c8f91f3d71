use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {field}: {reason}")]
    Config { field: String, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("zero Rytov variance: turbulence is degenerate, use h_a = 1")]
    DegenerateTurbulence,

    #[error("degenerate channel: {0}")]
    DegenerateChannel(String),

    #[error("all-zero sequence: channel cannot be estimated without any '1' slot")]
    AllZeroSequence,

    #[error("window of {len} bits exceeds the exhaustive-search cap of {cap}")]
    WindowTooLong { len: usize, cap: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization: {0}")]
    Serde(String),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
