use thiserror::Error;

/// Errors surfaced by the library. Variants map one-to-one onto the failure
/// classes the CLI reports.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),
    #[error("invalid group element: {0}")]
    InvalidElement(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid root: {0}")]
    InvalidRoot(String),
    #[error("unsupported prime {0}")]
    UnsupportedPrime(u64),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("precision error: {0}")]
    Precision(String),
    #[error("cache error: {0}")]
    Cache(String),
    #[error("partial data: {0}")]
    PartialData(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
