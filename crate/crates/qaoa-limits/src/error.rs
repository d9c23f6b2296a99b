use thiserror::Error;

/// Errors raised by every fallible operation in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Inputs outside the documented domain (bad angles, degrees, sizes).
    #[error("validation error: {0}")]
    Validation(String),
    /// A result that should be real or finite was not.
    #[error("numerical consistency error: {0}")]
    Numerical(String),
    /// A memory or work-size guard refused the request.
    #[error("resource guard: {0}")]
    Resource(String),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub(crate) fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
