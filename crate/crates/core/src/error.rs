use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A size guard tripped. `cap` names the guard (see [`crate::Caps`]).
    #[error("cap `{cap}` exceeded: requested {requested}, limit {limit}")]
    CapExceeded {
        cap: &'static str,
        requested: u128,
        limit: u128,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    /// Numerical failure that should not happen for valid inputs
    /// (singular system, non-convergent scan).
    #[error("numeric error: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn check_cap(cap: &'static str, requested: u128, limit: u128) -> Result<()> {
    if requested > limit {
        Err(Error::CapExceeded {
            cap,
            requested,
            limit,
        })
    } else {
        Ok(())
    }
}
