use num_bigint::BigUint;
use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DfsError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A configurable size cap would be exceeded. `cap` names the cap (the
    /// environment variable that overrides it, where one exists).
    #[error("resource cap {cap} exceeded: requested {requested}, limit {limit}")]
    ResourceCap {
        cap: &'static str,
        requested: BigUint,
        limit: u64,
    },
}

pub type Result<T> = std::result::Result<T, DfsError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(DfsError::InvalidArgument(msg.into()))
}
