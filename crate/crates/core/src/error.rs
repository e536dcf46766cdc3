use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An index or argument outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid assortment: {0}")]
    InvalidAssortment(String),

    /// A policy received feedback of a kind it was not built for, or played
    /// something illegal.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// Exhaustive search refused because the instance is too large.
    #[error("refusing exhaustive search over {k} items (limit {limit})")]
    TooLarge { k: usize, limit: usize },
}
