use thiserror::Error;

pub type Result<T> = std::result::Result<T, ModelError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    /// An argument outside the domain of a formula (non-positive count, rate, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A policy and capacity that cannot be combined, or a malformed scenario.
    #[error("configuration error: {0}")]
    Config(String),

    /// The conditioning variable disagrees with the state it was derived from.
    #[error("consistency error: {0}")]
    Consistency(String),

    /// The conservation system has no unique solution; the link mask is wrong.
    #[error("singular conservation system for {0}")]
    Singular(String),

    /// The solved state has a negative component.
    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A search never bracketed its target.
    #[error("search failed: {0}")]
    Search(String),

    #[error("output error: {0}")]
    Output(String),
}

pub(crate) fn domain(msg: impl Into<String>) -> ModelError {
    ModelError::Domain(msg.into())
}
