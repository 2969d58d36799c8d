use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid edge ({0}, {1}): endpoints must differ")]
    InvalidEdge(usize, usize),

    #[error("{what} out of domain: {detail}")]
    Domain { what: &'static str, detail: String },

    #[error("enumeration limit exceeded: {0}")]
    EnumerationLimit(String),

    #[error("resource guard: {0}")]
    ResourceGuard(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("root finding failed for {0}")]
    NoConvergence(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(what: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        what,
        detail: detail.into(),
    }
}
