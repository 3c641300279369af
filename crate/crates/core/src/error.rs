use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("order out of range: {0}")]
    OrderRange(String),
    #[error("no convergence: {0}")]
    NonConvergence(String),
    #[error("quadrature failure: {0}")]
    Quadrature(String),
    #[error("unsupported regime: {0}")]
    Unsupported(String),
    #[error("singular system: {0}")]
    Singular(String),
    #[error("check failed: {0}")]
    Check(String),
}

pub type Result<T> = std::result::Result<T, Error>;
