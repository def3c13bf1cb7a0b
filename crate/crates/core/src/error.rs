use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("capacity exceeded: {what} requires {requested}, limit is {limit}")]
    Capacity {
        what: &'static str,
        requested: usize,
        limit: usize,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("matrix is not positive semidefinite: eigenvalue {0:e} below clamp tolerance")]
    NotPsd(f64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("basis is not orthonormal: Gram matrix deviates from identity by {0:e}")]
    NonOrthonormal(f64),

    #[error("quadrature did not converge within {nodes} nodes (last change {change:e})")]
    Quadrature { nodes: usize, change: f64 },

    #[error("invalid input data: {0}")]
    InvalidData(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
