use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("not an operator system: {0}")]
    NotOperatorSystem(String),
    #[error("not a *-algebra: {0}")]
    NotAlgebra(String),
    #[error("not a graph system: {0}")]
    NotAGraphSystem(String),
    #[error("matrix is not Hermitian (asymmetry {0:e})")]
    NonHermitian(f64),
    #[error("not a TRO: {0}")]
    NotTro(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("side algebra is not unital: {0}")]
    NonUnital(String),
    #[error("operator system is not rigid (multiplier algebra has dimension {0})")]
    NotRigid(usize),
    #[error("operator is not an intertwiner (residual {0:e})")]
    NotIntertwiner(f64),
    #[error("subspace is not a bimodule over the multiplier algebra (residual {0:e})")]
    NotBimodule(f64),
    #[error("size limit exceeded: {0}")]
    LimitExceeded(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
