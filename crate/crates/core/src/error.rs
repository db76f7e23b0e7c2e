use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("size budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("symmetric eigensolve failed: {0}")]
    Eigensolve(&'static str),

    #[error("conjugate gradient stalled after {iterations} iterations (relative residual {residual:.3e})")]
    CgStalled { iterations: usize, residual: f64 },

    #[error("optimizer hit the iteration cap ({0}) before converging")]
    OptimizerCap(usize),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("relative error undefined: reference magnitude {0:.3e} too small")]
    ReferenceTooSmall(f64),

    #[error("quadrature box does not cover the densities (tail estimate {0:.3e})")]
    BoxCoverage(f64),

    #[error("objective has multiple near-optimal minimizers on the search interval")]
    MultipleMinimizers,

    #[error("mesh too coarse: {0}")]
    MeshTooCoarse(&'static str),

    #[error("point ({0}, {1}) lies outside the unit square")]
    OutOfDomain(f64, f64),

    #[error("forward model failed at quadrature node {node}: {source}")]
    ForwardAtNode {
        node: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
