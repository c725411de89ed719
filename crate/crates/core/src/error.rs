use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("kernel is not row-stochastic: {0}")]
    InvalidKernel(String),

    #[error("stationary law is not unique (left eigenspace at 1 has dimension {dimension})")]
    NonUniqueStationary { dimension: usize },

    #[error("stationary law has a zero entry at state {state}; the chain is not ergodic on its state space")]
    NonPositiveStationary { state: usize },

    #[error("observable is not centered under the stationary law (mean {mean:e})")]
    NotCentered { mean: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("state space of size {size} exceeds the limit of {limit}")]
    StateSpaceTooLarge { size: usize, limit: usize },

    #[error("invalid seed specification: {0}")]
    InvalidSeedSpec(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("linear solve failed: {0}")]
    SolveFailure(String),

    #[error("degenerate variance at n = {n}: sigma_n^2 = {sigma_sq:e}")]
    DegenerateVariance { n: usize, sigma_sq: f64 },

    #[error("dyadic gaps did not fall below {tol:e} by k = {max_k} (last gap {last_gap:e})")]
    NoConvergence { tol: f64, max_k: u32, last_gap: f64 },

    #[error("no certified tail bound is available for {0}")]
    TailBoundUnavailable(String),

    #[error("series is not strictly positive at index {index}")]
    NonPositiveSeries { index: usize },

    #[error("missing squared norm of T_(2^{j}) (need j = 0..={d})")]
    MissingDyadicNorm { j: usize, d: usize },

    #[error("model file line {line}: {message}")]
    ModelParse { line: usize, message: String },
}
