use alloc::string::String;
use alloc::vec::Vec;

use crate::linalg::EigenPair;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("empty input")]
    EmptyInput,

    /// The eigensolver did not reach the residual target. `best` holds the
    /// last iterate (sorted, sign-normalised) and `residual` the largest
    /// residual among its pairs.
    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    ConvergenceFailure {
        best: Vec<EigenPair>,
        residual: f64,
        iterations: usize,
    },

    #[error("infeasible spike specification: {0}")]
    InfeasibleSpec(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("length {0} is not a power of two")]
    LengthNotPowerOfTwo(usize),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("vector is not unit norm (norm {0})")]
    NotUnitNorm(f64),

    #[error("dataset carries no generating model")]
    MissingTruth,
}
