use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("spectral radius estimate did not converge after {iterations} iterations (last estimate {last_estimate})")]
    NonConvergence {
        iterations: usize,
        last_estimate: f64,
    },

    #[error("cannot rescale a matrix whose spectral radius is zero")]
    CannotRescale,

    #[error("singular regression system; use a positive ridge parameter")]
    SingularSystem,

    #[error("non-finite or diverging state at step {step}")]
    NumericOverflow { step: usize },

    #[error("closed-loop feedback needs readout dimension {outputs} to equal input dimension {inputs}")]
    ClosedLoopDimension { outputs: usize, inputs: usize },

    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed data: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
