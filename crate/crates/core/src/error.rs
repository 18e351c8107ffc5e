//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or input value violates a documented precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Regression inputs carry no usable information (e.g. all regressors zero).
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// Power flow failed to reach the mismatch tolerance.
    #[error("power flow did not converge after {iters} iterations (mismatch {mismatch:.3e})")]
    NonConvergence { iters: usize, mismatch: f64 },

    /// ODE integration produced a non-finite state.
    #[error("integration diverged at step {step}")]
    Integration { step: usize },

    /// Kalman filter covariance lost positive definiteness or produced NaN.
    #[error("filter divergence: {0}")]
    FilterDivergence(String),

    /// Too few post-burn-in samples to summarize.
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A data or feeder file failed to parse.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Bad or inconsistent run configuration.
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Exit code for the CLI: 2 for configuration/file problems, 3 for
    /// numerical or convergence failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Io(_) | Error::Parse { .. } => 2,
            _ => 3,
        }
    }
}
