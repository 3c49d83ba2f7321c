use thiserror::Error;

/// Errors raised across the solver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("tensor is not symmetric: {0}")]
    NotSymmetric(String),
    #[error("tensor is not positive definite (min eigenvalue {min_eig:e}, max {max_eig:e})")]
    NotPositiveDefinite { min_eig: f64, max_eig: f64 },
    #[error("singular system: {0}")]
    Singular(String),
    #[error("Newton iteration diverged at iteration {iterations} (residual norm {residual:e})")]
    NewtonDiverged { iterations: usize, residual: f64 },
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("config error at line {line}, column {column}: {message}")]
    Config {
        line: usize,
        column: usize,
        message: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by bad user input rather than solver breakdown.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Invalid(_) | Error::NotSymmetric(_) | Error::NotPositiveDefinite { .. } | Error::Config { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
