use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("no convergence after {iterations} iterations (last increment {increment:.3e}); possible exceptional point or insufficient resolution")]
    NonConvergence { iterations: usize, increment: f64 },
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("fit rejected: {0}")]
    Fit(String),
}

pub type Result<T> = std::result::Result<T, Error>;
