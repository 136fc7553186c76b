use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("point outside chart domain: {0}")]
    OutsideChart(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("ill-conditioned: {0}")]
    IllConditioned(String),
    #[error("depth mismatch: {0} vs {1}")]
    DepthMismatch(f64, f64),
    #[error("not integrable: {0}")]
    NotIntegrable(String),
    #[error("numerical instability: {0}")]
    Unstable(String),
    #[error("CFL condition violated: dt/dr* = {0}")]
    Cfl(f64),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
