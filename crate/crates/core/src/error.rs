use thiserror::Error;

/// Errors raised by the solver, the diagnostics and the persistence layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("beta continuation step {step} (beta = {beta}) did not converge: residual {residual:.3e} after {iterations} sweeps")]
    StepNotConverged {
        step: usize,
        beta: f64,
        residual: f64,
        iterations: usize,
    },

    #[error("radius {radius} around x = {center} leaves the computational domain")]
    RadiusOutOfDomain { center: f64, radius: f64 },

    #[error("segregation precondition violated at trace nodes {nodes:?}")]
    NotSegregated { nodes: Vec<usize> },

    #[error("quadrature did not converge: achieved error estimate {achieved:.3e} (target {target:.3e})")]
    Quadrature { achieved: f64, target: f64 },

    #[error("diagnostic precondition failed: {0}")]
    Precondition(String),

    #[error("field file: {0}")]
    Format(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
