use thiserror::Error;

/// Errors produced by the simulation and fitting routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("temperature {t} K outside tuning validity range [{min}, {max}] K")]
    TemperatureOutOfRange { t: f64, min: f64, max: f64 },

    #[error("steady state is not unique: Liouvillian null space is degenerate")]
    DegenerateNullSpace,

    #[error("steady-state solve failed: {0}")]
    SteadyState(String),

    #[error("integrator step size underflow at t = {t} ns (h = {h})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("integrator exceeded {0} steps")]
    TooManySteps(usize),

    #[error("grid is not uniform")]
    NonUniformGrid,

    #[error("grid is not strictly increasing")]
    NonIncreasingGrid,

    #[error("fit did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("doublet not resolved: {0}")]
    UnresolvedDoublet(String),

    #[error("parameter not identifiable: {0}")]
    NotIdentifiable(String),

    #[error("Fock truncation not converged: <n> changed by {relative_change:.3e} going from {n_fock} to {n_fock_next} levels")]
    TruncationNotConverged {
        n_fock: usize,
        n_fock_next: usize,
        relative_change: f64,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
