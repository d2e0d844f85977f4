use thiserror::Error;

use crate::dynamics::Regime;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("degenerate problem: {0}")]
    Degenerate(String),

    #[error("infeasible constraints: {0}")]
    Infeasible(String),

    /// The damping coefficient alpha/t is undefined for t <= 0.
    #[error("singular damping: t = {0} must be positive")]
    SingularDamping(f64),

    #[error("integration diverged at t = {t} (last finite state at t = {last_finite})")]
    Diverged { t: f64, last_finite: f64 },

    #[error("step size underflow at t = {t} (h = {h:e}); the system is too stiff for the tolerances")]
    StepUnderflow { t: f64, h: f64 },

    #[error("regime mismatch: expected {expected:?}, got {got:?}")]
    RegimeMismatch { expected: Regime, got: Regime },

    #[error("KKT point not certified: stationarity {stationarity:e}, feasibility {feasibility:e}")]
    Uncertified { stationarity: f64, feasibility: f64 },

    #[error("insufficient samples for rate fit: need at least 3, have {0}")]
    InsufficientSamples(usize),

    #[error("invalid graph: {0}")]
    Graph(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("reference solver did not converge: {0}")]
    NoConvergence(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the experiment runner.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Json(_) | Error::Graph(_) | Error::InvalidArgument(_) => 2,
            _ => 1,
        }
    }
}

pub(crate) fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { what, expected, got })
    }
}
