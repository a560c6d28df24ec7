use thiserror::Error;

use crate::annealing::RunResult;
use crate::isde::IsdeState;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cost evaluation {index} returned a non-finite value ({value})")]
    NonFiniteCost { value: f64, index: u64 },

    #[error("simulation diverged at t = {time:.4} s (displacement {displacement:e})")]
    DivergedSimulation { time: f64, displacement: f64 },

    #[error("control points {first} and {second} are closer than the minimum separation {min_separation:e}")]
    DuplicatePoint {
        first: usize,
        second: usize,
        min_separation: f64,
    },

    #[error("surrogate fit failed (condition estimate {condition:e}): {reason}")]
    FitFailure { condition: f64, reason: String },

    /// The Langevin integrator produced a non-finite state. `last_valid` is
    /// the state before the failing step.
    #[error("integrator diverged at step {step}")]
    DivergedState { step: usize, last_valid: Box<IsdeState> },

    #[error("run aborted at stage {stage}: {source}")]
    Aborted {
        stage: usize,
        partial: Box<RunResult>,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid configuration:\n  - {}", .0.join("\n  - "))]
    InvalidConfig(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
