//! Cost functions and evaluation accounting.
//!
//! An [`Objective`] is the raw map from a design vector to a non-negative
//! cost. [`CostFunction`] wraps one with an atomic evaluation counter, an
//! optional evaluation history and a finite-difference gradient fallback, and
//! is what every optimizer in this crate consumes.

mod ackley;
mod least_squares;
mod oscillator;

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector;

pub use ackley::{ackley, ackley_gradient, Ackley};
pub use least_squares::{least_squares_cost, LeastSquares};
pub use oscillator::{oscillator_design_cost, Oscillator, OscillatorConfig, Sinusoid};

/// Relative step used by the finite-difference gradient fallback.
pub const FD_GRADIENT_STEP: f64 = 1e-6;

pub trait Objective: Send + Sync {
    fn dimension(&self) -> usize;

    fn value(&self, a: &[f64]) -> Result<f64>;

    /// Analytic gradient, when the objective provides one.
    fn gradient(&self, _a: &[f64]) -> Option<Result<Vec<f64>>> {
        None
    }
}

/// One call of the evaluator, as seen by [`CostFunction::history`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub point: Vec<f64>,
    pub value: f64,
    /// Zero-based index of this call among all evaluator calls.
    pub index: u64,
    /// Seconds since the cost function was created.
    pub elapsed: f64,
}

pub struct CostFunction {
    objective: Arc<dyn Objective>,
    evaluations: AtomicU64,
    gradient_calls: AtomicU64,
    history: Option<Mutex<Vec<EvaluationRecord>>>,
    created: Instant,
}

impl CostFunction {
    pub fn new(objective: impl Objective + 'static) -> Self {
        Self::from_arc(Arc::new(objective))
    }

    pub fn from_arc(objective: Arc<dyn Objective>) -> Self {
        CostFunction {
            objective,
            evaluations: AtomicU64::new(0),
            gradient_calls: AtomicU64::new(0),
            history: None,
            created: Instant::now(),
        }
    }

    /// Keep an [`EvaluationRecord`] for every evaluator call.
    pub fn with_history(mut self) -> Self {
        self.history = Some(Mutex::new(Vec::new()));
        self
    }

    pub fn dimension(&self) -> usize {
        self.objective.dimension()
    }

    pub fn evaluate(&self, a: &[f64]) -> Result<f64> {
        if a.len() != self.dimension() {
            return Err(Error::invalid(format!(
                "point has dimension {}, cost function expects {}",
                a.len(),
                self.dimension()
            )));
        }
        let index = self.evaluations.fetch_add(1, Ordering::SeqCst);
        let value = self.objective.value(a)?;
        if !value.is_finite() {
            return Err(Error::NonFiniteCost { value, index });
        }
        if let Some(history) = &self.history {
            let record = EvaluationRecord {
                point: a.to_vec(),
                value,
                index,
                elapsed: self.created.elapsed().as_secs_f64(),
            };
            history.lock().expect("history lock poisoned").push(record);
        }
        Ok(value)
    }

    /// Analytic gradient if available, otherwise central differences through
    /// [`CostFunction::evaluate`] (which then counts `2N` evaluations).
    pub fn gradient(&self, a: &[f64]) -> Result<Vec<f64>> {
        self.gradient_calls.fetch_add(1, Ordering::SeqCst);
        match self.objective.gradient(a) {
            Some(g) => g,
            None => vector::central_gradient(|p| self.evaluate(p), a, FD_GRADIENT_STEP),
        }
    }

    pub fn has_analytic_gradient(&self) -> bool {
        let probe = vec![0.0; self.dimension()];
        self.objective.gradient(&probe).is_some()
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations.load(Ordering::SeqCst)
    }

    pub fn gradient_calls(&self) -> u64 {
        self.gradient_calls.load(Ordering::SeqCst)
    }

    pub fn history(&self) -> Vec<EvaluationRecord> {
        match &self.history {
            Some(h) => {
                let mut records = h.lock().expect("history lock poisoned").clone();
                records.sort_by_key(|r| r.index);
                records
            }
            None => Vec::new(),
        }
    }
}

impl std::fmt::Debug for CostFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CostFunction")
            .field("dimension", &self.dimension())
            .field("evaluations", &self.evaluations())
            .finish()
    }
}

/// Benchmark objectives addressable by name in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase", deny_unknown_fields)]
pub enum ObjectiveSpec {
    Ackley {
        dimension: usize,
    },
    Oscillator {
        #[serde(default, flatten)]
        config: OscillatorConfig,
    },
}

impl ObjectiveSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ObjectiveSpec::Ackley { .. } => "ackley",
            ObjectiveSpec::Oscillator { .. } => "oscillator",
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            ObjectiveSpec::Ackley { dimension } => *dimension,
            ObjectiveSpec::Oscillator { .. } => oscillator::PARAMETERS,
        }
    }

    pub fn validate(&self) -> Vec<String> {
        match self {
            ObjectiveSpec::Ackley { dimension } if *dimension == 0 => {
                vec!["objective.dimension must be at least 1".into()]
            }
            ObjectiveSpec::Ackley { .. } => Vec::new(),
            ObjectiveSpec::Oscillator { config } => config.validate(),
        }
    }

    pub fn build(&self) -> Result<CostFunction> {
        let problems = self.validate();
        if !problems.is_empty() {
            return Err(Error::InvalidConfig(problems));
        }
        Ok(match self {
            ObjectiveSpec::Ackley { dimension } => CostFunction::new(Ackley::new(*dimension)?),
            ObjectiveSpec::Oscillator { config } => {
                CostFunction::new(Oscillator::new(config.clone())?)
            }
        })
    }
}
