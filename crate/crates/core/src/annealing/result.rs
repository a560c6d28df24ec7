use serde::{Deserialize, Serialize};

use crate::surrogate::PolyharmonicSurrogate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Classical,
    Isde,
    ApproxIsde,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Classical => "classical",
            Algorithm::Isde => "isde",
            Algorithm::ApproxIsde => "approx-isde",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Cumulative event counts of a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunCounters {
    /// Gradients rescaled by the norm cap.
    pub gradient_caps: u64,
    /// Stages re-integrated with a halved step after a divergence.
    pub retries: u64,
    /// Metropolis proposals outside the hard region (classical only).
    pub out_of_region: u64,
    /// Accepted Metropolis moves (classical only).
    pub accepted_moves: u64,
    /// Accepted surrogate enrichments.
    pub enrichments: u64,
    /// Stage endpoints too close to an existing control point.
    pub rejected_duplicates: u64,
    /// Refits that failed after the endpoint was evaluated.
    pub fit_failures: u64,
    /// Stage endpoints where the cost is undefined (outside the objective's
    /// domain or a diverged simulation); they are not added.
    pub failed_evaluations: u64,
}

/// One row of the per-stage trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: usize,
    pub temperature: f64,
    /// Spectral estimate and step used in this stage (NaN where unused).
    pub lambda_max: f64,
    pub step_size: f64,
    /// Stage endpoint `A^k`.
    pub point: Vec<f64>,
    pub exact_cost: Option<f64>,
    pub surrogate_cost: Option<f64>,
    pub best_value: f64,
    pub best_point: Vec<f64>,
    /// Cumulative exact-cost evaluations at the end of the stage.
    pub evaluations: u64,
    pub counters: RunCounters,
}

/// A recorded sampler position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub stage: usize,
    pub step: usize,
    pub position: Vec<f64>,
    pub psi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub chains: usize,
    pub best_point: Vec<f64>,
    pub best_value: f64,
    pub evaluations: u64,
    pub counters: RunCounters,
    pub stages: Vec<StageRecord>,
    /// Final control points, for surrogate runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub control_points: Option<Vec<Vec<f64>>>,
    #[serde(skip)]
    pub trajectory: Option<Vec<TrajectoryRow>>,
    /// Final surrogate, for surrogate runs.
    #[serde(skip)]
    pub surrogate: Option<PolyharmonicSurrogate>,
}

impl RunResult {
    pub(crate) fn new(algorithm: Algorithm, seed: u64, chains: usize, dimension: usize) -> Self {
        RunResult {
            algorithm,
            seed,
            chains,
            best_point: vec![f64::NAN; dimension],
            best_value: f64::INFINITY,
            evaluations: 0,
            counters: RunCounters::default(),
            stages: Vec::new(),
            control_points: None,
            trajectory: None,
            surrogate: None,
        }
    }

    pub(crate) fn offer(&mut self, point: &[f64], value: f64) {
        if value < self.best_value {
            self.best_value = value;
            self.best_point = point.to_vec();
        }
    }

    pub fn dimension(&self) -> usize {
        self.best_point.len()
    }
}
