use serde::{Deserialize, Serialize};

use super::{classical_sa, isde_sa, Algorithm, AnnealSchedule, RunOptions, RunResult};
use crate::constraints::AdmissibleRegion;
use crate::error::Result;
use crate::isde::IsdePolicy;
use crate::objectives::CostFunction;

/// Metropolis proposals per stage when matching the cost of 40 Langevin steps.
pub const CLASSICAL_STEPS_EQUAL_BUDGET: usize = 170;
pub const ISDE_STEPS_EQUAL_BUDGET: usize = 40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub label: String,
    pub seed: u64,
    pub best_value: f64,
    pub evaluations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub labels: [String; 2],
    pub rows: Vec<ComparisonRow>,
    pub medians: [f64; 2],
}

/// Median of a non-empty sample (mean of the two middle values for even
/// sizes).
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Run two optimizers over the same seeds and report per-seed best values
/// and medians.
pub fn compare<A, B>(labels: [&str; 2], seeds: &[u64], mut first: A, mut second: B) -> Result<ComparisonReport>
where
    A: FnMut(u64) -> Result<RunResult>,
    B: FnMut(u64) -> Result<RunResult>,
{
    let mut rows = Vec::with_capacity(2 * seeds.len());
    let mut bests: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    for &seed in seeds {
        for (i, r) in [first(seed)?, second(seed)?].into_iter().enumerate() {
            bests[i].push(r.best_value);
            rows.push(ComparisonRow {
                label: labels[i].to_string(),
                seed,
                best_value: r.best_value,
                evaluations: r.evaluations,
            });
        }
    }
    Ok(ComparisonReport {
        labels: labels.map(String::from),
        rows,
        medians: [median(&bests[0]), median(&bests[1])],
    })
}

/// Metropolis annealing with 170 proposals per stage against Langevin
/// annealing with 40 steps per stage, same schedule and step rule.
pub fn compare_equal_budget(
    make_cost: impl Fn() -> Result<CostFunction>,
    region: &AdmissibleRegion,
    schedule: &AnnealSchedule,
    policy: &IsdePolicy,
    seeds: &[u64],
) -> Result<ComparisonReport> {
    let classical_policy = IsdePolicy {
        steps: CLASSICAL_STEPS_EQUAL_BUDGET,
        ..*policy
    };
    let isde_policy = IsdePolicy {
        steps: ISDE_STEPS_EQUAL_BUDGET,
        ..*policy
    };
    compare(
        [Algorithm::Classical.as_str(), Algorithm::Isde.as_str()],
        seeds,
        |seed| classical_sa(&make_cost()?, region, schedule, &classical_policy, seed, RunOptions::default()),
        |seed| isde_sa(&make_cost()?, region, schedule, &isde_policy, seed, RunOptions::default()),
    )
}
