use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{aborted, chain_rng, init_rng, integrate_stage, sampling_box, thread_pool, RunOptions};
use super::{Algorithm, AnnealSchedule, RunResult, StageRecord, TrajectoryRow};
use crate::constraints::AdmissibleRegion;
use crate::error::{Error, Result};
use crate::isde::{CostModel, IsdePolicy, IsdeState, Potential};
use crate::objectives::CostFunction;
use crate::surrogate::{Enrichment, PolyharmonicSurrogate, SurrogateOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ApproxSettings {
    /// Spline order `p`.
    pub order: u32,
    /// Number of random control points fitted before the first stage.
    pub initial_points: usize,
    /// Fixed weight-sum target; `None` uses the data-scaled default.
    pub weight_sum: Option<f64>,
    /// Minimum separation; `None` uses `1e-6` times the sampling-box diameter.
    pub min_separation: Option<f64>,
    /// Langevin chains integrated concurrently per stage. Experiment configs
    /// set this from their top-level `chains` field.
    #[serde(skip)]
    pub chains: usize,
}

impl Default for ApproxSettings {
    fn default() -> Self {
        ApproxSettings {
            order: 2,
            initial_points: 140,
            weight_sum: None,
            min_separation: None,
            chains: 1,
        }
    }
}

impl ApproxSettings {
    pub fn validate(&self, dimension: usize) -> Vec<String> {
        let mut problems = Vec::new();
        if self.order < 2 {
            problems.push("surrogate.order must be at least 2".into());
        }
        if self.initial_points < dimension + 2 {
            problems.push(format!(
                "surrogate.initial_points must be at least dimension + 2 = {}",
                dimension + 2
            ));
        }
        if let Some(eps) = self.weight_sum {
            if !(eps.is_finite() && eps > 0.0) {
                problems.push("surrogate.weight_sum must be positive".into());
            }
        }
        if let Some(d) = self.min_separation {
            if !(d.is_finite() && d > 0.0) {
                problems.push("surrogate.min_separation must be positive".into());
            }
        }
        if self.chains == 0 {
            problems.push("chains must be at least 1".into());
        }
        problems
    }

    fn surrogate_options(&self, diameter: f64) -> SurrogateOptions {
        let options = SurrogateOptions {
            order: self.order,
            weight_sum: self.weight_sum,
            ..SurrogateOptions::default()
        }
        .with_domain_diameter(diameter);
        match self.min_separation {
            Some(d) => SurrogateOptions {
                min_separation: d,
                ..options
            },
            None => options,
        }
    }
}

struct ChainStage {
    state: IsdeState,
    lambda_max: f64,
    step_size: f64,
    retried: bool,
    cap_events: u64,
    trajectory: Option<Vec<crate::isde::TrajectoryPoint>>,
}

/// Langevin annealing on a polyharmonic surrogate of the cost, enriched with
/// every stage endpoint.
///
/// Chains integrate concurrently against the same frozen surrogate; their
/// endpoints are then evaluated and added in ascending chain index. The
/// returned best point is the control point (or failed-refit candidate) with
/// the lowest exact cost. With a single chain the result is a pure function
/// of `(seed, settings)`.
pub fn approx_isde_sa(
    cost: &CostFunction,
    region: &AdmissibleRegion,
    schedule: &AnnealSchedule,
    settings: &ApproxSettings,
    policy: &IsdePolicy,
    seed: u64,
    options: RunOptions,
) -> Result<RunResult> {
    let n = region.dimension();
    let problems = settings.validate(n);
    if !problems.is_empty() {
        return Err(Error::InvalidConfig(problems));
    }
    let (lower, upper) = sampling_box(region)?;
    let diameter = region.diameter().unwrap_or(1.0);
    let evaluations_before = cost.evaluations();
    let mut result = RunResult::new(Algorithm::ApproxIsde, seed, settings.chains, n);
    if options.record_trajectory {
        result.trajectory = Some(Vec::new());
    }

    let mut rng = init_rng(seed);
    let points: Vec<Vec<f64>> = (0..settings.initial_points)
        .map(|_| {
            lower
                .iter()
                .zip(&upper)
                .map(|(l, u)| rng.random_range(*l..*u))
                .collect()
        })
        .collect();
    let values: Result<Vec<f64>> = points.par_iter().map(|p| cost.evaluate(p)).collect();
    result.evaluations = cost.evaluations() - evaluations_before;
    let values = match values {
        Ok(v) => v,
        Err(e) => return Err(aborted(0, result, e)),
    };
    for (p, v) in points.iter().zip(&values) {
        result.offer(p, *v);
    }
    let mut surrogate =
        match PolyharmonicSurrogate::fit(points, values, settings.surrogate_options(diameter)) {
            Ok(s) => s,
            Err(e) => return Err(aborted(0, result, e)),
        };

    let mut rngs: Vec<_> = (0..settings.chains).map(|c| chain_rng(seed, c)).collect();
    let mut states: Vec<IsdeState> = rngs
        .iter_mut()
        .map(|r| IsdeState::random(&lower, &upper, r))
        .collect();
    let pool = if settings.chains > 1 {
        Some(thread_pool(settings.chains)?)
    } else {
        None
    };

    for (k, temperature) in schedule.temperatures() {
        let frozen = &surrogate;
        let run_chain = |(state, rng): (&IsdeState, &mut rand_chacha::ChaCha8Rng)| -> Result<ChainStage> {
            let potential = Potential::new(temperature, CostModel::Surrogate(frozen), region)?
                .with_gradient_cap(policy.gradient_cap);
            let stage = integrate_stage(state, &potential, policy, rng, options.record_trajectory)?;
            Ok(ChainStage {
                state: stage.integration.state,
                lambda_max: stage.lambda_max,
                step_size: stage.config.step_size,
                retried: stage.retried,
                cap_events: potential.cap_events(),
                trajectory: stage.integration.trajectory,
            })
        };
        let outcomes: Vec<Result<ChainStage>> = match &pool {
            Some(pool) => pool.install(|| {
                states
                    .par_iter()
                    .zip(rngs.par_iter_mut())
                    .map(run_chain)
                    .collect()
            }),
            None => states.iter().zip(rngs.iter_mut()).map(run_chain).collect(),
        };
        let mut chains = Vec::with_capacity(outcomes.len());
        for outcome in outcomes {
            match outcome {
                Ok(c) => chains.push(c),
                Err(e) => return Err(aborted(k, result, e)),
            }
        }

        // enrichment in ascending chain index
        let mut stage_best: Option<(usize, f64)> = None;
        let mut predictions = Vec::with_capacity(chains.len());
        for (c, chain) in chains.iter().enumerate() {
            result.counters.gradient_caps += chain.cap_events;
            result.counters.retries += chain.retried as u64;
            let endpoint = &chain.state.position;
            predictions.push(surrogate.predict(endpoint));
            if let Some((_, distance)) = surrogate.nearest(endpoint) {
                if distance < surrogate.min_separation() {
                    result.counters.rejected_duplicates += 1;
                    continue;
                }
            }
            let value = cost.evaluate(endpoint);
            result.evaluations = cost.evaluations() - evaluations_before;
            let value = match value {
                Ok(v) => v,
                Err(Error::InvalidArgument(_)) | Err(Error::DivergedSimulation { .. }) => {
                    result.counters.failed_evaluations += 1;
                    continue;
                }
                Err(e) => return Err(aborted(k, result, e)),
            };
            result.offer(endpoint, value);
            if stage_best.is_none_or(|(_, v)| value < v) {
                stage_best = Some((c, value));
            }
            match surrogate.add_control_point(endpoint, value) {
                Ok(Enrichment::Accepted) => result.counters.enrichments += 1,
                Ok(Enrichment::Rejected { .. }) => result.counters.rejected_duplicates += 1,
                Err(Error::FitFailure { .. }) | Err(Error::DuplicatePoint { .. }) => {
                    result.counters.fit_failures += 1
                }
                Err(e) => return Err(aborted(k, result, e)),
            }
        }

        let shown = stage_best.map(|(c, _)| c).unwrap_or(0);
        if let Some(rows) = result.trajectory.as_mut() {
            for (c, chain) in chains.iter_mut().enumerate() {
                if c != shown {
                    continue;
                }
                if let Some(traj) = chain.trajectory.take() {
                    rows.extend(traj.into_iter().map(|p| TrajectoryRow {
                        stage: k,
                        step: p.step,
                        position: p.position,
                        psi: p.psi,
                    }));
                }
            }
        }
        result.stages.push(StageRecord {
            stage: k,
            temperature,
            lambda_max: chains[shown].lambda_max,
            step_size: chains[shown].step_size,
            point: chains[shown].state.position.clone(),
            exact_cost: stage_best.map(|(_, v)| v),
            surrogate_cost: Some(predictions[shown]),
            best_value: result.best_value,
            best_point: result.best_point.clone(),
            evaluations: result.evaluations,
            counters: result.counters,
        });
        states = chains.into_iter().map(|c| c.state).collect();
    }

    result.control_points = Some(surrogate.points().to_vec());
    result.surrogate = Some(surrogate);
    Ok(result)
}
