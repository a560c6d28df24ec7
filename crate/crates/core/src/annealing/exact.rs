use rand_chacha::ChaCha8Rng;

use super::{aborted, chain_rng, integrate_stage, sampling_box, RunOptions};
use super::{Algorithm, AnnealSchedule, RunResult, StageRecord, TrajectoryRow};
use crate::constraints::AdmissibleRegion;
use crate::error::Result;
use crate::isde::{CostModel, IsdePolicy, IsdeState, Potential};
use crate::objectives::CostFunction;

/// Stage-by-stage Langevin annealing on the exact cost. Each stage starts
/// from the previous stage's final position and velocity.
pub struct IsdeAnnealer<'a> {
    cost: &'a CostFunction,
    region: &'a AdmissibleRegion,
    schedule: AnnealSchedule,
    policy: IsdePolicy,
    options: RunOptions,
    rng: ChaCha8Rng,
    state: IsdeState,
    result: RunResult,
    next_stage: usize,
    evaluations_before: u64,
}

impl<'a> IsdeAnnealer<'a> {
    pub fn new(
        cost: &'a CostFunction,
        region: &'a AdmissibleRegion,
        schedule: &AnnealSchedule,
        policy: &IsdePolicy,
        seed: u64,
        options: RunOptions,
    ) -> Result<Self> {
        let (lower, upper) = sampling_box(region)?;
        let mut rng = chain_rng(seed, 0);
        let state = IsdeState::random(&lower, &upper, &mut rng);
        let mut result = RunResult::new(Algorithm::Isde, seed, 1, region.dimension());
        if options.record_trajectory {
            result.trajectory = Some(Vec::new());
        }
        Ok(IsdeAnnealer {
            cost,
            region,
            schedule: *schedule,
            policy: *policy,
            options,
            rng,
            state,
            result,
            next_stage: 1,
            evaluations_before: cost.evaluations(),
        })
    }

    /// State the next stage will start from.
    pub fn state(&self) -> &IsdeState {
        &self.state
    }

    pub fn is_finished(&self) -> bool {
        self.next_stage > self.schedule.stages
    }

    /// Run the next stage; `None` once the schedule is exhausted.
    pub fn run_stage(&mut self) -> Result<Option<&StageRecord>> {
        if self.is_finished() {
            return Ok(None);
        }
        let k = self.next_stage;
        let temperature = self.schedule.temperature(k);
        let potential = Potential::new(temperature, CostModel::Exact(self.cost), self.region)?
            .with_gradient_cap(self.policy.gradient_cap);
        let stage = integrate_stage(
            &self.state,
            &potential,
            &self.policy,
            &mut self.rng,
            self.options.record_trajectory,
        );
        self.result.counters.gradient_caps += potential.cap_events();
        let stage = stage?;
        if stage.retried {
            self.result.counters.retries += 1;
        }
        let end = stage.integration.state;
        let value = self.cost.evaluate(&end.position);
        self.result.evaluations = self.cost.evaluations() - self.evaluations_before;
        let value = value?;
        self.result.offer(&end.position, value);
        if let (Some(rows), Some(traj)) = (self.result.trajectory.as_mut(), stage.integration.trajectory) {
            rows.extend(traj.into_iter().map(|p| TrajectoryRow {
                stage: k,
                step: p.step,
                position: p.position,
                psi: p.psi,
            }));
        }
        self.result.stages.push(StageRecord {
            stage: k,
            temperature,
            lambda_max: stage.lambda_max,
            step_size: stage.config.step_size,
            point: end.position.clone(),
            exact_cost: Some(value),
            surrogate_cost: None,
            best_value: self.result.best_value,
            best_point: self.result.best_point.clone(),
            evaluations: self.result.evaluations,
            counters: self.result.counters,
        });
        self.state = end;
        self.next_stage += 1;
        Ok(self.result.stages.last())
    }

    /// Run the remaining stages. Failures are wrapped with the partial
    /// result.
    pub fn run(mut self) -> Result<RunResult> {
        while !self.is_finished() {
            if let Err(e) = self.run_stage() {
                return Err(aborted(self.next_stage, self.result, e));
            }
        }
        Ok(self.result)
    }

    pub fn into_result(self) -> RunResult {
        self.result
    }
}

/// Langevin annealing on the exact cost; see [`IsdeAnnealer`].
pub fn isde_sa(
    cost: &CostFunction,
    region: &AdmissibleRegion,
    schedule: &AnnealSchedule,
    policy: &IsdePolicy,
    seed: u64,
    options: RunOptions,
) -> Result<RunResult> {
    IsdeAnnealer::new(cost, region, schedule, policy, seed, options)?.run()
}
