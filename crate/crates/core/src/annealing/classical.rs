use rand::Rng;
use rand_distr::StandardNormal;

use super::{aborted, chain_rng, metropolis_accept, sampling_box, RunOptions};
use super::{Algorithm, AnnealSchedule, RunResult, StageRecord};
use crate::constraints::AdmissibleRegion;
use crate::error::Result;
use crate::isde::{self, CostModel, IsdePolicy, Potential};
use crate::objectives::CostFunction;

/// Metropolis annealing with Gaussian random-walk proposals.
///
/// Each stage runs `policy.steps` proposals at `T_k`. The proposal standard
/// deviation is the Langevin step the same policy would pick at the stage's
/// initial point, so both drivers share one step-size rule. Proposals
/// outside the hard region are rejected without evaluating the cost.
pub fn classical_sa(
    cost: &CostFunction,
    region: &AdmissibleRegion,
    schedule: &AnnealSchedule,
    policy: &IsdePolicy,
    seed: u64,
    _options: RunOptions,
) -> Result<RunResult> {
    let n = region.dimension();
    let (lower, upper) = sampling_box(region)?;
    let mut rng = chain_rng(seed, 0);
    let mut current: Vec<f64> = lower
        .iter()
        .zip(&upper)
        .map(|(l, u)| rng.random_range(*l..*u))
        .collect();
    let evaluations_before = cost.evaluations();
    let mut result = RunResult::new(Algorithm::Classical, seed, 1, n);
    let mut current_value = match cost.evaluate(&current) {
        Ok(v) => v,
        Err(e) => return Err(aborted(0, result, e)),
    };
    result.offer(&current, current_value);

    let mut candidate = vec![0.0; n];
    for (k, temperature) in schedule.temperatures() {
        let stage = (|| -> Result<(f64, f64)> {
            let potential = Potential::new(temperature, CostModel::Exact(cost), region)?
                .with_gradient_cap(policy.gradient_cap);
            let lambda = isde::estimate_lambda_max(&potential, &current)?;
            let scale = policy.stage_config(lambda).step_size;
            for _ in 0..policy.steps {
                for i in 0..n {
                    candidate[i] = current[i] + scale * rng.sample::<f64, _>(StandardNormal);
                }
                if !region.contains(&candidate) {
                    result.counters.out_of_region += 1;
                    continue;
                }
                let value = cost.evaluate(&candidate)?;
                result.offer(&candidate, value);
                if metropolis_accept(value - current_value, temperature, &mut rng) {
                    current.copy_from_slice(&candidate);
                    current_value = value;
                    result.counters.accepted_moves += 1;
                }
            }
            Ok((lambda, scale))
        })();
        let (lambda, scale) = match stage {
            Ok(s) => s,
            Err(e) => {
                result.evaluations = cost.evaluations() - evaluations_before;
                return Err(aborted(k, result, e));
            }
        };
        result.evaluations = cost.evaluations() - evaluations_before;
        result.stages.push(StageRecord {
            stage: k,
            temperature,
            lambda_max: lambda,
            step_size: scale,
            point: current.clone(),
            exact_cost: Some(current_value),
            surrogate_cost: None,
            best_value: result.best_value,
            best_point: result.best_point.clone(),
            evaluations: result.evaluations,
            counters: result.counters,
        });
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::{Ackley, Objective};

    struct Bowl;
    impl Objective for Bowl {
        fn dimension(&self) -> usize {
            1
        }
        fn value(&self, a: &[f64]) -> Result<f64> {
            Ok(a[0] * a[0])
        }
        fn gradient(&self, a: &[f64]) -> Option<Result<Vec<f64>>> {
            Some(Ok(vec![2.0 * a[0]]))
        }
    }

    fn unit_interval() -> AdmissibleRegion {
        AdmissibleRegion::bounded(vec![-1.0], vec![1.0], Some(vec![0.05])).unwrap()
    }

    #[test]
    fn convex_one_dimensional_bowl() {
        let schedule = AnnealSchedule::new(1.0, 0.05, 1e-4, 200);
        let policy = IsdePolicy {
            steps: 20,
            ..IsdePolicy::default()
        };
        let hits = (0..10)
            .filter(|&seed| {
                let cost = CostFunction::new(Bowl);
                let r = classical_sa(&cost, &unit_interval(), &schedule, &policy, seed, RunOptions::default())
                    .unwrap();
                r.best_point[0].abs() < 0.05
            })
            .count();
        assert!(hits >= 9, "{hits}");
    }

    #[test]
    fn frozen_schedule_never_goes_uphill() {
        // T is astronomically small: every accepted move must be a descent
        let schedule = AnnealSchedule::new(1e-300, 0.0, 0.0, 1);
        let policy = IsdePolicy {
            steps: 1000,
            ..IsdePolicy::default()
        };
        let cost = CostFunction::new(Ackley::new(2).unwrap()).with_history();
        let region = AdmissibleRegion::bounded(vec![-5.0; 2], vec![5.0; 2], None).unwrap();
        let r = classical_sa(&cost, &region, &schedule, &policy, 7, RunOptions::default()).unwrap();
        let history = cost.history();
        let mut current = history[0].value;
        for rec in &history[1..] {
            if rec.value <= current {
                current = rec.value;
            }
        }
        assert_eq!(r.stages[0].exact_cost, Some(current));
    }

    #[test]
    fn accounting_and_trace() {
        let schedule = AnnealSchedule::new(1.0, 0.1, 0.01, 7);
        let policy = IsdePolicy {
            steps: 13,
            ..IsdePolicy::default()
        };
        let cost = CostFunction::new(Bowl);
        let r = classical_sa(&cost, &unit_interval(), &schedule, &policy, 1, RunOptions::default())
            .unwrap();
        assert_eq!(r.stages.len(), 7);
        assert_eq!(r.evaluations, cost.evaluations());
        assert_eq!(r.evaluations + r.counters.out_of_region, 1 + 7 * 13);
        assert!(r.stages.windows(2).all(|w| w[1].best_value <= w[0].best_value));
        assert_eq!(r.algorithm, Algorithm::Classical);
    }

    #[test]
    fn reproducible() {
        let schedule = AnnealSchedule::new(3.0, 0.05, 0.01, 30);
        let policy = IsdePolicy::default();
        let region = AdmissibleRegion::bounded(vec![-5.0; 3], vec![5.0; 3], None).unwrap();
        let run = || {
            let cost = CostFunction::new(Ackley::new(3).unwrap());
            classical_sa(&cost, &region, &schedule, &policy, 11, RunOptions::default()).unwrap()
        };
        assert_eq!(run(), run());
    }
}
