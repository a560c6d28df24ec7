//! The annealing drivers: Metropolis annealing, Langevin annealing on the
//! exact cost, and Langevin annealing on an adaptively enriched surrogate.
//!
//! Random streams: all generators are `ChaCha8Rng::seed_from_u64(seed)`;
//! stream 0 draws initial control points, stream `i + 1` drives chain `i`.

mod approx;
mod classical;
mod compare;
mod exact;
mod result;
mod schedule;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::isde::{self, Integration, IsdeConfig, IsdePolicy, IsdeState, PotentialField};

pub use approx::{approx_isde_sa, ApproxSettings};
pub use classical::classical_sa;
pub use compare::{compare, compare_equal_budget, median, ComparisonReport, ComparisonRow};
pub use exact::{isde_sa, IsdeAnnealer};
pub use result::{Algorithm, RunCounters, RunResult, StageRecord, TrajectoryRow};
pub use schedule::AnnealSchedule;

/// Environment variable capping the number of worker threads for chains.
pub const THREADS_ENV: &str = "ISDE_ANNEAL_THREADS";

/// Knobs shared by every driver.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunOptions {
    /// Keep every sampler position (Langevin drivers only).
    pub record_trajectory: bool,
}

/// Generator for chain `chain` of a run with master seed `seed`.
pub fn chain_rng(seed: u64, chain: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain as u64 + 1);
    rng
}

pub(crate) fn init_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0);
    rng
}

/// Thread cap from [`THREADS_ENV`], if set to a positive integer.
pub fn thread_limit() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|n| *n > 0)
}

pub(crate) fn thread_pool(chains: usize) -> Result<rayon::ThreadPool> {
    let threads = thread_limit()
        .unwrap_or_else(rayon::current_num_threads)
        .min(chains)
        .max(1);
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker threads: {e}")))
}

/// Metropolis rule: always accept a decrease, otherwise accept with
/// probability `exp(-delta / T)`.
pub fn metropolis_accept<R: Rng + ?Sized>(delta: f64, temperature: f64, rng: &mut R) -> bool {
    if delta <= 0.0 {
        return true;
    }
    let u: f64 = rng.random();
    u < (-delta / temperature).exp()
}

pub(crate) struct StageIntegration {
    pub integration: Integration,
    pub config: IsdeConfig,
    pub lambda_max: f64,
    pub retried: bool,
}

/// Estimate the spectral step at the stage's initial point and integrate
/// one stage, retrying once with half the step after a divergence.
pub(crate) fn integrate_stage<F: PotentialField + ?Sized, R: Rng + ?Sized>(
    state: &IsdeState,
    field: &F,
    policy: &IsdePolicy,
    rng: &mut R,
    record: bool,
) -> Result<StageIntegration> {
    let lambda_max = isde::estimate_lambda_max(field, &state.position)?;
    let config = policy.stage_config(lambda_max);
    match isde::integrate(state, field, &config, rng, record) {
        Ok(integration) => Ok(StageIntegration {
            integration,
            config,
            lambda_max,
            retried: false,
        }),
        Err(Error::DivergedState { .. }) => {
            let config = IsdeConfig {
                step_size: 0.5 * config.step_size,
                ..config
            };
            let integration = isde::integrate(state, field, &config, rng, record)?;
            Ok(StageIntegration {
                integration,
                config,
                lambda_max,
                retried: true,
            })
        }
        Err(e) => Err(e),
    }
}

pub(crate) fn aborted(stage: usize, partial: RunResult, source: Error) -> Error {
    Error::Aborted {
        stage,
        partial: Box::new(partial),
        source: Box::new(source),
    }
}

pub(crate) fn sampling_box(region: &crate::constraints::AdmissibleRegion) -> Result<(Vec<f64>, Vec<f64>)> {
    region.sampling_box().ok_or_else(|| {
        Error::invalid("region has no bounded sampling box; set seed_upper for positive regions")
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metropolis_frequencies() {
        let mut rng = chain_rng(3, 0);
        assert!((0..1000).all(|_| metropolis_accept(-0.5, 1.0, &mut rng)));
        assert!((0..1000).all(|_| !metropolis_accept(1.0, 1e-300, &mut rng)));
        let trials = 10_000;
        let hits = (0..trials)
            .filter(|_| metropolis_accept(0.7, 0.7, &mut rng))
            .count();
        let rate = hits as f64 / trials as f64;
        assert!((rate - (-1.0f64).exp()).abs() < 0.02, "{rate}");
    }

    #[test]
    fn chain_streams_differ_and_repeat() {
        let draw = |seed, chain| -> Vec<u64> {
            let mut r = chain_rng(seed, chain);
            (0..4).map(|_| r.random()).collect()
        };
        assert_eq!(draw(9, 2), draw(9, 2));
        assert_ne!(draw(9, 0), draw(9, 1));
        let mut init = init_rng(9);
        let first: u64 = init.random();
        assert_ne!(first, draw(9, 0)[0]);
    }
}
