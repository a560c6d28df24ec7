//! Benchmark presets and the surrogate self-check.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::annealing::{
    approx_isde_sa, compare_equal_budget, isde_sa, median, Algorithm, AnnealSchedule,
    ApproxSettings, RunOptions, RunResult,
};
use crate::constraints::AdmissibleRegion;
use crate::error::{Error, Result};
use crate::isde::IsdePolicy;
use crate::objectives::{ackley, Ackley, CostFunction, Oscillator, OscillatorConfig};
use crate::surrogate::{PolyharmonicSurrogate, SurrogateOptions};
use crate::vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Ackley2,
    Ackley32,
    Ackley200Compare,
    Oscillator,
}

impl Suite {
    pub const ALL: [Suite; 4] = [
        Suite::Ackley2,
        Suite::Ackley32,
        Suite::Ackley200Compare,
        Suite::Oscillator,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Ackley2 => "ackley-2",
            Suite::Ackley32 => "ackley-32",
            Suite::Ackley200Compare => "ackley-200-compare",
            Suite::Oscillator => "oscillator",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| {
                let known: Vec<_> = Suite::ALL.iter().map(Suite::name).collect();
                Error::invalid(format!("unknown suite {s:?}; expected one of {}", known.join(", ")))
            })
    }
}

/// Ackley on `[-5, 5]^N` with smoothing width 0.3.
pub fn ackley_region(n: usize) -> AdmissibleRegion {
    AdmissibleRegion::bounded(vec![-5.0; n], vec![5.0; n], Some(vec![0.3; n]))
        .expect("valid Ackley box")
}

/// Two-dimensional Ackley schedule.
pub const ACKLEY_2_SCHEDULE: AnnealSchedule = AnnealSchedule {
    initial_temperature: 36.7,
    decay: 0.02,
    floor: 0.0351,
    stages: 500,
};

/// High-dimensional Ackley schedule.
pub const ACKLEY_HIGH_DIM_SCHEDULE: AnnealSchedule = AnnealSchedule {
    initial_temperature: 2.5,
    decay: 0.02,
    floor: 5.1e-3,
    stages: 500,
};

pub const OSCILLATOR_SCHEDULE: AnnealSchedule = AnnealSchedule {
    initial_temperature: 0.3,
    decay: 0.02,
    floor: 3e-3,
    stages: 200,
};

/// Stiffness range of the oscillator design, N/m.
pub const OSCILLATOR_STIFFNESS_RANGE: [f64; 2] = [5_000.0, 120_000.0];

/// Box in stiffness-scale units matching [`OSCILLATOR_STIFFNESS_RANGE`].
pub fn oscillator_region(config: &OscillatorConfig) -> AdmissibleRegion {
    let [lo, hi] = OSCILLATOR_STIFFNESS_RANGE.map(|k| k / config.reference_stiffness);
    AdmissibleRegion::bounded(vec![lo; 4], vec![hi; 4], None).expect("valid oscillator box")
}

/// Surrogate settings shared by the surrogate presets.
pub fn preset_surrogate() -> ApproxSettings {
    ApproxSettings {
        order: 2,
        initial_points: 140,
        ..ApproxSettings::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteRow {
    pub seed: u64,
    pub algorithm: Algorithm,
    pub best_value: f64,
    pub evaluations: u64,
    /// Largest `|a_i|` of the best point (Ackley suites).
    pub max_abs_component: Option<f64>,
    /// Cost of the nominal design (oscillator suite).
    pub initial_value: Option<f64>,
}

impl SuiteRow {
    fn from_result(r: &RunResult, initial_value: Option<f64>) -> Self {
        SuiteRow {
            seed: r.seed,
            algorithm: r.algorithm,
            best_value: r.best_value,
            evaluations: r.evaluations,
            max_abs_component: Some(vector::max_abs(&r.best_point)),
            initial_value,
        }
    }

    /// `1 - best / initial`, when an initial cost is known.
    pub fn improvement(&self) -> Option<f64> {
        self.initial_value.map(|i| 1.0 - self.best_value / i)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub rows: Vec<SuiteRow>,
    pub passed: bool,
    pub verdict: String,
    pub seconds: f64,
}

impl SuiteReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "seed,algorithm,best_cost,evaluations,max_abs_component,initial_cost,improvement\n",
        );
        for r in &self.rows {
            let opt = |x: Option<f64>| x.map(crate::io::format_number).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.seed,
                r.algorithm,
                crate::io::format_number(r.best_value),
                r.evaluations,
                opt(r.max_abs_component),
                opt(r.initial_value),
                opt(r.improvement()),
            ));
        }
        out
    }
}

fn required(fraction: f64, seeds: usize) -> usize {
    (fraction * seeds as f64).ceil() as usize
}

/// Run a preset over seeds `0..seeds`.
pub fn run_suite(suite: Suite, seeds: usize) -> Result<SuiteReport> {
    if seeds == 0 {
        return Err(Error::invalid("need at least one seed"));
    }
    let start = Instant::now();
    let seed_list: Vec<u64> = (0..seeds as u64).collect();
    let policy = IsdePolicy::default();
    let (rows, passed, verdict) = match suite {
        Suite::Ackley2 => {
            let region = ackley_region(2);
            let mut rows = Vec::new();
            for &seed in &seed_list {
                let cost = CostFunction::new(Ackley::new(2)?);
                let r = isde_sa(&cost, &region, &ACKLEY_2_SCHEDULE, &policy, seed, RunOptions::default())?;
                rows.push(SuiteRow::from_result(&r, None));
            }
            let hits = rows.iter().filter(|r| r.best_value < 0.5).count();
            let need = required(0.8, seeds);
            (rows, hits >= need, format!("best cost < 0.5 in {hits}/{seeds} seeds (need {need})"))
        }
        Suite::Ackley32 => {
            let region = ackley_region(32);
            let settings = preset_surrogate();
            let budget = (settings.initial_points + ACKLEY_HIGH_DIM_SCHEDULE.stages) as u64;
            let mut rows = Vec::new();
            for &seed in &seed_list {
                let cost = CostFunction::new(Ackley::new(32)?);
                let r = approx_isde_sa(
                    &cost,
                    &region,
                    &ACKLEY_HIGH_DIM_SCHEDULE,
                    &settings,
                    &policy,
                    seed,
                    RunOptions::default(),
                )?;
                rows.push(SuiteRow::from_result(&r, None));
            }
            let hits = rows
                .iter()
                .filter(|r| r.max_abs_component.is_some_and(|m| m < 0.5))
                .count();
            let need = required(0.6, seeds);
            let within = rows.iter().all(|r| r.evaluations <= budget);
            (
                rows,
                hits >= need && within,
                format!(
                    "max |a_i| < 0.5 in {hits}/{seeds} seeds (need {need}); evaluations <= {budget}: {within}"
                ),
            )
        }
        Suite::Ackley200Compare => {
            let region = ackley_region(200);
            let report = compare_equal_budget(
                || Ok(CostFunction::new(Ackley::new(200)?)),
                &region,
                &ACKLEY_HIGH_DIM_SCHEDULE,
                &policy,
                &seed_list,
            )?;
            let rows = report
                .rows
                .iter()
                .map(|row| SuiteRow {
                    seed: row.seed,
                    algorithm: if row.label == Algorithm::Classical.as_str() {
                        Algorithm::Classical
                    } else {
                        Algorithm::Isde
                    },
                    best_value: row.best_value,
                    evaluations: row.evaluations,
                    max_abs_component: None,
                    initial_value: None,
                })
                .collect();
            let [classical, isde] = report.medians;
            (
                rows,
                isde < classical,
                format!("median best cost: classical {classical:.6}, isde {isde:.6}"),
            )
        }
        Suite::Oscillator => {
            let config = OscillatorConfig::default();
            let region = oscillator_region(&config);
            let nominal = vec![1.0; 4];
            let initial = crate::objectives::oscillator_design_cost(&nominal, &config)?;
            let mut rows = Vec::new();
            for &seed in &seed_list {
                let cost = CostFunction::new(Oscillator::new(config.clone())?);
                let r = approx_isde_sa(
                    &cost,
                    &region,
                    &OSCILLATOR_SCHEDULE,
                    &preset_surrogate(),
                    &policy,
                    seed,
                    RunOptions::default(),
                )?;
                rows.push(SuiteRow::from_result(&r, Some(initial)));
            }
            let hits = rows.iter().filter(|r| r.best_value <= 0.85 * initial).count();
            let need = required(0.8, seeds);
            let med = median(&rows.iter().filter_map(SuiteRow::improvement).collect::<Vec<_>>());
            (
                rows,
                hits >= need,
                format!(
                    "best <= 0.85 x initial ({initial:.4}) in {hits}/{seeds} seeds (need {need}); median improvement {:.1}%",
                    100.0 * med
                ),
            )
        }
    };
    Ok(SuiteReport {
        suite: suite.name().into(),
        rows,
        passed,
        verdict,
        seconds: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurrogateCheck {
    pub dimension: usize,
    pub points: usize,
    pub order: u32,
    pub seed: u64,
    pub weight_sum: f64,
    /// `max_i |predict(c_i) - d_i| / (1 + |d_i|)`.
    pub interpolation_residual: f64,
    /// `|sum w - eps|`.
    pub weight_sum_residual: f64,
    /// `1e-10 * eps * n_c`.
    pub weight_sum_tolerance: f64,
    /// Largest norm-wise relative error of the analytic gradient against
    /// central differences.
    pub gradient_error: f64,
    pub condition_estimate: f64,
}

impl SurrogateCheck {
    pub fn passed(&self) -> bool {
        self.interpolation_residual < crate::surrogate::INTERPOLATION_TOLERANCE
            && self.weight_sum_residual < self.weight_sum_tolerance
            && self.gradient_error < 1e-5
    }
}

/// Probes at least this far from every control point.
const PROBE_CLEARANCE: f64 = 1e-3;
const GRADIENT_PROBES: usize = 100;

/// Fit a surrogate to Ackley values at `points` uniform samples of
/// `[-5, 5]^dimension` and measure its invariants.
pub fn surrogate_check(dimension: usize, points: usize, order: u32, seed: u64) -> Result<SurrogateCheck> {
    if dimension == 0 || points == 0 {
        return Err(Error::invalid("dimension and point count must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sample = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..dimension).map(|_| rng.random_range(-5.0..5.0)).collect()
    };
    let controls: Vec<Vec<f64>> = (0..points).map(|_| sample(&mut rng)).collect();
    let values = controls.iter().map(|c| ackley(c)).collect::<Result<Vec<_>>>()?;
    let options = SurrogateOptions {
        order,
        ..SurrogateOptions::default()
    }
    .with_domain_diameter(10.0 * (dimension as f64).sqrt());
    let s = PolyharmonicSurrogate::fit(controls, values, options)?;

    let mut gradient_error = 0.0f64;
    let mut probes = 0;
    while probes < GRADIENT_PROBES {
        let a = sample(&mut rng);
        if s.nearest(&a).is_some_and(|(_, d)| d < PROBE_CLEARANCE) {
            continue;
        }
        let g = s.gradient(&a);
        let fd = vector::central_gradient(|p| Ok::<_, Error>(s.predict(p)), &a, 1e-5)?;
        let scale = vector::norm(&g).max(1e-12);
        gradient_error = gradient_error.max(vector::distance(&g, &fd) / scale);
        probes += 1;
    }
    Ok(SurrogateCheck {
        dimension,
        points,
        order,
        seed,
        weight_sum: s.weight_sum(),
        interpolation_residual: s.interpolation_residual(),
        weight_sum_residual: s.weight_sum_residual(),
        weight_sum_tolerance: crate::surrogate::WEIGHT_SUM_TOLERANCE * s.weight_sum() * points as f64,
        gradient_error,
        condition_estimate: s.condition_estimate(),
    })
}
