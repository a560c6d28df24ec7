//! Second-order Langevin sampler.
//!
//! The process `dU = V dr`, `dV = -grad Psi(U) dr - D V / 2 dr + S dW` with
//! `D = S S^T` leaves `exp(-Psi(u) - |v|^2 / 2)` invariant. It is discretized
//! with the modified Euler scheme: velocity first, then position with the
//! new velocity.
//!
//! Step size and damping follow the spectral rule
//! `dr = 2 pi / (m sqrt(lambda_max))`, `D = 2 xi sqrt(lambda_max) I`, with
//! `lambda_max` estimated by power iteration on finite-difference
//! Hessian-vector products.

use std::f64::consts::TAU;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::constraints::AdmissibleRegion;
use crate::error::{Error, Result};
use crate::objectives::CostFunction;
use crate::surrogate::PolyharmonicSurrogate;
use crate::vector;

/// Floor returned by [`estimate_lambda_max`] for flat potentials.
pub const LAMBDA_FLOOR: f64 = 1e-6;
const POWER_ITERATIONS: usize = 50;
const POWER_TOLERANCE: f64 = 1e-3;

/// A differentiable potential `Psi` the sampler can integrate against.
pub trait PotentialField: Sync {
    fn dimension(&self) -> usize;
    fn value(&self, u: &[f64]) -> Result<f64>;
    fn gradient(&self, u: &[f64]) -> Result<Vec<f64>>;
}

/// Cost part of an annealing potential.
#[derive(Debug, Clone, Copy)]
pub enum CostModel<'a> {
    Exact(&'a CostFunction),
    Surrogate(&'a PolyharmonicSurrogate),
}

impl CostModel<'_> {
    pub fn dimension(&self) -> usize {
        match self {
            CostModel::Exact(c) => c.dimension(),
            CostModel::Surrogate(s) => s.dimension(),
        }
    }

    pub fn value(&self, a: &[f64]) -> Result<f64> {
        match self {
            CostModel::Exact(c) => c.evaluate(a),
            CostModel::Surrogate(s) => Ok(s.predict(a)),
        }
    }

    pub fn gradient(&self, a: &[f64]) -> Result<Vec<f64>> {
        match self {
            CostModel::Exact(c) => c.gradient(a),
            CostModel::Surrogate(s) => Ok(s.gradient(a)),
        }
    }
}

/// `Psi_T(a) = D(a) / T - log 1l^reg(a)`.
#[derive(Debug)]
pub struct Potential<'a> {
    temperature: f64,
    cost: CostModel<'a>,
    region: &'a AdmissibleRegion,
    gradient_cap: f64,
    cap_events: AtomicU64,
}

impl<'a> Potential<'a> {
    pub fn new(temperature: f64, cost: CostModel<'a>, region: &'a AdmissibleRegion) -> Result<Self> {
        if !(temperature.is_finite() && temperature > 0.0) {
            return Err(Error::invalid(format!(
                "temperature must be positive, got {temperature}"
            )));
        }
        if cost.dimension() != region.dimension() {
            return Err(Error::invalid(format!(
                "cost has dimension {}, region has dimension {}",
                cost.dimension(),
                region.dimension()
            )));
        }
        Ok(Potential {
            temperature,
            cost,
            region,
            gradient_cap: f64::INFINITY,
            cap_events: AtomicU64::new(0),
        })
    }

    /// Cap on `|grad Psi|`; larger gradients are rescaled and counted.
    pub fn with_gradient_cap(mut self, cap: f64) -> Self {
        self.gradient_cap = cap;
        self
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn cost(&self) -> CostModel<'a> {
        self.cost
    }

    pub fn region(&self) -> &'a AdmissibleRegion {
        self.region
    }

    pub fn psi(&self, a: &[f64]) -> Result<f64> {
        Ok(self.cost.value(a)? / self.temperature - self.region.log_indicator(a))
    }

    /// `grad D / T - grad log 1l^reg`, norm-capped.
    pub fn grad_psi(&self, a: &[f64]) -> Result<Vec<f64>> {
        let mut grad = self.cost.gradient(a)?;
        let indicator = self.region.log_indicator_gradient(a);
        for (g, ind) in grad.iter_mut().zip(&indicator) {
            *g = *g / self.temperature - ind;
        }
        if !vector::all_finite(&grad) {
            return Err(Error::DivergedState {
                step: 0,
                last_valid: Box::new(IsdeState {
                    position: a.to_vec(),
                    velocity: vec![0.0; a.len()],
                }),
            });
        }
        let norm = vector::norm(&grad);
        if norm > self.gradient_cap {
            self.cap_events.fetch_add(1, Ordering::Relaxed);
            let scale = self.gradient_cap / norm;
            grad.iter_mut().for_each(|g| *g *= scale);
        }
        Ok(grad)
    }

    /// Number of gradients rescaled by the cap so far.
    pub fn cap_events(&self) -> u64 {
        self.cap_events.load(Ordering::Relaxed)
    }
}

impl PotentialField for Potential<'_> {
    fn dimension(&self) -> usize {
        self.region.dimension()
    }

    fn value(&self, u: &[f64]) -> Result<f64> {
        self.psi(u)
    }

    fn gradient(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.grad_psi(u)
    }
}

/// `Psi(u) = sum_i k_i u_i^2 / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticWell {
    pub curvature: Vec<f64>,
}

impl QuadraticWell {
    pub fn isotropic(dimension: usize) -> Self {
        QuadraticWell {
            curvature: vec![1.0; dimension],
        }
    }
}

impl PotentialField for QuadraticWell {
    fn dimension(&self) -> usize {
        self.curvature.len()
    }

    fn value(&self, u: &[f64]) -> Result<f64> {
        Ok(0.5 * u.iter().zip(&self.curvature).map(|(x, k)| k * x * x).sum::<f64>())
    }

    fn gradient(&self, u: &[f64]) -> Result<Vec<f64>> {
        Ok(u.iter().zip(&self.curvature).map(|(x, k)| k * x).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsdeState {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
}

impl IsdeState {
    pub fn new(position: Vec<f64>, velocity: Vec<f64>) -> Result<Self> {
        if position.len() != velocity.len() {
            return Err(Error::invalid("position and velocity lengths differ"));
        }
        if !vector::all_finite(&position) || !vector::all_finite(&velocity) {
            return Err(Error::invalid("initial state must be finite"));
        }
        Ok(IsdeState { position, velocity })
    }

    /// Position uniform on the box, velocity standard normal.
    pub fn random<R: Rng + ?Sized>(lower: &[f64], upper: &[f64], rng: &mut R) -> Self {
        let position = lower
            .iter()
            .zip(upper)
            .map(|(l, u)| rng.random_range(*l..*u))
            .collect();
        let velocity = (0..lower.len()).map(|_| rng.sample(StandardNormal)).collect();
        IsdeState { position, velocity }
    }

    pub fn dimension(&self) -> usize {
        self.position.len()
    }

    fn is_finite(&self) -> bool {
        vector::all_finite(&self.position) && vector::all_finite(&self.velocity)
    }
}

/// Per-stage integrator parameters: step `dr`, damping `D = damping * I`
/// (so `S = sqrt(damping) * I`), and the number of points `M_k` of the
/// discretized trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsdeConfig {
    pub step_size: f64,
    pub damping: f64,
    pub steps: usize,
}

impl IsdeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return Err(Error::invalid("ISDE step size must be positive"));
        }
        if !(self.damping.is_finite() && self.damping >= 0.0) {
            return Err(Error::invalid("ISDE damping must be non-negative"));
        }
        if self.step_size * self.damping >= 2.0 {
            return Err(Error::invalid(format!(
                "step * damping = {} must stay below 2",
                self.step_size * self.damping
            )));
        }
        if self.steps == 0 {
            return Err(Error::invalid("ISDE needs at least one point per stage"));
        }
        Ok(())
    }
}

/// How stage parameters are derived from the spectral estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IsdePolicy {
    /// `m` in `dr = 2 pi / (m sqrt(lambda_max))`; must exceed 10.
    pub spectral_divisor: u32,
    /// Largest damping rate `xi`.
    pub damping_ratio: f64,
    /// `M_k`, points per stage (the stage integrates `M_k - 1` steps).
    pub steps: usize,
    pub gradient_cap: f64,
    /// Upper clip on `dr` for nearly flat potentials.
    pub max_step: f64,
}

impl Default for IsdePolicy {
    fn default() -> Self {
        IsdePolicy {
            spectral_divisor: 20,
            damping_ratio: 0.7,
            steps: 40,
            gradient_cap: 1e6,
            max_step: 1.0,
        }
    }
}

impl IsdePolicy {
    pub fn validate(&self) -> Vec<String> {
        let mut problems = Vec::new();
        if self.spectral_divisor <= 10 {
            problems.push(format!(
                "isde.spectral_divisor must exceed 10, got {}",
                self.spectral_divisor
            ));
        }
        if !(self.damping_ratio > 0.0 && self.damping_ratio < 1.0) {
            problems.push("isde.damping_ratio must lie in (0, 1)".into());
        } else if 2.0 * TAU * self.damping_ratio / self.spectral_divisor as f64 >= 2.0 {
            problems.push("isde step * damping would reach 2".into());
        }
        if self.steps == 0 {
            problems.push("isde.steps must be at least 1".into());
        }
        if !(self.gradient_cap > 0.0) {
            problems.push("isde.gradient_cap must be positive".into());
        }
        if !(self.max_step > 0.0 && self.max_step.is_finite()) {
            problems.push("isde.max_step must be positive".into());
        }
        problems
    }

    pub fn stage_config(&self, lambda_max: f64) -> IsdeConfig {
        IsdeConfig {
            step_size: step_size(lambda_max, self.spectral_divisor).min(self.max_step),
            damping: damping_coefficient(lambda_max, self.damping_ratio),
            steps: self.steps,
        }
    }
}

/// `dr = 2 pi / (m sqrt(lambda_max))`.
pub fn step_size(lambda_max: f64, divisor: u32) -> f64 {
    TAU / (divisor as f64 * lambda_max.sqrt())
}

/// `2 xi sqrt(lambda_max)`.
pub fn damping_coefficient(lambda_max: f64, damping_ratio: f64) -> f64 {
    2.0 * damping_ratio * lambda_max.sqrt()
}

/// `N` independent `N(0, dr)` draws.
pub fn wiener_increment<R: Rng + ?Sized>(rng: &mut R, n: usize, step: f64) -> Vec<f64> {
    let sd = step.sqrt();
    (0..n)
        .map(|_| sd * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// One modified-Euler update with a given Wiener increment.
pub fn step_with_increment<F: PotentialField + ?Sized>(
    state: &IsdeState,
    field: &F,
    config: &IsdeConfig,
    increment: &[f64],
) -> Result<IsdeState> {
    let dr = config.step_size;
    let decay = 1.0 - 0.5 * dr * config.damping;
    let noise = config.damping.sqrt();
    let grad = field.gradient(&state.position).map_err(|e| match e {
        Error::DivergedState { .. } => Error::DivergedState {
            step: 0,
            last_valid: Box::new(state.clone()),
        },
        other => other,
    })?;
    let velocity: Vec<f64> = state
        .velocity
        .iter()
        .zip(&grad)
        .zip(increment)
        .map(|((v, g), dw)| decay * v - dr * g + noise * dw)
        .collect();
    let position = state
        .position
        .iter()
        .zip(&velocity)
        .map(|(u, v)| u + dr * v)
        .collect();
    let next = IsdeState { position, velocity };
    if !next.is_finite() {
        return Err(Error::DivergedState {
            step: 0,
            last_valid: Box::new(state.clone()),
        });
    }
    Ok(next)
}

pub fn step<F: PotentialField + ?Sized, R: Rng + ?Sized>(
    state: &IsdeState,
    field: &F,
    config: &IsdeConfig,
    rng: &mut R,
) -> Result<IsdeState> {
    let dw = wiener_increment(rng, state.dimension(), config.step_size);
    step_with_increment(state, field, config, &dw)
}

/// A recorded point of a stage trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPoint {
    /// 1-based index within the stage; point 1 is the stage's initial state.
    pub step: usize,
    pub position: Vec<f64>,
    pub psi: f64,
}

#[derive(Debug, Clone)]
pub struct Integration {
    pub state: IsdeState,
    pub trajectory: Option<Vec<TrajectoryPoint>>,
}

/// Apply [`step`] `M_k - 1` times. With `record`, every visited position
/// (including the initial one) is returned together with its `Psi` value.
/// On divergence the error carries the failing step index.
pub fn integrate<F: PotentialField + ?Sized, R: Rng + ?Sized>(
    state: &IsdeState,
    field: &F,
    config: &IsdeConfig,
    rng: &mut R,
    record: bool,
) -> Result<Integration> {
    config.validate()?;
    let mut trajectory = if record {
        Some(vec![TrajectoryPoint {
            step: 1,
            position: state.position.clone(),
            psi: field.value(&state.position)?,
        }])
    } else {
        None
    };
    let mut current = state.clone();
    for l in 1..config.steps {
        current = match step(&current, field, config, rng) {
            Ok(next) => next,
            Err(Error::DivergedState { last_valid, .. }) => {
                return Err(Error::DivergedState {
                    step: l,
                    last_valid,
                })
            }
            Err(e) => return Err(e),
        };
        if let Some(t) = trajectory.as_mut() {
            t.push(TrajectoryPoint {
                step: l + 1,
                position: current.position.clone(),
                psi: field.value(&current.position)?,
            });
        }
    }
    Ok(Integration {
        state: current,
        trajectory,
    })
}

/// Largest-magnitude Hessian eigenvalue of `field` at `u`, floored at
/// [`LAMBDA_FLOOR`].
pub fn estimate_lambda_max<F: PotentialField + ?Sized>(field: &F, u: &[f64]) -> Result<f64> {
    let n = u.len();
    if n == 0 {
        return Ok(LAMBDA_FLOOR);
    }
    let h = 1e-4 * (1.0 + vector::norm(u));
    // fixed, generic start vector keeps the estimate deterministic
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i + 1) as f64).sin()).collect();
    let vn = vector::norm(&v);
    v.iter_mut().for_each(|x| *x /= vn);

    let mut plus = vec![0.0; n];
    let mut minus = vec![0.0; n];
    let mut estimate: Option<f64> = None;
    for _ in 0..POWER_ITERATIONS {
        for i in 0..n {
            plus[i] = u[i] + h * v[i];
            minus[i] = u[i] - h * v[i];
        }
        let gp = field.gradient(&plus)?;
        let gm = field.gradient(&minus)?;
        let hv: Vec<f64> = gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * h)).collect();
        let rayleigh = vector::dot(&v, &hv);
        let norm = vector::norm(&hv);
        if !(norm > 0.0) || !norm.is_finite() {
            return Ok(if norm.is_finite() {
                LAMBDA_FLOOR
            } else {
                f64::MAX
            });
        }
        for (x, y) in v.iter_mut().zip(&hv) {
            *x = y / norm;
        }
        let converged = estimate
            .map(|prev| (rayleigh - prev).abs() <= POWER_TOLERANCE * rayleigh.abs())
            .unwrap_or(false);
        estimate = Some(rayleigh);
        if converged {
            break;
        }
    }
    Ok(estimate.unwrap_or(0.0).abs().max(LAMBDA_FLOOR))
}
