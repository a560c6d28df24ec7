//! A small transient-response design problem: two lumped masses moving in the
//! plane, tied to the ground and to each other by four inclined springs, and
//! shaken by a horizontal base acceleration. The design parameters scale the
//! four spring stiffnesses; the cost is the peak displacement norm of the top
//! mass relative to the base.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Objective;
use crate::error::{Error, Result};
use crate::vector;

pub(crate) const PARAMETERS: usize = 4;
const DOF: usize = 4;

type Mat4 = [[f64; DOF]; DOF];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sinusoid {
    /// m/s^2
    pub amplitude: f64,
    /// Hz
    pub frequency: f64,
    /// rad
    pub phase: f64,
}

impl Sinusoid {
    /// `count` sinusoids with amplitudes, frequencies and phases drawn from a
    /// fixed seed, in the band where the reference design resonates.
    pub fn synthetic(seed: u64, count: usize) -> Vec<Sinusoid> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| Sinusoid {
                amplitude: rng.random_range(1.0..3.0),
                frequency: rng.random_range(0.6..1.6),
                phase: rng.random_range(0.0..TAU),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OscillatorConfig {
    /// Bottom and top mass, kg.
    pub masses: [f64; 2],
    /// Stiffness (N/m) of every spring when its scale parameter is 1.
    pub reference_stiffness: f64,
    /// In-plane direction of each spring, degrees from the x axis. Springs 0
    /// and 1 join the ground to the bottom mass, springs 2 and 3 join the two
    /// masses.
    pub spring_angles_deg: [f64; 4],
    /// Rayleigh damping: C = mass_damping * M + stiffness_damping * K.
    pub mass_damping: f64,
    pub stiffness_damping: f64,
    pub forcing: Vec<Sinusoid>,
    /// Time (s) at which the t * exp(1 - t / t_peak) envelope peaks.
    pub envelope_peak: f64,
    pub time_step: f64,
    pub duration: f64,
    /// Displacement (m) beyond which the integration is declared unstable.
    pub blowup_threshold: f64,
    /// Admissible range of each stiffness scale parameter.
    pub scale_bounds: [f64; 2],
}

impl Default for OscillatorConfig {
    fn default() -> Self {
        OscillatorConfig {
            masses: [1200.0, 900.0],
            reference_stiffness: 70_000.0,
            spring_angles_deg: [50.0, 115.0, 35.0, 140.0],
            mass_damping: 0.15,
            stiffness_damping: 0.002,
            forcing: Sinusoid::synthetic(2014, 3),
            envelope_peak: 3.0,
            time_step: 1e-3,
            duration: 12.0,
            blowup_threshold: 1e3,
            scale_bounds: [1e-3, 50.0],
        }
    }
}

impl OscillatorConfig {
    pub fn validate(&self) -> Vec<String> {
        let mut problems = Vec::new();
        if !self.masses.iter().all(|m| m.is_finite() && *m > 0.0) {
            problems.push("oscillator masses must be positive".into());
        }
        if !(self.reference_stiffness.is_finite() && self.reference_stiffness > 0.0) {
            problems.push("oscillator reference_stiffness must be positive".into());
        }
        if !(self.mass_damping >= 0.0 && self.stiffness_damping >= 0.0) {
            problems.push("oscillator damping coefficients must be non-negative".into());
        }
        if !(self.time_step > 0.0 && self.duration > self.time_step) {
            problems.push("oscillator needs 0 < time_step < duration".into());
        }
        if !(self.envelope_peak > 0.0) {
            problems.push("oscillator envelope_peak must be positive".into());
        }
        if !(self.blowup_threshold > 0.0) {
            problems.push("oscillator blowup_threshold must be positive".into());
        }
        let [lo, hi] = self.scale_bounds;
        if !(lo > 0.0 && lo < hi) {
            problems.push("oscillator scale_bounds must satisfy 0 < lower < upper".into());
        }
        problems
    }

    fn base_acceleration(&self, t: f64) -> f64 {
        let s = t / self.envelope_peak;
        let envelope = s * (1.0 - s).exp();
        envelope
            * self
                .forcing
                .iter()
                .map(|w| w.amplitude * (TAU * w.frequency * t + w.phase).sin())
                .sum::<f64>()
    }

    /// Stiffness matrix for DOF order (x1, y1, x2, y2).
    pub fn stiffness_matrix(&self, scales: &[f64]) -> [[f64; 4]; 4] {
        let mut k: Mat4 = [[0.0; DOF]; DOF];
        for (spring, (&scale, &angle)) in scales.iter().zip(&self.spring_angles_deg).enumerate() {
            let stiffness = scale * self.reference_stiffness;
            let (s, c) = angle.to_radians().sin_cos();
            let e = [c, s];
            let local = |i: usize, j: usize| stiffness * e[i] * e[j];
            if spring < 2 {
                for i in 0..2 {
                    for j in 0..2 {
                        k[i][j] += local(i, j);
                    }
                }
            } else {
                for i in 0..2 {
                    for j in 0..2 {
                        let kij = local(i, j);
                        k[i][j] += kij;
                        k[2 + i][2 + j] += kij;
                        k[i][2 + j] -= kij;
                        k[2 + i][j] -= kij;
                    }
                }
            }
        }
        k
    }
}

/// Peak displacement norm of the top mass over the configured time window,
/// integrated with fixed-step semi-implicit Euler.
pub fn oscillator_design_cost(a: &[f64], config: &OscillatorConfig) -> Result<f64> {
    if a.len() != PARAMETERS {
        return Err(Error::invalid(format!(
            "oscillator expects {PARAMETERS} stiffness scales, got {}",
            a.len()
        )));
    }
    let [lo, hi] = config.scale_bounds;
    if let Some(x) = a.iter().find(|x| !(**x >= lo && **x <= hi)) {
        return Err(Error::invalid(format!(
            "stiffness scale {x} outside [{lo}, {hi}]"
        )));
    }

    let k = config.stiffness_matrix(a);
    let mass = [
        config.masses[0],
        config.masses[0],
        config.masses[1],
        config.masses[1],
    ];
    let mut c: Mat4 = [[0.0; DOF]; DOF];
    for i in 0..DOF {
        for j in 0..DOF {
            c[i][j] = config.stiffness_damping * k[i][j];
        }
        c[i][i] += config.mass_damping * mass[i];
    }

    let dt = config.time_step;
    let steps = (config.duration / dt).round() as usize;
    let mut q = [0.0; DOF];
    let mut v = [0.0; DOF];
    let mut peak = 0.0f64;
    for n in 0..steps {
        let t = n as f64 * dt;
        let ground = config.base_acceleration(t);
        for i in 0..DOF {
            let mut force = 0.0;
            for j in 0..DOF {
                force -= k[i][j] * q[j] + c[i][j] * v[j];
            }
            // base excitation acts along x on both masses
            let inertial = if i % 2 == 0 { ground } else { 0.0 };
            v[i] += dt * (force / mass[i] - inertial);
        }
        for i in 0..DOF {
            q[i] += dt * v[i];
        }
        let top = (q[2] * q[2] + q[3] * q[3]).sqrt();
        if !top.is_finite() || vector::max_abs(&q) > config.blowup_threshold {
            return Err(Error::DivergedSimulation {
                time: t + dt,
                displacement: top,
            });
        }
        peak = peak.max(top);
    }
    Ok(peak)
}

#[derive(Debug, Clone)]
pub struct Oscillator {
    config: OscillatorConfig,
}

impl Oscillator {
    pub fn new(config: OscillatorConfig) -> Result<Self> {
        let problems = config.validate();
        if !problems.is_empty() {
            return Err(Error::InvalidConfig(problems));
        }
        Ok(Oscillator { config })
    }

    pub fn config(&self) -> &OscillatorConfig {
        &self.config
    }
}

impl Objective for Oscillator {
    fn dimension(&self) -> usize {
        PARAMETERS
    }

    fn value(&self, a: &[f64]) -> Result<f64> {
        oscillator_design_cost(a, &self.config)
    }
}
