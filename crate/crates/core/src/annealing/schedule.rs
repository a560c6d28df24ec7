use serde::{Deserialize, Serialize};

/// Exponential cooling `T_k = T_1 exp(-beta k) + b` for stages
/// `k = 1..=stages`. Note that the first stage therefore runs at
/// `T_1 exp(-beta) + b`, not `T_1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnealSchedule {
    pub initial_temperature: f64,
    pub decay: f64,
    #[serde(default)]
    pub floor: f64,
    pub stages: usize,
}

impl AnnealSchedule {
    pub fn new(initial_temperature: f64, decay: f64, floor: f64, stages: usize) -> Self {
        AnnealSchedule {
            initial_temperature,
            decay,
            floor,
            stages,
        }
    }

    pub fn temperature(&self, k: usize) -> f64 {
        self.initial_temperature * (-self.decay * k as f64).exp() + self.floor
    }

    pub fn temperatures(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        (1..=self.stages).map(|k| (k, self.temperature(k)))
    }

    pub fn validate(&self) -> Vec<String> {
        let mut problems = Vec::new();
        if !(self.initial_temperature.is_finite() && self.initial_temperature > 0.0) {
            problems.push("schedule.initial_temperature must be positive".into());
        }
        if !(self.decay.is_finite() && self.decay >= 0.0) {
            problems.push("schedule.decay must be non-negative".into());
        }
        if !(self.floor.is_finite() && self.floor >= 0.0) {
            problems.push("schedule.floor must be non-negative".into());
        }
        if self.stages == 0 {
            problems.push("schedule.stages must be at least 1".into());
        }
        if problems.is_empty() && !(self.temperature(self.stages) > 0.0) {
            problems.push("schedule underflows to zero temperature; raise schedule.floor".into());
        }
        problems
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn first_stage_of_reference_schedule() {
        let s = AnnealSchedule::new(36.7, 0.02, 0.0351, 500);
        let oracle = 36.7 * (-0.02f64).exp() + 0.0351;
        assert!((s.temperature(1) - oracle).abs() < 1e-12);
        assert!((s.temperature(1) - 36.008).abs() < 1e-3);
    }

    #[test]
    fn flat_without_decay() {
        let s = AnnealSchedule::new(2.0, 0.0, 0.5, 10);
        assert!(s.temperatures().all(|(_, t)| t == 2.5));
    }

    #[test]
    fn tends_to_floor() {
        let s = AnnealSchedule::new(36.7, 0.02, 0.0351, 500);
        assert!((s.temperature(100_000) - 0.0351).abs() < 1e-15);
    }

    #[test]
    fn validation() {
        assert!(AnnealSchedule::new(1.0, 0.1, 0.0, 10).validate().is_empty());
        assert_eq!(AnnealSchedule::new(-1.0, -0.1, -1.0, 0).validate().len(), 4);
        assert!(!AnnealSchedule::new(1.0, 1e3, 0.0, 10).validate().is_empty());
    }

    proptest! {
        #[test]
        fn non_increasing(t1 in 1e-3f64..100.0, beta in 1e-4f64..1.0, b in 0.0f64..1.0, k in 1usize..1000) {
            let s = AnnealSchedule::new(t1, beta, b, 1000);
            prop_assert!(s.temperature(k + 1) <= s.temperature(k));
            prop_assert!(s.temperature(k) > 0.0 || b == 0.0);
        }
    }
}
