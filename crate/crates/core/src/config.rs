//! Experiment configuration files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::annealing::{
    approx_isde_sa, classical_sa, isde_sa, Algorithm, AnnealSchedule, ApproxSettings, RunOptions,
    RunResult,
};
use crate::constraints::{AdmissibleRegion, RegionSpec};
use crate::error::{Error, Result};
use crate::isde::IsdePolicy;
use crate::objectives::{CostFunction, ObjectiveSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Directory for `summary.json` and `trace.csv`.
    pub directory: PathBuf,
    /// Also write every sampler position to `trajectory.csv`.
    pub trajectory: bool,
    /// Also write the final surrogate to `surrogate.json` (surrogate runs).
    pub checkpoint: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            directory: PathBuf::from("."),
            trajectory: false,
            checkpoint: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub objective: ObjectiveSpec,
    pub region: RegionSpec,
    pub algorithm: Algorithm,
    pub schedule: AnnealSchedule,
    #[serde(default)]
    pub isde: IsdePolicy,
    #[serde(default)]
    pub surrogate: ApproxSettings,
    #[serde(default = "one")]
    pub chains: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputConfig,
}

fn one() -> usize {
    1
}

/// A validated configuration with its objective and region built.
#[derive(Debug)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub cost: CostFunction,
    pub region: AdmissibleRegion,
}

impl ExperimentConfig {
    pub fn from_json(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| Error::InvalidConfig(vec![e.to_string()]))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::InvalidConfig(vec![format!("cannot read {}: {e}", path.display())])
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Check every section and build the objective and region. All problems
    /// are reported together.
    pub fn validate(self) -> Result<Experiment> {
        let mut problems = self.objective.validate();
        let n = self.objective.dimension();
        let region = match self.region.build(Some(n)) {
            Ok(r) if r.dimension() != n => {
                problems.push(format!(
                    "region has dimension {} but the objective has dimension {n}",
                    r.dimension()
                ));
                None
            }
            Ok(r) => Some(r),
            Err(e) => {
                problems.push(format!("region: {e}"));
                None
            }
        };
        if let Some(r) = &region {
            if r.sampling_box().is_none() {
                problems.push("positive regions need seed_upper to draw initial points".into());
            }
        }
        problems.extend(self.schedule.validate());
        problems.extend(self.isde.validate());
        if self.chains == 0 {
            problems.push("chains must be at least 1".into());
        }
        if self.algorithm == Algorithm::ApproxIsde {
            let settings = ApproxSettings {
                chains: self.chains.max(1),
                ..self.surrogate
            };
            problems.extend(settings.validate(n));
        } else if self.chains > 1 {
            problems.push(format!("chains > 1 is only supported by {}", Algorithm::ApproxIsde));
        }
        if !problems.is_empty() {
            return Err(Error::InvalidConfig(problems));
        }
        let cost = self.objective.build()?;
        Ok(Experiment {
            config: self,
            cost,
            region: region.expect("validated region"),
        })
    }
}

impl Experiment {
    pub fn run(&self) -> Result<RunResult> {
        let c = &self.config;
        let options = RunOptions {
            record_trajectory: c.output.trajectory,
        };
        match c.algorithm {
            Algorithm::Classical => classical_sa(&self.cost, &self.region, &c.schedule, &c.isde, c.seed, options),
            Algorithm::Isde => isde_sa(&self.cost, &self.region, &c.schedule, &c.isde, c.seed, options),
            Algorithm::ApproxIsde => {
                let settings = ApproxSettings {
                    chains: c.chains,
                    ..c.surrogate
                };
                approx_isde_sa(&self.cost, &self.region, &c.schedule, &settings, &c.isde, c.seed, options)
            }
        }
    }
}
