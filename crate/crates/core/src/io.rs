//! Run artifacts: `summary.json`, `trace.csv`, `trajectory.csv` and the
//! surrogate checkpoint.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::annealing::{Algorithm, RunCounters, RunResult, TrajectoryRow};
use crate::error::Result;

pub const SUMMARY_FILE: &str = "summary.json";
pub const TRACE_FILE: &str = "trace.csv";
pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const CHECKPOINT_FILE: &str = "surrogate.json";

/// Shortest round-trip decimal; exponent form outside a readable range.
pub fn format_number(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn optional(x: Option<f64>) -> String {
    x.map(format_number).unwrap_or_default()
}

const COUNTER_COLUMNS: [&str; 8] = [
    "gradient_caps",
    "retries",
    "out_of_region",
    "accepted_moves",
    "enrichments",
    "rejected_duplicates",
    "fit_failures",
    "failed_evaluations",
];

fn counter_values(c: &RunCounters) -> [u64; 8] {
    [
        c.gradient_caps,
        c.retries,
        c.out_of_region,
        c.accepted_moves,
        c.enrichments,
        c.rejected_duplicates,
        c.fit_failures,
        c.failed_evaluations,
    ]
}

/// One row per stage: `stage, temperature, lambda_max, step_size, a_1..a_N,
/// exact_cost, surrogate_cost, best_cost, evaluations, <counters>,
/// best_1..best_N`. Costs that were not computed are left empty.
pub fn write_trace<W: Write>(writer: W, result: &RunResult) -> Result<()> {
    let n = result.dimension();
    let mut csv = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = ["stage", "temperature", "lambda_max", "step_size"]
        .map(String::from)
        .to_vec();
    header.extend((1..=n).map(|i| format!("a_{i}")));
    header.extend(["exact_cost", "surrogate_cost", "best_cost", "evaluations"].map(String::from));
    header.extend(COUNTER_COLUMNS.map(String::from));
    header.extend((1..=n).map(|i| format!("best_{i}")));
    csv.write_record(&header).map_err(csv_error)?;
    for s in &result.stages {
        let mut row = vec![
            s.stage.to_string(),
            format_number(s.temperature),
            format_number(s.lambda_max),
            format_number(s.step_size),
        ];
        row.extend(s.point.iter().map(|x| format_number(*x)));
        row.push(optional(s.exact_cost));
        row.push(optional(s.surrogate_cost));
        row.push(format_number(s.best_value));
        row.push(s.evaluations.to_string());
        row.extend(counter_values(&s.counters).iter().map(u64::to_string));
        row.extend(s.best_point.iter().map(|x| format_number(*x)));
        csv.write_record(&row).map_err(csv_error)?;
    }
    csv.flush()?;
    Ok(())
}

/// `stage, step, u_1..u_N, psi` for every recorded sampler position.
pub fn write_trajectory<W: Write>(writer: W, rows: &[TrajectoryRow]) -> Result<()> {
    let n = rows.first().map(|r| r.position.len()).unwrap_or(0);
    let mut csv = csv::Writer::from_writer(writer);
    let mut header = vec!["stage".to_string(), "step".to_string()];
    header.extend((1..=n).map(|i| format!("u_{i}")));
    header.push("psi".into());
    csv.write_record(&header).map_err(csv_error)?;
    for r in rows {
        let mut row = vec![r.stage.to_string(), r.step.to_string()];
        row.extend(r.position.iter().map(|x| format_number(*x)));
        row.push(format_number(r.psi));
        csv.write_record(&row).map_err(csv_error)?;
    }
    csv.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> crate::error::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io.into(),
        other => std::io::Error::other(format!("{other:?}")).into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary<'a> {
    pub algorithm: Algorithm,
    pub objective: &'a str,
    pub dimension: usize,
    pub seed: u64,
    /// How per-chain generators derive from the seed.
    pub rng: &'static str,
    pub chains: usize,
    pub stages: usize,
    pub final_temperature: Option<f64>,
    pub best_value: f64,
    pub best_point: &'a [f64],
    pub evaluations: u64,
    pub counters: RunCounters,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub control_points: Option<usize>,
}

pub const RNG_DESCRIPTION: &str =
    "ChaCha8Rng::seed_from_u64(seed); stream 0 draws initial control points, stream i+1 drives chain i";

impl<'a> Summary<'a> {
    pub fn new(result: &'a RunResult, objective: &'a str) -> Self {
        Summary {
            algorithm: result.algorithm,
            objective,
            dimension: result.dimension(),
            seed: result.seed,
            rng: RNG_DESCRIPTION,
            chains: result.chains,
            stages: result.stages.len(),
            final_temperature: result.stages.last().map(|s| s.temperature),
            best_value: result.best_value,
            best_point: &result.best_point,
            evaluations: result.evaluations,
            counters: result.counters,
            control_points: result.control_points.as_ref().map(Vec::len),
        }
    }
}

/// Write every artifact of `result` into `directory` and return the paths
/// written.
pub fn write_artifacts(
    directory: &Path,
    result: &RunResult,
    objective: &str,
    checkpoint: bool,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(directory)?;
    let mut written = Vec::new();

    let path = directory.join(SUMMARY_FILE);
    let mut json = serde_json::to_string_pretty(&Summary::new(result, objective))?;
    json.push('\n');
    fs::write(&path, json)?;
    written.push(path);

    let path = directory.join(TRACE_FILE);
    write_trace(fs::File::create(&path)?, result)?;
    written.push(path);

    if let Some(rows) = &result.trajectory {
        let path = directory.join(TRAJECTORY_FILE);
        write_trajectory(fs::File::create(&path)?, rows)?;
        written.push(path);
    }
    if let (true, Some(s)) = (checkpoint, &result.surrogate) {
        let path = directory.join(CHECKPOINT_FILE);
        fs::write(&path, s.to_json()?)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annealing::{isde_sa, AnnealSchedule, RunOptions};
    use crate::constraints::AdmissibleRegion;
    use crate::isde::IsdePolicy;
    use crate::objectives::{Ackley, CostFunction};

    fn small_run(stages: usize, record: bool) -> RunResult {
        let region = AdmissibleRegion::bounded(vec![-5.0; 2], vec![5.0; 2], Some(vec![0.3; 2])).unwrap();
        let cost = CostFunction::new(Ackley::new(2).unwrap());
        let schedule = AnnealSchedule::new(36.7, 0.02, 0.0351, stages);
        isde_sa(&cost, &region, &schedule, &IsdePolicy::default(), 1, RunOptions { record_trajectory: record })
            .unwrap()
    }

    #[test]
    fn number_format_round_trips() {
        for x in [0.0, 1.0, -2.5, 36.00798, 1e-7, 3.2e20, 0.1 + 0.2, f64::MIN_POSITIVE] {
            let s = format_number(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(format_number(0.25), "0.25");
        assert_eq!(format_number(1e-7), "1e-7");
    }

    #[test]
    fn trace_shape_and_values() {
        let r = small_run(4, false);
        let mut buf = Vec::new();
        write_trace(&mut buf, &r).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        let header: Vec<&str> = lines[0].split(',').collect();
        assert_eq!(header.len(), 4 + 2 + 4 + 8 + 2);
        let last: Vec<&str> = lines[4].split(',').collect();
        let best = header.iter().position(|h| *h == "best_cost").unwrap();
        assert_eq!(last[best].parse::<f64>().unwrap(), r.best_value);
        let surrogate = header.iter().position(|h| *h == "surrogate_cost").unwrap();
        assert_eq!(last[surrogate], "");
    }

    #[test]
    fn summary_matches_trace() {
        let r = small_run(6, false);
        let s = Summary::new(&r, "ackley");
        let last = r.stages.last().unwrap();
        assert_eq!(s.best_value, last.best_value);
        assert_eq!(s.evaluations, last.evaluations);
        assert_eq!(s.counters, last.counters);
        assert_eq!(s.best_point, &last.best_point[..]);
    }

    #[test]
    fn trajectory_rows() {
        let r = small_run(3, true);
        let mut buf = Vec::new();
        write_trajectory(&mut buf, r.trajectory.as_ref().unwrap()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "stage,step,u_1,u_2,psi");
        assert_eq!(text.lines().count(), 1 + 3 * 40);
    }

    #[test]
    fn artifacts_on_disk() {
        let dir = tempfile::tempdir().unwrap();
        let r = small_run(2, true);
        let written = write_artifacts(dir.path(), &r, "ackley", true).unwrap();
        assert_eq!(written.len(), 3);
        let summary: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join(SUMMARY_FILE)).unwrap()).unwrap();
        assert_eq!(summary["algorithm"], "isde");
        assert_eq!(summary["stages"], 2);
    }
}
