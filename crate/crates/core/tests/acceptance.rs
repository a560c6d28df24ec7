//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use isde_anneal::bench::{run_suite, surrogate_check, Suite};
use isde_anneal::constraints::AdmissibleRegion;
use isde_anneal::isde::{self, CostModel, IsdePolicy, IsdeState, Potential, QuadraticWell};
use isde_anneal::objectives::{ackley, ackley_gradient, Ackley, CostFunction};
use isde_anneal::surrogate::{PolyharmonicSurrogate, SurrogateOptions};
use isde_anneal::vector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn check(id: &str, limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = f();
    let elapsed = start.elapsed();
    let in_time = limit.is_none_or(|l| elapsed <= l);
    let passed = outcome.passed && in_time;
    let limit_note = limit
        .map(|l| format!(" (limit {} s)", l.as_secs()))
        .unwrap_or_default();
    println!(
        "{id} {}: {} [{:.1} s{limit_note}]",
        if passed { "PASS" } else { "FAIL" },
        outcome.detail,
        elapsed.as_secs_f64()
    );
    passed
}

fn suite(s: Suite, seeds: usize) -> Outcome {
    match run_suite(s, seeds) {
        Ok(report) => Outcome {
            passed: report.passed,
            detail: report.verdict,
        },
        Err(e) => Outcome {
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

struct Moments {
    mean: f64,
    var: f64,
    fourth: f64,
}

fn moments(samples: &[f64]) -> Moments {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let fourth = samples.iter().map(|x| x.powi(4)).sum::<f64>() / n;
    Moments { mean, var, fourth }
}

fn invariant_measure() -> Outcome {
    let n = 5;
    let burn_in = 10_000;
    let samples = 200_000;
    let well = QuadraticWell::isotropic(n);
    let lambda = isde::estimate_lambda_max(&well, &[0.0; 5]).unwrap();
    let config = IsdePolicy::default().stage_config(lambda);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut state = IsdeState::new(vec![0.0; n], vec![0.0; n]).unwrap();
    let mut u = vec![Vec::with_capacity(samples); n];
    let mut v = vec![Vec::with_capacity(samples); n];
    for t in 0..burn_in + samples {
        state = isde::step(&state, &well, &config, &mut rng).unwrap();
        if t >= burn_in {
            for i in 0..n {
                u[i].push(state.position[i]);
                v[i].push(state.velocity[i]);
            }
        }
    }
    let mut passed = true;
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    let mut span = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for series in u.iter().chain(&v) {
        let m = moments(series);
        passed &= m.mean.abs() < 0.05 && (0.9..=1.1).contains(&m.var) && (2.6..=3.4).contains(&m.fourth);
        worst.0 = worst.0.max(m.mean.abs());
        span.0 = span.0.min(m.var);
        span.1 = span.1.max(m.var);
        span.2 = span.2.min(m.fourth);
        span.3 = span.3.max(m.fourth);
        worst.1 = worst.1.max((m.var - 1.0).abs());
        worst.2 = worst.2.max((m.fourth - 3.0).abs());
    }
    let (var_u, var_v) = scheme_stationary_variances(config.step_size, config.damping);
    Outcome {
        passed,
        detail: format!(
            "step {:.4}, damping {:.3}; max |mean| {:.4}, var in [{:.4}, {:.4}], 4th moment in [{:.3}, {:.3}]; \
             exact stationary var of the discrete scheme: U {var_u:.4}, V {var_v:.4}",
            config.step_size, config.damping, worst.0, span.0, span.1, span.2, span.3
        ),
    }
}

/// Stationary variances of position and velocity of the discrete update on
/// `Psi = u^2 / 2`, from the fixed point of `S = A S A^T + Q`.
fn scheme_stationary_variances(h: f64, damping: f64) -> (f64, f64) {
    let a = 1.0 - 0.5 * h * damping;
    let m = [[1.0 - h * h, h * a], [-h, a]];
    let b = [h * (damping * h).sqrt(), (damping * h).sqrt()];
    let mut s = [[0.0; 2]; 2];
    for _ in 0..100_000 {
        let mut next = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = b[i] * b[j];
                for k in 0..2 {
                    for l in 0..2 {
                        acc += m[i][k] * s[k][l] * m[j][l];
                    }
                }
                next[i][j] = acc;
            }
        }
        s = next;
    }
    (s[0][0], s[1][1])
}

fn surrogate_suite() -> Outcome {
    let check = match surrogate_check(4, 50, 2, 0) {
        Ok(c) => c,
        Err(e) => {
            return Outcome {
                passed: false,
                detail: format!("fit error: {e}"),
            }
        }
    };

    // same points, fitted at once and grown one point at a time
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let points: Vec<Vec<f64>> = (0..50)
        .map(|_| (0..4).map(|_| rng.random_range(-5.0..5.0)).collect())
        .collect();
    let values: Vec<f64> = points.iter().map(|p| ackley(p).unwrap()).collect();
    let eps = 1e-6 * (values.iter().map(|v| v.abs()).sum::<f64>() / 50.0).max(1.0);
    let options = SurrogateOptions {
        weight_sum: Some(eps),
        ..SurrogateOptions::default()
    };
    let batch = PolyharmonicSurrogate::fit(points.clone(), values.clone(), options).unwrap();
    let mut grown = PolyharmonicSurrogate::fit(points[..6].to_vec(), values[..6].to_vec(), options).unwrap();
    for (p, d) in points[6..].iter().zip(&values[6..]) {
        grown.add_control_point(p, *d).unwrap();
    }
    let mut incremental = 0.0f64;
    for _ in 0..100 {
        let a: Vec<f64> = (0..4).map(|_| rng.random_range(-5.0..5.0)).collect();
        let (x, y) = (batch.predict(&a), grown.predict(&a));
        incremental = incremental.max((x - y).abs() / (1.0 + x.abs()));
    }
    let passed = check.passed() && incremental < 1e-8;
    Outcome {
        passed,
        detail: format!(
            "interpolation {:.2e} (< 1e-8), weight sum {:.2e} (< {:.2e}), gradient {:.2e} (< 1e-5), batch vs incremental {:.2e} (< 1e-8)",
            check.interpolation_residual,
            check.weight_sum_residual,
            check.weight_sum_tolerance,
            check.gradient_error,
            incremental
        ),
    }
}

fn relative_fd_error(analytic: &[f64], f: impl FnMut(&[f64]) -> f64, a: &[f64]) -> f64 {
    let mut f = f;
    let fd = vector::central_gradient(|p| Ok::<_, ()>(f(p)), a, 1e-6).unwrap();
    vector::distance(analytic, &fd) / vector::norm(analytic).max(1e-300)
}

fn gradient_suite() -> Outcome {
    let n = 3;
    let alpha = 0.3;
    let region = AdmissibleRegion::bounded(vec![-5.0; n], vec![5.0; n], Some(vec![alpha; n])).unwrap();
    let cost = CostFunction::new(Ackley::new(n).unwrap());
    let potential = Potential::new(1.0, CostModel::Exact(&cost), &region).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut draw = |half: f64| -> Vec<f64> {
        loop {
            let a: Vec<f64> = (0..n).map(|_| rng.random_range(-half..half)).collect();
            if vector::norm(&a) > 0.1 {
                return a;
            }
        }
    };
    let (mut indicator, mut cost_err, mut psi_err) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let a = draw(5.0 + 3.0 * alpha);
        indicator = indicator.max(relative_fd_error(
            &region.log_indicator_gradient(&a),
            |p| region.log_indicator(p),
            &a,
        ));
        let a = draw(5.0);
        cost_err = cost_err.max(relative_fd_error(&ackley_gradient(&a).unwrap(), |p| ackley(p).unwrap(), &a));
        let a = draw(5.0);
        psi_err = psi_err.max(relative_fd_error(
            &potential.grad_psi(&a).unwrap(),
            |p| potential.psi(p).unwrap(),
            &a,
        ));
    }
    let bound = 2.0 / alpha;
    let mut largest = 0.0f64;
    for _ in 0..1000 {
        let a = draw(20.0);
        largest = largest.max(vector::max_abs(&region.log_indicator_gradient(&a)));
    }
    Outcome {
        passed: indicator < 1e-5 && cost_err < 1e-5 && psi_err < 1e-5 && largest <= bound,
        detail: format!(
            "indicator {indicator:.2e}, ackley {cost_err:.2e}, psi {psi_err:.2e} (< 1e-5); max |indicator gradient| {largest:.4} <= {bound:.4}"
        ),
    }
}

const DETERMINISM_CONFIGS: [(&str, &str); 3] = [
    ("isde", r#"{"objective": {"name": "ackley", "dimension": 2},
        "region": {"kind": "box", "lower": -5, "upper": 5, "alpha": 0.3},
        "algorithm": "isde", "seed": 7,
        "schedule": {"initial_temperature": 36.7, "decay": 0.02, "floor": 0.0351, "stages": 500}}"#),
    ("classical", r#"{"objective": {"name": "ackley", "dimension": 4},
        "region": {"kind": "box", "lower": -5, "upper": 5, "alpha": 0.3},
        "algorithm": "classical", "seed": 7, "isde": {"steps": 20},
        "schedule": {"initial_temperature": 2.5, "decay": 0.02, "floor": 0.0051, "stages": 200}}"#),
    ("approx-isde", r#"{"objective": {"name": "oscillator"},
        "region": {"kind": "box", "lower": 0.0714, "upper": 1.714},
        "algorithm": "approx-isde", "seed": 7, "surrogate": {"initial_points": 40},
        "schedule": {"initial_temperature": 0.3, "decay": 0.02, "floor": 0.003, "stages": 60}}"#),
];

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut details = Vec::new();
    let mut passed = true;
    for (name, config) in DETERMINISM_CONFIGS {
        let config_path = dir.path().join(format!("{name}.json"));
        std::fs::write(&config_path, config).unwrap();
        let mut traces = Vec::new();
        for run in 0..2 {
            let out = dir.path().join(format!("{name}-{run}"));
            let status = Command::new(env!("CARGO_BIN_EXE_isde-anneal"))
                .arg("run")
                .arg("--config")
                .arg(&config_path)
                .arg("--out")
                .arg(&out)
                .output()
                .unwrap();
            if !status.status.success() {
                passed = false;
                details.push(format!("{name}: run failed: {}", String::from_utf8_lossy(&status.stderr)));
            }
            traces.push(std::fs::read(out.join("trace.csv")).unwrap_or_default());
        }
        let same = !traces[0].is_empty() && traces[0] == traces[1];
        passed &= same;
        details.push(format!("{name} {}", if same { "identical" } else { "DIFFERENT" }));
    }
    Outcome {
        passed,
        detail: format!("trace.csv reruns: {}", details.join(", ")),
    }
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let results = [
        check("A1", Some(secs(60)), || suite(Suite::Ackley2, 10)),
        check("A2", Some(secs(30)), invariant_measure),
        check("A3", Some(secs(10)), surrogate_suite),
        check("A4", Some(secs(300)), || suite(Suite::Ackley32, 10)),
        check("A5", None, || suite(Suite::Ackley200Compare, 5)),
        check("A6", Some(secs(300)), || suite(Suite::Oscillator, 10)),
        check("A7", Some(secs(10)), gradient_suite),
        check("A8", None, determinism),
    ];
    let failed = results.iter().filter(|p| !**p).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
