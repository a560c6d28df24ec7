use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use isde_anneal::bench::{run_suite, surrogate_check, Suite};
use isde_anneal::config::ExperimentConfig;
use isde_anneal::io::write_artifacts;
use isde_anneal::Error;

/// Simulated annealing with a second-order Langevin sampler.
#[derive(Debug, Parser)]
#[command(name = "isde-anneal", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one experiment from a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a preset over seeds 0..K and check it against its threshold.
    Benchmark {
        /// ackley-2, ackley-32, ackley-200-compare or oscillator
        suite: String,
        #[arg(long, default_value_t = 10)]
        seeds: usize,
    },
    /// Fit a surrogate to random Ackley samples and report its residuals.
    SurrogateCheck {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        points: usize,
        #[arg(long, default_value_t = 2)]
        order: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

const EXIT_THRESHOLD: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidConfig(_) | Error::InvalidArgument(_) => EXIT_INVALID,
        _ => EXIT_RUNTIME,
    }
}

fn run(config: PathBuf, seed: Option<u64>, out: Option<PathBuf>) -> Result<(), Error> {
    let mut cfg = ExperimentConfig::load(&config)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Some(out) = out {
        cfg.output.directory = out;
    }
    let experiment = cfg.validate()?;
    let c = &experiment.config;
    let objective = c.objective.name();
    let start = Instant::now();
    match experiment.run() {
        Ok(result) => {
            write_artifacts(&c.output.directory, &result, objective, c.output.checkpoint)?;
            eprintln!(
                "{} on {objective}: best {:.6e} after {} evaluations ({:.2} s); artifacts in {}",
                result.algorithm,
                result.best_value,
                result.evaluations,
                start.elapsed().as_secs_f64(),
                c.output.directory.display()
            );
            Ok(())
        }
        Err(Error::Aborted {
            stage,
            partial,
            source,
        }) => {
            write_artifacts(&c.output.directory, &partial, objective, c.output.checkpoint)?;
            eprintln!(
                "partial artifacts for {} completed stages in {}",
                partial.stages.len(),
                c.output.directory.display()
            );
            Err(Error::Aborted {
                stage,
                partial,
                source,
            })
        }
        Err(e) => Err(e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { config, seed, out } => run(config, seed, out).map(|_| true),
        Command::Benchmark { suite, seeds } => suite
            .parse::<Suite>()
            .and_then(|suite| run_suite(suite, seeds))
            .map(|report| {
                print!("{}", report.to_csv());
                println!(
                    "{} {}: {} ({:.1} s)",
                    if report.passed { "PASS" } else { "FAIL" },
                    report.suite,
                    report.verdict,
                    report.seconds
                );
                report.passed
            }),
        Command::SurrogateCheck {
            dim,
            points,
            order,
            seed,
        } => surrogate_check(dim, points, order, seed).map(|c| {
            println!("interpolation_residual_max,{:e}", c.interpolation_residual);
            println!("weight_sum_residual,{:e}", c.weight_sum_residual);
            println!("weight_sum_tolerance,{:e}", c.weight_sum_tolerance);
            println!("gradient_rel_error_max,{:e}", c.gradient_error);
            println!("condition_estimate,{:e}", c.condition_estimate);
            println!("{}", if c.passed() { "PASS" } else { "FAIL" });
            c.passed()
        }),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_THRESHOLD),
        Err(e) => {
            eprintln!("error: {e}");
            match &e {
                // fit failures in the self-check are runtime failures
                Error::FitFailure { .. } | Error::DuplicatePoint { .. } => ExitCode::from(EXIT_RUNTIME),
                _ => ExitCode::from(exit_code(&e)),
            }
        }
    }
}
