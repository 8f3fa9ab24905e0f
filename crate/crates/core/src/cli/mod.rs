//! Command-line interface of the `scenario-sizer` binary.
//!
//! Three subcommands cover the work cycle:
//!
//! * `run --config FILE` — execute the online controller on a configured
//!   benchmark, writing per-step trace CSVs, a cross-replication
//!   `summary.csv`, a `run.log` with wall-clock timings, and (with
//!   `--plot`) a `trace.svg` figure.  `--seed`, `--reps`, and `--out`
//!   override the corresponding `run.*` keys; `--jobs` runs replications
//!   on worker threads (each replication stays fully deterministic).
//! * `fit INPUT.csv` — fit the risk-model shape to recorded
//!   `(risk, sample size)` pairs and print the maximizer; `--overlay N`
//!   also renders `fit.svg` with the fitted density at sample size `N`.
//! * `size THETA EPSILON BETA` — print the smallest sample size meeting
//!   the target, optionally capped by `--n-max`.
//!
//! Exit codes: `0` on success, `2` for usage and configuration errors
//! (bad flags, malformed config or input files), `3` for runtime
//! failures (I/O, replication errors).  Logging goes to stderr and is
//! controlled by the `SCENARIO_SIZER_LOG` environment variable
//! (`error` by default, e.g. `SCENARIO_SIZER_LOG=info` for progress).

pub mod config;
pub mod plot;
pub mod report;

use std::fs;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use log::{debug, info};
use thiserror::Error;

use crate::controller::{self, ControllerError, TraceRecord};
use crate::mle::{self, DataPoint, Dataset};
use crate::problems::ScenarioProblem;
use crate::sizer::{optimal_sample_size, SizerQuery};

pub use config::{parse_run_spec, ConfigError, ProblemSpec, RunSpec};

/// A failed command, tagged with the exit code family it belongs to.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CliError {
    /// Usage or configuration problem (exit code 2).
    #[error("{0}")]
    Config(String),
    /// Runtime failure after a valid configuration (exit code 3).
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "scenario-sizer",
    version,
    about = "Online scenario-count tuning for repetitive scenario design"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the online controller on a configured benchmark problem.
    Run(RunArgs),
    /// Fit the risk-model shape to a CSV of (risk, sample size) pairs.
    Fit(FitArgs),
    /// Print the smallest sample size meeting a risk target.
    Size(SizeArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Path to the key = value configuration file.
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Base seed; replication r uses seed + r (overrides run.seed).
    #[arg(long)]
    seed: Option<u64>,
    /// Number of replications (overrides run.reps).
    #[arg(long)]
    reps: Option<u32>,
    /// Worker threads for replications.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    jobs: u32,
    /// Also render a trace.svg figure.
    #[arg(long)]
    plot: bool,
    /// Output directory (overrides run.out).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FitArgs {
    /// CSV file with header v,N or v,N,w.
    input: PathBuf,
    /// Render fit.svg with the fitted density at this sample size.
    #[arg(long, value_name = "N")]
    overlay: Option<u32>,
    /// Output directory for fit.svg.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SizeArgs {
    /// Fitted shape parameter.
    theta: f64,
    /// Risk tolerance in (0, 1).
    epsilon: f64,
    /// Confidence target in (epsilon, 1).
    beta: f64,
    /// Largest admissible sample size.
    #[arg(long, default_value_t = 1_000_000)]
    n_max: u32,
}

/// Parses the command line, executes the command, and returns the
/// process exit code.
pub fn run_cli() -> i32 {
    let env = env_logger::Env::default().filter_or("SCENARIO_SIZER_LOG", "error");
    let _ = env_logger::Builder::from_env(env)
        .format_timestamp(None)
        .try_init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Fit(args) => cmd_fit(args),
        Command::Size(args) => cmd_size(args),
    };
    match result {
        Ok(()) => 0,
        Err(error) => {
            eprintln!("error: {error}");
            error.exit_code()
        }
    }
}

fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    let text = fs::read_to_string(&args.config).map_err(|e| {
        CliError::Config(format!(
            "cannot read config file {}: {e}",
            args.config.display()
        ))
    })?;
    let mut spec = parse_run_spec(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", args.config.display())))?;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    if let Some(reps) = args.reps {
        if reps == 0 {
            return Err(CliError::Config("--reps must be at least 1".to_string()));
        }
        spec.reps = reps;
    }
    if let Some(out) = args.out {
        spec.out = out;
    }
    debug!(
        "running {} for {} steps x {} reps from seed {}",
        spec.problem.id(),
        spec.steps,
        spec.reps,
        spec.seed
    );

    let problem = spec.problem.build();
    let started = Instant::now();
    let traces = run_replications(problem.as_ref(), &spec, args.jobs)?;
    let wall = started.elapsed();

    fs::create_dir_all(&spec.out).map_err(|e| {
        CliError::Runtime(format!(
            "cannot create output directory {}: {e}",
            spec.out.display()
        ))
    })?;
    let write = |name: &str, contents: &str| -> Result<(), CliError> {
        let path = spec.out.join(name);
        fs::write(&path, contents)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
    };

    let mut written = Vec::new();
    let mut summaries = Vec::with_capacity(traces.len());
    let mut log = String::new();
    log.push_str(&format!(
        "scenario-sizer run: problem = {}, epsilon = {}, beta = {}, steps = {}, reps = {}, \
         seed = {}, jobs = {}\n",
        spec.problem.id(),
        spec.controller.epsilon,
        spec.controller.beta,
        spec.steps,
        spec.reps,
        spec.seed,
        args.jobs
    ));
    for (rep, trace) in traces.iter().enumerate() {
        let rep = rep as u32;
        let name = report::trace_file_name(rep, spec.reps);
        write(&name, &report::trace_csv(trace))?;
        written.push(name);
        summaries.push(report::summarize(rep, trace, spec.controller.epsilon));
        log.push_str(&report::run_log_line(rep, trace));
        log.push('\n');
        info!("{}", report::run_log_line(rep, trace));
    }
    write("summary.csv", &report::summary_csv(&summaries))?;
    written.push("summary.csv".to_string());
    log.push_str(&format!("total wall time: {:.3}s\n", wall.as_secs_f64()));
    write("run.log", &log)?;
    written.push("run.log".to_string());
    if args.plot {
        let svg = plot::trace_svg(&traces, spec.controller.epsilon, spec.controller.beta);
        write("trace.svg", &svg)?;
        written.push("trace.svg".to_string());
    }
    println!("wrote {} to {}", written.join(", "), spec.out.display());
    Ok(())
}

/// Outcome of one replication.
type RepResult = Result<Vec<TraceRecord>, ControllerError>;

/// Runs all replications, optionally on `jobs` worker threads.
///
/// Replication `r` always runs with seed `base + r`, so the resulting
/// traces are independent of the thread count and schedule.
fn run_replications(
    problem: &(dyn ScenarioProblem + Send + Sync),
    spec: &RunSpec,
    jobs: u32,
) -> Result<Vec<Vec<TraceRecord>>, CliError> {
    let reps = spec.reps as usize;
    let jobs = (jobs as usize).clamp(1, reps);
    let run_one = |rep: usize| -> RepResult {
        controller::run(
            problem,
            &spec.controller,
            spec.steps,
            spec.seed.wrapping_add(rep as u64),
        )
    };
    let results: Vec<RepResult> = if jobs == 1 {
        (0..reps).map(run_one).collect()
    } else {
        let slots: Vec<Mutex<Option<RepResult>>> = (0..reps).map(|_| Mutex::new(None)).collect();
        let next = AtomicUsize::new(0);
        std::thread::scope(|scope| {
            for _ in 0..jobs {
                scope.spawn(|| loop {
                    let rep = next.fetch_add(1, Ordering::Relaxed);
                    if rep >= reps {
                        break;
                    }
                    let result = run_one(rep);
                    *slots[rep].lock().expect("replication worker panicked") = Some(result);
                });
            }
        });
        slots
            .into_iter()
            .map(|slot| {
                slot.into_inner()
                    .expect("replication worker panicked")
                    .expect("scope joined every worker, so every slot is filled")
            })
            .collect()
    };
    results
        .into_iter()
        .enumerate()
        .map(|(rep, result)| {
            result.map_err(|e| CliError::Runtime(format!("replication {rep}: {e}")))
        })
        .collect()
}

fn parse_field<T: std::str::FromStr>(
    record: &csv::StringRecord,
    index: usize,
    name: &str,
    line: u64,
) -> Result<T, CliError> {
    let raw = record
        .get(index)
        .ok_or_else(|| CliError::Config(format!("line {line}: missing field '{name}'")))?;
    raw.parse()
        .map_err(|_| CliError::Config(format!("line {line}: cannot parse {name} = '{raw}'")))
}

fn cmd_fit(args: FitArgs) -> Result<(), CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(&args.input)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", args.input.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::Config(format!("{}: {e}", args.input.display())))?
        .clone();
    let fields: Vec<&str> = headers.iter().collect();
    let has_weight = match fields.as_slice() {
        ["v", "N"] => false,
        ["v", "N", "w"] => true,
        other => {
            return Err(CliError::Config(format!(
                "{}: expected CSV header 'v,N' or 'v,N,w', got '{}'",
                args.input.display(),
                other.join(",")
            )))
        }
    };
    let mut points = Vec::new();
    for record in reader.records() {
        let record =
            record.map_err(|e| CliError::Config(format!("{}: {e}", args.input.display())))?;
        let line = record.position().map_or(0, |p| p.line());
        let risk: f64 = parse_field(&record, 0, "v", line)?;
        let n: u32 = parse_field(&record, 1, "N", line)?;
        let weight: f64 = if has_weight {
            parse_field(&record, 2, "w", line)?
        } else {
            1.0
        };
        let point = DataPoint::weighted(risk, n, weight)
            .map_err(|e| CliError::Config(format!("line {line}: {e}")))?;
        points.push(point);
    }
    let dataset = Dataset::from_points(points);
    let fit = mle::fit(&dataset)
        .map_err(|e| CliError::Config(format!("{}: {e}", args.input.display())))?;
    let uninformative = dataset
        .points()
        .iter()
        .filter(|p| p.risk() == 0.0 || p.sample_size() == 0)
        .count();
    println!(
        "observations = {} ({uninformative} uninformative)",
        dataset.len()
    );
    match fit.theta {
        Some(theta) => {
            println!("theta = {theta}");
            println!("log-likelihood = {}", fit.loglik);
        }
        None => println!(
            "likelihood is flat: every observation has zero risk or zero sample size, \
             so theta is unidentified"
        ),
    }
    if let Some(overlay_n) = args.overlay {
        let risks: Vec<f64> = dataset.points().iter().map(|p| p.risk()).collect();
        let svg = plot::fit_svg(&risks, fit.theta, overlay_n);
        fs::create_dir_all(&args.out).map_err(|e| {
            CliError::Runtime(format!(
                "cannot create output directory {}: {e}",
                args.out.display()
            ))
        })?;
        let path = args.out.join("fit.svg");
        fs::write(&path, svg)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_size(args: SizeArgs) -> Result<(), CliError> {
    let query = SizerQuery::new(args.theta, args.epsilon, args.beta, args.n_max)
        .map_err(|e| CliError::Config(e.to_string()))?;
    println!("{}", optimal_sample_size(query));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn clap_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn exit_codes_separate_config_from_runtime() {
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
        assert_eq!(CliError::Runtime("x".into()).exit_code(), 3);
    }

    #[test]
    fn replications_are_schedule_independent() {
        let spec = parse_run_spec(
            "problem.id = synthetic_beta\nproblem.d = 3\ncontroller.epsilon = 0.1\n\
             controller.beta = 0.9\nrun.steps = 40\nrun.reps = 6\nrun.seed = 9\n",
        )
        .unwrap();
        let problem = spec.problem.build();
        let serial = run_replications(problem.as_ref(), &spec, 1).unwrap();
        let threaded = run_replications(problem.as_ref(), &spec, 4).unwrap();
        assert_eq!(serial.len(), 6);
        for (a, b) in serial.iter().zip(&threaded) {
            assert_eq!(a.len(), b.len());
            for (x, y) in a.iter().zip(b) {
                assert_eq!((x.t, x.n, x.theta, x.risk), (y.t, y.n, y.theta, y.risk));
            }
        }
    }
}
