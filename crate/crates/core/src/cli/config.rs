//! Run configuration parsed from a flat `key = value` file.
//!
//! The format is deliberately small: one assignment per line, `#` starts a
//! comment, blank lines are ignored, and keys use dotted prefixes to group
//! settings (`problem.*`, `controller.*`, `run.*`).  A minimal file looks
//! like this:
//!
//! ```text
//! # one-dimensional hyperplane benchmark
//! problem.id         = half_line
//! controller.epsilon = 0.1
//! controller.beta    = 0.9
//! run.steps          = 1000
//! ```
//!
//! Parsing is strict on purpose: unknown keys, duplicate keys, and keys
//! that do not apply to the selected problem are reported as errors with
//! their line number rather than silently ignored, so a typo cannot change
//! the meaning of an experiment.

use std::collections::BTreeMap;
use std::path::PathBuf;

use thiserror::Error;

use crate::controller::{ControllerConfig, RiskMode, Weighting};
use crate::problems::{
    gaussian_lp_problem, half_line_problem, max_coordinate_problem, path_planning_problem,
    synthetic_beta_problem, PathConfig, ScalarDist, ScenarioProblem,
};

/// Error raised while parsing or validating a configuration file.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    /// A specific line failed to parse.
    #[error("line {line}: {message}")]
    Line {
        /// One-based line number in the configuration file.
        line: usize,
        /// Description of what went wrong on that line.
        message: String,
    },
    /// The file parsed but the combination of values is invalid.
    #[error("{0}")]
    Invalid(String),
}

/// Which benchmark problem a run drives.
///
/// Each variant carries exactly the parameters that problem accepts; the
/// parser rejects settings that do not apply to the selected identifier.
#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSpec {
    /// Order-statistic surrogate with known complexity `d`.
    SyntheticBeta {
        /// Index of the order statistic kept by the solver.
        d: u32,
    },
    /// One-dimensional hyperplane: cover Gaussian samples from above.
    HalfLine {
        /// Mean of the sampled points.
        mu: f64,
        /// Standard deviation of the sampled points.
        sigma: f64,
    },
    /// Linear program with standard-normal constraint directions.
    GaussianLp {
        /// Number of decision variables.
        dim: usize,
    },
    /// Coordinate-wise bound problem driven by a scalar sample law.
    MaxCoordinate {
        /// Number of coordinates (one scenario constrains them all).
        dim: usize,
        /// Law of the scalar scenario samples.
        dist: ScalarDist,
    },
    /// Corridor path planning with a fixed obstacle column.
    PathSteady,
    /// Corridor path planning with an oscillating obstacle column.
    PathTimeVarying,
}

impl ProblemSpec {
    /// Instantiates the configured benchmark.
    pub fn build(&self) -> Box<dyn ScenarioProblem + Send + Sync> {
        match self {
            ProblemSpec::SyntheticBeta { d } => Box::new(synthetic_beta_problem(*d)),
            ProblemSpec::HalfLine { mu, sigma } => Box::new(half_line_problem(*mu, *sigma)),
            ProblemSpec::GaussianLp { dim } => Box::new(gaussian_lp_problem(*dim)),
            ProblemSpec::MaxCoordinate { dim, dist } => {
                Box::new(max_coordinate_problem(*dim, *dist))
            }
            ProblemSpec::PathSteady => Box::new(path_planning_problem(PathConfig::steady())),
            ProblemSpec::PathTimeVarying => {
                Box::new(path_planning_problem(PathConfig::time_varying()))
            }
        }
    }

    /// Identifier accepted by `problem.id` for this variant.
    pub fn id(&self) -> &'static str {
        match self {
            ProblemSpec::SyntheticBeta { .. } => "synthetic_beta",
            ProblemSpec::HalfLine { .. } => "half_line",
            ProblemSpec::GaussianLp { .. } => "gaussian_lp",
            ProblemSpec::MaxCoordinate { .. } => "max_coordinate",
            ProblemSpec::PathSteady => "path_steady",
            ProblemSpec::PathTimeVarying => "path_time_varying",
        }
    }
}

/// Everything needed to execute `run`: the problem, the controller
/// settings, and the replication plan.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    /// Benchmark to drive.
    pub problem: ProblemSpec,
    /// Controller tolerances, sizing bounds, weighting, and risk mode.
    pub controller: ControllerConfig,
    /// Number of design steps per replication.
    pub steps: u64,
    /// Number of independent replications.
    pub reps: u32,
    /// Base seed; replication `r` runs with `seed + r`.
    pub seed: u64,
    /// Directory receiving trace/summary files.
    pub out: PathBuf,
}

/// Raw assignments keyed by name, remembering the defining line.
struct Entries(BTreeMap<String, (usize, String)>);

impl Entries {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.0.remove(key)
    }

    /// Removes `key` and parses its value, attributing errors to its line.
    fn take_parse<T>(&mut self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T: std::str::FromStr,
    {
        match self.take(key) {
            None => Ok(None),
            Some((line, value)) => value.parse::<T>().map(Some).map_err(|_| ConfigError::Line {
                line,
                message: format!("{key}: cannot parse '{value}'"),
            }),
        }
    }

    fn require_parse<T>(&mut self, key: &str) -> Result<(usize, T), ConfigError>
    where
        T: std::str::FromStr,
    {
        let (line, value) = self
            .take(key)
            .ok_or_else(|| ConfigError::Invalid(format!("missing required key '{key}'")))?;
        let parsed = value.parse::<T>().map_err(|_| ConfigError::Line {
            line,
            message: format!("{key}: cannot parse '{value}'"),
        })?;
        Ok((line, parsed))
    }
}

fn split_lines(text: &str) -> Result<Entries, ConfigError> {
    let mut map = BTreeMap::new();
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Line {
                line,
                message: "expected 'key = value'".to_string(),
            });
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::Line {
                line,
                message: "expected 'key = value'".to_string(),
            });
        }
        if let Some((first_line, _)) = map.insert(key.clone(), (line, value)) {
            return Err(ConfigError::Line {
                line,
                message: format!("duplicate key '{key}' (first set on line {first_line})"),
            });
        }
    }
    Ok(Entries(map))
}

fn parse_problem(entries: &mut Entries) -> Result<ProblemSpec, ConfigError> {
    let (id_line, id) = entries.require_parse::<String>("problem.id")?;
    match id.as_str() {
        "synthetic_beta" => {
            let d = entries.take_parse::<u32>("problem.d")?.unwrap_or(5);
            if d == 0 {
                return Err(ConfigError::Invalid(
                    "problem.d must be at least 1".to_string(),
                ));
            }
            Ok(ProblemSpec::SyntheticBeta { d })
        }
        "half_line" => {
            let mu = entries.take_parse::<f64>("problem.mu")?.unwrap_or(1.0);
            let sigma = entries.take_parse::<f64>("problem.sigma")?;
            let variance = entries.take_parse::<f64>("problem.variance")?;
            let sigma = match (sigma, variance) {
                (Some(_), Some(_)) => {
                    return Err(ConfigError::Invalid(
                        "set problem.sigma or problem.variance, not both".to_string(),
                    ))
                }
                (Some(s), None) => s,
                (None, Some(v)) => v.sqrt(),
                (None, None) => std::f64::consts::SQRT_2,
            };
            if !mu.is_finite() || !sigma.is_finite() || sigma <= 0.0 {
                return Err(ConfigError::Invalid(format!(
                    "half_line needs finite mu and positive sigma, got mu = {mu}, sigma = {sigma}"
                )));
            }
            Ok(ProblemSpec::HalfLine { mu, sigma })
        }
        "gaussian_lp" => {
            let dim = entries.take_parse::<usize>("problem.dim")?.unwrap_or(20);
            if dim == 0 {
                return Err(ConfigError::Invalid(
                    "problem.dim must be at least 1".to_string(),
                ));
            }
            Ok(ProblemSpec::GaussianLp { dim })
        }
        "max_coordinate" => {
            let dim = entries.take_parse::<usize>("problem.dim")?.unwrap_or(400);
            if dim == 0 {
                return Err(ConfigError::Invalid(
                    "problem.dim must be at least 1".to_string(),
                ));
            }
            let dist = match entries.take("problem.dist") {
                None => ScalarDist::Uniform01,
                Some((line, value)) => parse_dist(line, &value)?,
            };
            Ok(ProblemSpec::MaxCoordinate { dim, dist })
        }
        "path_steady" => Ok(ProblemSpec::PathSteady),
        "path_time_varying" => Ok(ProblemSpec::PathTimeVarying),
        other => Err(ConfigError::Line {
            line: id_line,
            message: format!(
                "problem.id: unknown problem '{other}' (expected synthetic_beta, half_line, \
                 gaussian_lp, max_coordinate, path_steady, or path_time_varying)"
            ),
        }),
    }
}

/// Parses `uniform` or `atom:<mass>` into a scalar sample law.
fn parse_dist(line: usize, value: &str) -> Result<ScalarDist, ConfigError> {
    if value == "uniform" {
        return Ok(ScalarDist::Uniform01);
    }
    if let Some(mass) = value.strip_prefix("atom:") {
        let atom_mass: f64 = mass.trim().parse().map_err(|_| ConfigError::Line {
            line,
            message: format!("problem.dist: cannot parse atom mass '{mass}'"),
        })?;
        if !(0.0..1.0).contains(&atom_mass) {
            return Err(ConfigError::Line {
                line,
                message: format!("problem.dist: atom mass must lie in [0, 1), got {atom_mass}"),
            });
        }
        return Ok(ScalarDist::TopAtomMixture { atom_mass });
    }
    Err(ConfigError::Line {
        line,
        message: format!("problem.dist: expected 'uniform' or 'atom:<mass>', got '{value}'"),
    })
}

fn parse_controller(entries: &mut Entries) -> Result<ControllerConfig, ConfigError> {
    let (_, epsilon) = entries.require_parse::<f64>("controller.epsilon")?;
    let (_, beta) = entries.require_parse::<f64>("controller.beta")?;
    let mut config = ControllerConfig::new(epsilon, beta);
    if let Some(n_initial) = entries.take_parse::<u32>("controller.n_initial")? {
        config.n_initial = n_initial;
    }
    if let Some(n_max) = entries.take_parse::<u32>("controller.n_max")? {
        config.n_max = n_max;
    }
    config.weighting = match entries.take("controller.weighting") {
        None => Weighting::Uniform,
        Some((line, value)) => match value.as_str() {
            "uniform" => Weighting::Uniform,
            "linear" => Weighting::LinearInT,
            other => {
                return Err(ConfigError::Line {
                    line,
                    message: format!(
                        "controller.weighting: expected 'uniform' or 'linear', got '{other}'"
                    ),
                })
            }
        },
    };
    let bernoulli_s = entries.take_parse::<usize>("controller.bernoulli_s")?;
    config.risk_mode = match entries.take("controller.risk") {
        None => {
            if bernoulli_s.is_some() {
                return Err(ConfigError::Invalid(
                    "controller.bernoulli_s requires controller.risk = bernoulli".to_string(),
                ));
            }
            RiskMode::Exact
        }
        Some((line, value)) => match value.as_str() {
            "exact" => {
                if bernoulli_s.is_some() {
                    return Err(ConfigError::Invalid(
                        "controller.bernoulli_s requires controller.risk = bernoulli".to_string(),
                    ));
                }
                RiskMode::Exact
            }
            "bernoulli" => RiskMode::Bernoulli {
                samples: bernoulli_s.unwrap_or(10_000),
            },
            other => {
                return Err(ConfigError::Line {
                    line,
                    message: format!(
                        "controller.risk: expected 'exact' or 'bernoulli', got '{other}'"
                    ),
                })
            }
        },
    };
    config
        .validate()
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;
    Ok(config)
}

/// Parses a complete run configuration file.
pub fn parse_run_spec(text: &str) -> Result<RunSpec, ConfigError> {
    let mut entries = split_lines(text)?;
    let problem = parse_problem(&mut entries)?;
    let controller = parse_controller(&mut entries)?;
    let (_, steps) = entries.require_parse::<u64>("run.steps")?;
    if steps == 0 {
        return Err(ConfigError::Invalid(
            "run.steps must be at least 1".to_string(),
        ));
    }
    let reps = entries.take_parse::<u32>("run.reps")?.unwrap_or(1);
    if reps == 0 {
        return Err(ConfigError::Invalid(
            "run.reps must be at least 1".to_string(),
        ));
    }
    let seed = entries.take_parse::<u64>("run.seed")?.unwrap_or(0);
    let out = entries
        .take("run.out")
        .map(|(_, value)| PathBuf::from(value))
        .unwrap_or_else(|| PathBuf::from("out"));
    if let Some((key, (line, _))) = entries.0.iter().next() {
        return Err(ConfigError::Line {
            line: *line,
            message: format!(
                "unknown key '{key}' (or it does not apply to problem '{}')",
                problem.id()
            ),
        });
    }
    Ok(RunSpec {
        problem,
        controller,
        steps,
        reps,
        seed,
        out,
    })
}
