//! The online sample-size controller.
//!
//! At every step `t = 1, 2, …` the controller draws `N_t` scenarios from
//! the problem, solves the sampled program, measures the risk `v_t` of the
//! decision (closed form or a Bernoulli estimate on fresh samples), appends
//! the weighted observation `(v_t, N_t, w_t)` to its history, refits the
//! risk-model shape `θ` by weighted maximum likelihood, and sets
//!
//! ```text
//! N_{t+1} = min{ N̂(θ_t; ε, β), n_max },
//! ```
//!
//! the smallest sample size whose predicted risk meets `P[V ≤ ε] ≥ β`
//! under the fitted model. While the likelihood is flat — every observed
//! risk is zero, so the data say nothing about `θ` — the sample size is
//! left unchanged. A failed solve (unbounded, infeasible, or no path)
//! contributes the worst-case observation `v_t = 1` and the run continues;
//! the failure is recorded in the trace instead of aborting.
//!
//! Runs are reproducible: all randomness flows from one seeded generator,
//! and solvers are deterministic functions of their scenario lists.

use std::fmt;
use std::time::{Duration, Instant};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::mle::{self, DataPoint, Dataset};
use crate::problems::{ScenarioProblem, Solution, SolveError};
use crate::sizer::{optimal_sample_size, SizerQuery};

/// Weight given to the step-`t` observation in the likelihood.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weighting {
    /// Every observation counts equally.
    Uniform,
    /// The step-`t` observation gets weight `t`, discounting the past for
    /// problems whose distribution shifts over time.
    LinearInT,
}

/// How the risk of a step's decision is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RiskMode {
    /// Use the problem's closed-form risk.
    Exact,
    /// Estimate the risk as the violation frequency over this many fresh
    /// samples.
    Bernoulli {
        /// Number of fresh samples per step.
        samples: usize,
    },
}

/// Outcome of the solver at one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverStatus {
    /// A decision was returned.
    Ok,
    /// The sampled program was unbounded.
    Unbounded,
    /// The sampled program was infeasible.
    Infeasible,
    /// The path planner found no collision-free route.
    PlannerFailed,
}

impl fmt::Display for SolverStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverStatus::Ok => "ok",
            SolverStatus::Unbounded => "unbounded",
            SolverStatus::Infeasible => "infeasible",
            SolverStatus::PlannerFailed => "planner_failed",
        })
    }
}

/// One step of a controller run.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    /// 1-based step index.
    pub t: u64,
    /// Sample size used at this step.
    pub n: u32,
    /// Fitted shape after this step; `None` while the likelihood is flat.
    pub theta: Option<f64>,
    /// Measured risk of this step's decision.
    pub risk: f64,
    /// Whether the risk exceeded the tolerance `ε`.
    pub violation: bool,
    /// Solver outcome.
    pub status: SolverStatus,
    /// Wall-clock time spent on this step.
    pub elapsed: Duration,
}

/// Configuration of a controller run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerConfig {
    /// Risk tolerance `ε`.
    pub epsilon: f64,
    /// Target confidence `β` for `P[V ≤ ε]`.
    pub beta: f64,
    /// Sample size of the first step.
    pub n_initial: u32,
    /// Cap on the sample size.
    pub n_max: u32,
    /// Observation weights.
    pub weighting: Weighting,
    /// Risk measurement.
    pub risk_mode: RiskMode,
}

impl ControllerConfig {
    /// A configuration with the given tolerances and the defaults
    /// `n_initial = 1`, `n_max = 10⁶`, uniform weights and exact risk.
    pub fn new(epsilon: f64, beta: f64) -> Self {
        ControllerConfig {
            epsilon,
            beta,
            n_initial: 1,
            n_max: 1_000_000,
            weighting: Weighting::Uniform,
            risk_mode: RiskMode::Exact,
        }
    }

    /// Checks the configuration invariants.
    pub fn validate(&self) -> Result<(), ControllerError> {
        if !(self.epsilon > 0.0 && self.epsilon < self.beta && self.beta < 1.0) {
            return Err(ControllerError::InvalidTolerances {
                epsilon: self.epsilon,
                beta: self.beta,
            });
        }
        if self.n_initial < 1 || self.n_initial > self.n_max {
            return Err(ControllerError::InvalidInitialSize {
                n_initial: self.n_initial,
                n_max: self.n_max,
            });
        }
        if let RiskMode::Bernoulli { samples: 0 } = self.risk_mode {
            return Err(ControllerError::ZeroRiskSamples);
        }
        Ok(())
    }
}

/// Failure modes of a controller run.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ControllerError {
    /// The tolerances must satisfy `0 < ε < β < 1`.
    #[error("tolerances must satisfy 0 < epsilon < beta < 1, got epsilon={epsilon}, beta={beta}")]
    InvalidTolerances {
        /// Rejected risk tolerance.
        epsilon: f64,
        /// Rejected confidence target.
        beta: f64,
    },
    /// The initial sample size must lie in `[1, n_max]`.
    #[error("initial sample size must satisfy 1 <= n_initial <= n_max, got {n_initial} with n_max={n_max}")]
    InvalidInitialSize {
        /// Rejected initial sample size.
        n_initial: u32,
        /// Configured cap.
        n_max: u32,
    },
    /// Bernoulli risk estimation needs at least one sample per step.
    #[error("Bernoulli risk estimation needs at least one sample per step")]
    ZeroRiskSamples,
    /// Exact risk was requested but the problem has no closed form.
    #[error("step {t}: the problem provides no closed-form risk; use Bernoulli estimation")]
    ExactRiskUnavailable {
        /// Step at which the missing oracle was discovered.
        t: u64,
    },
}

/// Estimates the risk of `solution` at step `t` as the violation frequency
/// over `samples` fresh scenario draws.
pub fn bernoulli_risk(
    problem: &dyn ScenarioProblem,
    solution: &Solution,
    t: u64,
    samples: usize,
    rng: &mut dyn RngCore,
) -> f64 {
    assert!(samples >= 1, "bernoulli_risk needs at least one sample");
    let hits = (0..samples)
        .filter(|_| {
            let scenario = problem.sample(rng, t);
            problem.constraint_value(solution, &scenario, t) > 0.0
        })
        .count();
    hits as f64 / samples as f64
}

/// Two-sided Hoeffding bound: the probability that a Bernoulli estimate
/// over `samples` draws misses the true risk by more than `accuracy` is at
/// most `2·exp(−2·accuracy²·samples)`.
pub fn hoeffding_confidence(samples: usize, accuracy: f64) -> f64 {
    assert!(
        samples >= 1,
        "hoeffding_confidence needs at least one sample"
    );
    assert!(
        accuracy > 0.0 && accuracy.is_finite(),
        "hoeffding_confidence needs a positive accuracy"
    );
    2.0 * (-2.0 * accuracy * accuracy * samples as f64).exp()
}

/// Runs the controller for `steps` steps and returns the full trace.
///
/// All randomness derives from `seed`; identical inputs give identical
/// traces (up to timing).
pub fn run(
    problem: &dyn ScenarioProblem,
    config: &ControllerConfig,
    steps: u64,
    seed: u64,
) -> Result<Vec<TraceRecord>, ControllerError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dataset = Dataset::new();
    let mut n = config.n_initial;
    let mut trace = Vec::with_capacity(steps as usize);
    for t in 1..=steps {
        let begun = Instant::now();
        let scenarios: Vec<_> = (0..n).map(|_| problem.sample(&mut rng, t)).collect();
        let (risk, status) = match problem.solve(&scenarios, t) {
            Ok(solution) => {
                let risk = match config.risk_mode {
                    RiskMode::Exact => problem
                        .exact_risk(&solution, t)
                        .ok_or(ControllerError::ExactRiskUnavailable { t })?,
                    RiskMode::Bernoulli { samples } => {
                        bernoulli_risk(problem, &solution, t, samples, &mut rng)
                    }
                };
                (risk, SolverStatus::Ok)
            }
            Err(err) => {
                let status = match err {
                    SolveError::Unbounded => SolverStatus::Unbounded,
                    SolveError::Infeasible => SolverStatus::Infeasible,
                    SolveError::PlannerFailed => SolverStatus::PlannerFailed,
                    SolveError::EmptyScenarios => {
                        unreachable!("the controller draws at least one scenario")
                    }
                };
                (1.0, status)
            }
        };
        let weight = match config.weighting {
            Weighting::Uniform => 1.0,
            Weighting::LinearInT => t as f64,
        };
        dataset.push(
            DataPoint::weighted(risk, n, weight)
                .expect("risk lies in [0, 1] and the weight is positive"),
        );
        let fit = mle::fit(&dataset).expect("the dataset is nonempty");
        let next = match fit.theta {
            Some(theta) => optimal_sample_size(
                SizerQuery::new(theta, config.epsilon, config.beta, config.n_max)
                    .expect("tolerances validated and the fitted shape is positive"),
            ),
            None => n,
        };
        trace.push(TraceRecord {
            t,
            n,
            theta: fit.theta,
            risk,
            violation: risk > config.epsilon,
            status,
            elapsed: begun.elapsed(),
        });
        n = next;
    }
    Ok(trace)
}
