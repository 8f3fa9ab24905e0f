//! The scenario-problem abstraction and the benchmark problems.
//!
//! A [`ScenarioProblem`] bundles the three ingredients of repetitive
//! scenario design: a sampler for i.i.d. constraints `ξ ~ ℙ_t`, a solver
//! mapping a drawn constraint set to a decision, and the risk of a decision
//! `V(x) = P[g(x, ξ) > 0]` — exactly when the problem admits a closed form,
//! otherwise estimated by a Bernoulli test on fresh samples (see the
//! controller module).
//!
//! Five benchmarks are provided:
//!
//! * [`synthetic_beta_problem`] — a no-op solver whose risk follows the
//!   fixed-complexity law `Beta(d, N−d+1)` exactly; the cleanest test bed.
//! * [`half_line_problem`] — `min x` s.t. `x ≥ u` for Gaussian `u`
//!   (fixed complexity 1).
//! * [`gaussian_lp_problem`] — `min Σx` s.t. `uᵀx ≤ 1` for standard
//!   Gaussian vectors (fixed complexity = dimension); see [`lp`].
//! * [`max_coordinate_problem`] — `min Σx` s.t. `min_i x⁽ⁱ⁾ ≥ u` for a
//!   configurable scalar distribution, including one with a point mass that
//!   reproduces the degenerate-complexity failure mode.
//! * [`path_planning_problem`] — a nonconvex viapoint path-planning task
//!   with randomly placed obstacle pairs; see [`planner`].

pub mod lp;
pub mod planner;

use rand::{Rng, RngCore};
use rand_distr::{Distribution, Normal};
use thiserror::Error;

pub use lp::{gaussian_lp_problem, solve_lp, GaussianLp, LpOutcome, LpProblem};
pub use planner::{path_planning_problem, CenterDrift, PathConfig, PathPlanning};

/// One sampled constraint (scenario), with a problem-specific payload.
#[derive(Debug, Clone, PartialEq)]
pub enum Constraint {
    /// A scalar sample `u`.
    Scalar(f64),
    /// A sampled vector `u` (imposing `u·x ≤ 1`).
    Vector(Vec<f64>),
    /// Centers of a lower/upper pair of unit-square obstacles.
    ObstaclePair {
        /// Center of the lower obstacle.
        lower: [f64; 2],
        /// Center of the upper obstacle.
        upper: [f64; 2],
    },
}

/// A decision returned by a scenario solver.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    /// The decision vector.
    pub x: Vec<f64>,
    /// Objective value, for problems that optimize one.
    pub objective: Option<f64>,
}

/// Failure modes of a scenario solver. The controller converts these into
/// maximal-risk records instead of aborting a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SolveError {
    /// The solver needs at least one scenario.
    #[error("cannot solve with an empty scenario list")]
    EmptyScenarios,
    /// The sampled program has no finite optimum.
    #[error("the scenario program is unbounded")]
    Unbounded,
    /// The sampled program has no feasible point.
    #[error("the scenario program is infeasible")]
    Infeasible,
    /// The path planner found no collision-free route at any resolution.
    #[error("no collision-free path found at any grid resolution")]
    PlannerFailed,
}

/// A repetitive scenario-design problem: sampler, solver and risk oracle.
///
/// `t` is the 1-based step index; it only matters for problems whose
/// distribution shifts over time. Solvers are deterministic functions of
/// their scenario list, so identical seeds give identical runs.
pub trait ScenarioProblem {
    /// Draws one scenario from the step-`t` distribution.
    fn sample(&self, rng: &mut dyn RngCore, t: u64) -> Constraint;

    /// Computes the scenario decision for the given constraint set.
    fn solve(&self, scenarios: &[Constraint], t: u64) -> Result<Solution, SolveError>;

    /// The constraint function `g(x, ξ)`; positive values are violations.
    ///
    /// # Panics
    ///
    /// Panics when the scenario payload does not belong to this problem.
    fn constraint_value(&self, solution: &Solution, scenario: &Constraint, t: u64) -> f64;

    /// Closed-form risk `P[g(x, ξ) > 0]` under the step-`t` distribution,
    /// when the problem admits one.
    fn exact_risk(&self, solution: &Solution, t: u64) -> Option<f64>;
}

/// Standard normal cdf `Φ(z)`, via `erfc` to keep relative accuracy in the
/// tails.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// A scalar sampling distribution with a closed-form cdf, used by
/// [`max_coordinate_problem`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalarDist {
    /// Uniform on `(0, 1)`.
    Uniform01,
    /// With probability `atom_mass` the value is exactly 1, otherwise
    /// uniform on `(0, 1)`: a point mass at the top of the support.
    TopAtomMixture {
        /// Probability of drawing the atom; must lie in `[0, 1)`.
        atom_mass: f64,
    },
}

impl ScalarDist {
    /// Draws one value.
    pub fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        match *self {
            ScalarDist::Uniform01 => rng.gen::<f64>(),
            ScalarDist::TopAtomMixture { atom_mass } => {
                if rng.gen::<f64>() < atom_mass {
                    1.0
                } else {
                    rng.gen::<f64>()
                }
            }
        }
    }

    /// The cdf `F(x) = P[u ≤ x]`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        match *self {
            ScalarDist::Uniform01 => x,
            ScalarDist::TopAtomMixture { atom_mass } => (1.0 - atom_mass) * x,
        }
    }
}

/// Synthetic fixed-complexity problem of known dimension `d`.
///
/// Scenarios are uniform draws on `(0, 1)`; the "decision" is the threshold
/// `m` equal to the `d`-th smallest scenario (the worst case `m = 1` when
/// fewer than `d` scenarios are given) and a scenario `u` is violated when
/// `u < m`. The risk is therefore exactly `m`, and the `d`-th order
/// statistic of `N` uniforms follows `Beta(d, N−d+1)` — the fixed-complexity
/// law — so the controller can be exercised against the exact model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyntheticBeta {
    d: u32,
}

/// Builds the synthetic problem; `d ≥ 1`.
pub fn synthetic_beta_problem(d: u32) -> SyntheticBeta {
    assert!(d >= 1, "synthetic_beta_problem: complexity d must be >= 1");
    SyntheticBeta { d }
}

impl SyntheticBeta {
    fn scalar(&self, scenario: &Constraint) -> f64 {
        match scenario {
            Constraint::Scalar(u) => *u,
            other => panic!("synthetic problem got a foreign scenario payload: {other:?}"),
        }
    }
}

impl ScenarioProblem for SyntheticBeta {
    fn sample(&self, rng: &mut dyn RngCore, _t: u64) -> Constraint {
        Constraint::Scalar(rng.gen::<f64>())
    }

    fn solve(&self, scenarios: &[Constraint], _t: u64) -> Result<Solution, SolveError> {
        let mut values: Vec<f64> = scenarios.iter().map(|s| self.scalar(s)).collect();
        let m = if values.len() < self.d as usize {
            1.0
        } else {
            let k = self.d as usize - 1;
            *values.select_nth_unstable_by(k, |a, b| a.total_cmp(b)).1
        };
        Ok(Solution {
            x: vec![m],
            objective: Some(m),
        })
    }

    fn constraint_value(&self, solution: &Solution, scenario: &Constraint, _t: u64) -> f64 {
        solution.x[0] - self.scalar(scenario)
    }

    fn exact_risk(&self, solution: &Solution, _t: u64) -> Option<f64> {
        Some(solution.x[0])
    }
}

/// The scalar half-line problem `min x` s.t. `x ≥ u` over Gaussian samples.
/// Fixed complexity 1: only the largest sample supports the solution.
#[derive(Debug, Clone, Copy)]
pub struct HalfLine {
    mu: f64,
    sigma: f64,
    dist: Normal<f64>,
}

/// Builds the half-line problem with `u ~ 𝒩(mu, sigma²)`; `sigma > 0`.
pub fn half_line_problem(mu: f64, sigma: f64) -> HalfLine {
    assert!(
        sigma > 0.0 && sigma.is_finite(),
        "half_line_problem: sigma must be positive"
    );
    HalfLine {
        mu,
        sigma,
        dist: Normal::new(mu, sigma).expect("parameters validated"),
    }
}

impl HalfLine {
    fn scalar(&self, scenario: &Constraint) -> f64 {
        match scenario {
            Constraint::Scalar(u) => *u,
            other => panic!("half-line problem got a foreign scenario payload: {other:?}"),
        }
    }
}

impl ScenarioProblem for HalfLine {
    fn sample(&self, rng: &mut dyn RngCore, _t: u64) -> Constraint {
        Constraint::Scalar(self.dist.sample(rng))
    }

    fn solve(&self, scenarios: &[Constraint], _t: u64) -> Result<Solution, SolveError> {
        if scenarios.is_empty() {
            return Err(SolveError::EmptyScenarios);
        }
        let x = scenarios
            .iter()
            .map(|s| self.scalar(s))
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(Solution {
            x: vec![x],
            objective: Some(x),
        })
    }

    fn constraint_value(&self, solution: &Solution, scenario: &Constraint, _t: u64) -> f64 {
        self.scalar(scenario) - solution.x[0]
    }

    fn exact_risk(&self, solution: &Solution, _t: u64) -> Option<f64> {
        Some(1.0 - normal_cdf((solution.x[0] - self.mu) / self.sigma))
    }
}

/// The coordinate-bound problem `min Σx` s.t. `min_i x⁽ⁱ⁾ ≥ u` with scalar
/// samples from a configurable distribution. The optimum is `m·𝟙` with
/// `m = max_j u_j`, so the effective complexity is 1 for continuous
/// distributions — and degenerate when the distribution has a point mass at
/// the top of its support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxCoordinate {
    dim: usize,
    dist: ScalarDist,
}

/// Builds the coordinate-bound problem; `dim ≥ 1`, atom mass in `[0, 1)`.
pub fn max_coordinate_problem(dim: usize, dist: ScalarDist) -> MaxCoordinate {
    assert!(dim >= 1, "max_coordinate_problem: dim must be >= 1");
    if let ScalarDist::TopAtomMixture { atom_mass } = dist {
        assert!(
            (0.0..1.0).contains(&atom_mass),
            "max_coordinate_problem: atom mass must lie in [0, 1)"
        );
    }
    MaxCoordinate { dim, dist }
}

impl MaxCoordinate {
    fn scalar(&self, scenario: &Constraint) -> f64 {
        match scenario {
            Constraint::Scalar(u) => *u,
            other => panic!("coordinate-bound problem got a foreign scenario payload: {other:?}"),
        }
    }
}

impl ScenarioProblem for MaxCoordinate {
    fn sample(&self, rng: &mut dyn RngCore, _t: u64) -> Constraint {
        Constraint::Scalar(self.dist.sample(rng))
    }

    fn solve(&self, scenarios: &[Constraint], _t: u64) -> Result<Solution, SolveError> {
        if scenarios.is_empty() {
            return Err(SolveError::EmptyScenarios);
        }
        let m = scenarios
            .iter()
            .map(|s| self.scalar(s))
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(Solution {
            x: vec![m; self.dim],
            objective: Some(m * self.dim as f64),
        })
    }

    fn constraint_value(&self, solution: &Solution, scenario: &Constraint, _t: u64) -> f64 {
        let floor = solution.x.iter().copied().fold(f64::INFINITY, f64::min);
        self.scalar(scenario) - floor
    }

    fn exact_risk(&self, solution: &Solution, _t: u64) -> Option<f64> {
        let floor = solution.x.iter().copied().fold(f64::INFINITY, f64::min);
        // Violation is u > floor strictly, so an atom sitting exactly at the
        // solution level does not violate it.
        Some(1.0 - self.dist.cdf(floor))
    }
}

#[cfg(test)]
#[allow(clippy::excessive_precision)] // oracle constants keep all reference digits
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Two-sided Kolmogorov–Smirnov statistic of a sample against a cdf.
    pub(crate) fn ks_statistic(sample: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
        sample.sort_by(f64::total_cmp);
        let n = sample.len() as f64;
        sample
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let f = cdf(v);
                (f - i as f64 / n).max((i + 1) as f64 / n - f)
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn normal_cdf_reference_values() {
        let cases = [
            (-8.0, 6.2209605742717841235e-16),
            (-6.0, 9.865876450376981407e-10),
            (-2.5, 0.006209665325776135167),
            (-1.0, 0.15865525393145705141),
            (0.0, 0.5),
            (0.5, 0.69146246127401310364),
            (1.0, 0.84134474606854294859),
            (2.5, 0.99379033467422386483),
            (6.0, 0.99999999901341235496),
            (std::f64::consts::FRAC_1_SQRT_2, 0.76024993890652326884),
        ];
        for (z, want) in cases {
            let got = normal_cdf(z);
            assert!(
                ((got - want) / want).abs() <= 1e-11,
                "normal_cdf({z}) = {got}, want {want}"
            );
        }
    }

    #[test]
    fn scalar_dist_cdf() {
        assert_eq!(ScalarDist::Uniform01.cdf(0.3), 0.3);
        assert_eq!(ScalarDist::Uniform01.cdf(-1.0), 0.0);
        assert_eq!(ScalarDist::Uniform01.cdf(2.0), 1.0);
        let mix = ScalarDist::TopAtomMixture { atom_mass: 0.05 };
        assert!((mix.cdf(0.5) - 0.475).abs() <= 1e-15);
        assert_eq!(mix.cdf(1.0), 1.0);
        // Just below the atom, the missing mass is exactly the atom's.
        assert!((mix.cdf(1.0 - 1e-12) - 0.95).abs() <= 1e-9);
    }

    #[test]
    fn scalar_dist_atom_frequency() {
        let mix = ScalarDist::TopAtomMixture { atom_mass: 0.05 };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws = 100_000;
        let atoms = (0..draws).filter(|_| mix.sample(&mut rng) == 1.0).count();
        let freq = atoms as f64 / draws as f64;
        assert!((freq - 0.05).abs() <= 0.003, "atom frequency {freq}");
    }

    #[test]
    fn synthetic_beta_worst_case_below_complexity() {
        let p = synthetic_beta_problem(5);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..5 {
            let scenarios: Vec<_> = (0..n).map(|_| p.sample(&mut rng, 1)).collect();
            let sol = p.solve(&scenarios, 1).unwrap();
            assert_eq!(p.exact_risk(&sol, 1), Some(1.0));
        }
    }

    #[test]
    fn synthetic_beta_risk_means_match_beta_law() {
        // The d-th order statistic of N uniforms has mean d/(N+1).
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for (d, n, reps) in [(3u32, 3usize, 100_000usize), (3, 40, 20_000)] {
            let p = synthetic_beta_problem(d);
            let mut sum = 0.0;
            for t in 0..reps {
                let scenarios: Vec<_> = (0..n).map(|_| p.sample(&mut rng, t as u64)).collect();
                let sol = p.solve(&scenarios, t as u64).unwrap();
                sum += p.exact_risk(&sol, t as u64).unwrap();
            }
            let mean = sum / reps as f64;
            let want = f64::from(d) / (n as f64 + 1.0);
            assert!(
                (mean - want).abs() <= 0.01,
                "d={d}, N={n}: mean {mean}, want {want}"
            );
        }
    }

    #[test]
    fn synthetic_beta_violations_are_scenarios_below_threshold() {
        let p = synthetic_beta_problem(2);
        let scenarios = vec![
            Constraint::Scalar(0.9),
            Constraint::Scalar(0.4),
            Constraint::Scalar(0.1),
        ];
        let sol = p.solve(&scenarios, 1).unwrap();
        assert_eq!(sol.x[0], 0.4); // 2nd smallest
        assert!(p.constraint_value(&sol, &Constraint::Scalar(0.1), 1) > 0.0);
        assert!(p.constraint_value(&sol, &Constraint::Scalar(0.9), 1) < 0.0);
    }

    #[test]
    fn half_line_takes_the_max() {
        let p = half_line_problem(1.0, std::f64::consts::SQRT_2);
        let scenarios = vec![
            Constraint::Scalar(0.2),
            Constraint::Scalar(1.7),
            Constraint::Scalar(-0.4),
        ];
        let sol = p.solve(&scenarios, 1).unwrap();
        assert_eq!(sol.x, vec![1.7]);
        assert_eq!(sol.objective, Some(1.7));
        // Every scenario is satisfied after solving.
        for s in &scenarios {
            assert!(p.constraint_value(&sol, s, 1) <= 1e-9);
        }
        assert_eq!(p.solve(&[], 1).unwrap_err(), SolveError::EmptyScenarios);
    }

    #[test]
    fn half_line_risk_at_the_mean_is_half() {
        let p = half_line_problem(1.0, std::f64::consts::SQRT_2);
        let sol = Solution {
            x: vec![1.0],
            objective: Some(1.0),
        };
        assert!((p.exact_risk(&sol, 1).unwrap() - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn half_line_risk_decreases_in_the_decision() {
        let p = half_line_problem(0.0, 1.0);
        let mut prev = 1.0;
        for i in -30..=30 {
            let sol = Solution {
                x: vec![i as f64 * 0.2],
                objective: None,
            };
            let risk = p.exact_risk(&sol, 1).unwrap();
            assert!((0.0..=1.0).contains(&risk));
            assert!(risk <= prev);
            prev = risk;
        }
    }

    /// With N scenarios the half-line risk is exactly Beta(1, N)
    /// distributed (fixed complexity 1).
    #[test]
    fn half_line_risk_matches_beta_law() {
        let p = half_line_problem(1.0, std::f64::consts::SQRT_2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 22;
        let reps = 10_000;
        let mut risks: Vec<f64> = (0..reps)
            .map(|t| {
                let scenarios: Vec<_> = (0..n).map(|_| p.sample(&mut rng, t)).collect();
                let sol = p.solve(&scenarios, t).unwrap();
                p.exact_risk(&sol, t).unwrap()
            })
            .collect();
        let beta_1_n = |v: f64| 1.0 - (1.0 - v).powi(n);
        let ks = ks_statistic(&mut risks, beta_1_n);
        assert!(ks <= 0.02, "KS statistic {ks}");
    }

    /// Only the largest scenario supports the half-line solution: removing
    /// any other leaves the decision unchanged (fixed complexity 1).
    #[test]
    fn half_line_support_set_has_size_one() {
        let p = half_line_problem(1.0, std::f64::consts::SQRT_2);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let scenarios: Vec<_> = (0..30).map(|_| p.sample(&mut rng, 1)).collect();
        let full = p.solve(&scenarios, 1).unwrap();
        let mut support = 0;
        for skip in 0..scenarios.len() {
            let reduced: Vec<_> = scenarios
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != skip)
                .map(|(_, s)| s.clone())
                .collect();
            if p.solve(&reduced, 1).unwrap() != full {
                support += 1;
            }
        }
        assert_eq!(support, 1);
    }

    #[test]
    fn max_coordinate_examples() {
        let p = max_coordinate_problem(400, ScalarDist::Uniform01);
        let scenarios = vec![Constraint::Scalar(0.3), Constraint::Scalar(0.9)];
        let sol = p.solve(&scenarios, 1).unwrap();
        assert_eq!(sol.x.len(), 400);
        assert!(sol.x.iter().all(|&c| c == 0.9));
        assert!((p.exact_risk(&sol, 1).unwrap() - 0.1).abs() <= 1e-12);
        for s in &scenarios {
            assert!(p.constraint_value(&sol, s, 1) <= 1e-9);
        }
    }

    #[test]
    fn max_coordinate_atom_draw_is_safe() {
        // Nothing can exceed the top atom, so hitting it zeroes the risk.
        let p = max_coordinate_problem(10, ScalarDist::TopAtomMixture { atom_mass: 0.05 });
        let scenarios = vec![Constraint::Scalar(0.4), Constraint::Scalar(1.0)];
        let sol = p.solve(&scenarios, 1).unwrap();
        assert_eq!(p.exact_risk(&sol, 1), Some(0.0));
    }

    #[test]
    fn max_coordinate_risk_matches_beta_law() {
        let p = max_coordinate_problem(400, ScalarDist::Uniform01);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 22;
        let reps = 10_000;
        let mut risks: Vec<f64> = (0..reps)
            .map(|t| {
                let scenarios: Vec<_> = (0..n).map(|_| p.sample(&mut rng, t)).collect();
                let sol = p.solve(&scenarios, t).unwrap();
                p.exact_risk(&sol, t).unwrap()
            })
            .collect();
        let beta_1_n = |v: f64| 1.0 - (1.0 - v).powi(n);
        let ks = ks_statistic(&mut risks, beta_1_n);
        assert!(ks <= 0.02, "KS statistic {ks}");
    }
}
