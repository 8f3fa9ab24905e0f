//! Online tuning of the scenario count in repetitive scenario design.
//!
//! Scenario programs trade feasibility risk against sample size: a design
//! computed from `N` independent scenarios violates a fresh scenario with
//! some risk `V`, and the classical theory bounds the distribution of `V`
//! by a Beta law whose shape is the (usually unknown) number of support
//! scenarios.  When the same kind of problem is solved over and over, the
//! observed `(risk, sample size)` pairs reveal that shape, and with it the
//! smallest `N` meeting a target risk tolerance at a target confidence.
//!
//! The crate is organised bottom-up:
//!
//! * [`specfun`] — log-gamma, digamma/trigamma, and the regularized
//!   incomplete beta function used everywhere above.
//! * [`risk_model`] — the Beta-shaped risk density `f(v, N)` extended to
//!   the edge cases `v = 0`, `N = 0`, and `N ≤ θ`, plus its cdf.
//! * [`mle`] — weighted maximum-likelihood estimation of the shape `θ`
//!   from observed `(risk, sample size, weight)` triples.
//! * [`sizer`] — the smallest sample size whose risk cdf at the tolerance
//!   reaches the confidence target.
//! * [`problems`] — benchmark scenario problems (order-statistic
//!   surrogate, hyperplane, random linear programs, coordinate bounds,
//!   corridor path planning) behind one trait.
//! * [`controller`] — the online loop: sample, solve, observe risk,
//!   refit, resize.
//! * [`cli`] — the `scenario-sizer` command-line tool (`run`, `fit`,
//!   `size`) with CSV traces and SVG figures.
//!
//! # Example
//!
//! ```
//! use scenario_sizer::controller::{run, ControllerConfig};
//! use scenario_sizer::problems::synthetic_beta_problem;
//!
//! // A problem whose designs are supported by 5 scenarios.
//! let problem = synthetic_beta_problem(5);
//! let config = ControllerConfig::new(0.1, 0.9);
//! let trace = run(&problem, &config, 200, 7).unwrap();
//! let last = trace.last().unwrap();
//! // The controller settles near the sample size matching the target.
//! assert!(last.n >= 70 && last.n <= 90);
//! ```

pub mod cli;
pub mod controller;
pub mod mle;
pub mod problems;
pub mod risk_model;
pub mod sizer;
pub mod specfun;
