//! Python bindings for the scenario-sizer library.
//!
//! The extension module `scenario_sizer_py` exposes the pieces a notebook
//! session actually needs:
//!
//! - the special functions (`log_gamma`, `digamma`, `trigamma`, `log_beta`,
//!   `reg_inc_beta`) for cross-checking against SciPy,
//! - the risk law [`BetaRiskModel`] with its pdf/cdf,
//! - `optimal_sample_size` (the cdf bisection),
//! - `fit` (the weighted maximum-likelihood estimator) over `(v, N)` or
//!   `(v, N, w)` tuples,
//! - `hoeffding_confidence` for Bernoulli risk estimates, and
//! - `run`, which drives a full online design loop from the same
//!   `key = value` configuration keys the command-line tool reads, returning
//!   one list of step records per replication.
//!
//! Invalid arguments surface as `ValueError`; the wrapped library never
//! panics on checked input.

// The #[pyfunction] trampolines convert PyErr into PyErr; clippy flags the
// macro expansion, not code in this file.
#![allow(clippy::useless_conversion)]

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyAny, PyDict};

use scenario_sizer::cli::config::parse_run_spec;
use scenario_sizer::controller::{self, TraceRecord};
use scenario_sizer::mle::{self, DataPoint, Dataset};
use scenario_sizer::risk_model;
use scenario_sizer::sizer::{self, SizerQuery};
use scenario_sizer::specfun;

/// Natural log of the gamma function, `ln Γ(z)` for `z > 0`.
#[pyfunction]
pub fn log_gamma(z: f64) -> f64 {
    specfun::log_gamma(z)
}

/// Digamma function `ψ(z) = d/dz ln Γ(z)` for `z > 0`.
#[pyfunction]
pub fn digamma(z: f64) -> f64 {
    specfun::digamma(z)
}

/// Trigamma function `ψ'(z)` for `z > 0`.
#[pyfunction]
pub fn trigamma(z: f64) -> f64 {
    specfun::trigamma(z)
}

/// Natural log of the beta function, `ln B(a, b)` for `a, b > 0`.
#[pyfunction]
pub fn log_beta(a: f64, b: f64) -> f64 {
    specfun::log_beta(a, b)
}

/// Regularized incomplete beta function `I_x(a, b)`.
#[pyfunction]
pub fn reg_inc_beta(x: f64, a: f64, b: f64) -> f64 {
    specfun::reg_inc_beta(x, a, b)
}

/// Two-sided Hoeffding bound on a Bernoulli risk estimate from `samples`
/// draws missing the true value by more than `accuracy`.
#[pyfunction]
pub fn hoeffding_confidence(samples: usize, accuracy: f64) -> f64 {
    controller::hoeffding_confidence(samples, accuracy)
}

/// Smallest sample size `N ≤ n_max` whose compliance `C(epsilon, N)`
/// reaches `beta` under the shape `theta`.
#[pyfunction]
#[pyo3(signature = (theta, epsilon, beta, n_max = 1_000_000))]
pub fn optimal_sample_size(theta: f64, epsilon: f64, beta: f64, n_max: u32) -> PyResult<u32> {
    let query = SizerQuery::new(theta, epsilon, beta, n_max)
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(sizer::optimal_sample_size(query))
}

/// The two-parameter risk law `f_theta(v, N)`: Beta-shaped in the risk `v`
/// with the sample size `N` entering the second shape parameter.
#[pyclass(frozen)]
pub struct BetaRiskModel {
    inner: risk_model::BetaRiskModel,
}

#[pymethods]
impl BetaRiskModel {
    /// Builds the law for a positive finite shape `theta`.
    #[new]
    pub fn new(theta: f64) -> PyResult<Self> {
        let inner = risk_model::BetaRiskModel::new(theta)
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(BetaRiskModel { inner })
    }

    /// The shape parameter.
    #[getter]
    pub fn theta(&self) -> f64 {
        self.inner.theta()
    }

    /// Density of the risk `v` at sample size `n`.
    pub fn pdf(&self, v: f64, n: u32) -> f64 {
        self.inner.pdf(v, n)
    }

    /// Natural log of [`pdf`](Self::pdf); `-inf` where the density is 0.
    pub fn log_pdf(&self, v: f64, n: u32) -> f64 {
        self.inner.log_pdf(v, n)
    }

    /// Compliance `C(eps, n) = P[V ≤ eps]` at sample size `n`.
    pub fn cdf_at(&self, eps: f64, n: u32) -> f64 {
        self.inner.cdf_at(eps, n)
    }

    pub fn __repr__(&self) -> String {
        format!("BetaRiskModel(theta={})", self.inner.theta())
    }
}

/// Weighted maximum-likelihood fit of the risk law's shape.
///
/// `points` is an iterable of `(risk, sample_size)` or
/// `(risk, sample_size, weight)` tuples.  Returns a dict with keys
/// `"theta"` (a float, or `None` when every observation is uninformative
/// so the likelihood is flat) and `"loglik"`.
#[pyfunction]
pub fn fit<'py>(py: Python<'py>, points: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyDict>> {
    let mut data = Vec::new();
    for (index, item) in points.iter()?.enumerate() {
        let item = item?;
        let (risk, size, weight) = match item.extract::<(f64, u32, f64)>() {
            Ok(triple) => triple,
            Err(_) => {
                let (risk, size) = item.extract::<(f64, u32)>().map_err(|_| {
                    PyValueError::new_err(format!(
                        "point {index}: expected a (risk, sample_size) or \
                         (risk, sample_size, weight) tuple"
                    ))
                })?;
                (risk, size, 1.0)
            }
        };
        let point = DataPoint::weighted(risk, size, weight)
            .map_err(|e| PyValueError::new_err(format!("point {index}: {e}")))?;
        data.push(point);
    }
    let result =
        mle::fit(&Dataset::from_points(data)).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let out = PyDict::new_bound(py);
    out.set_item("theta", result.theta)?;
    out.set_item("loglik", result.loglik)?;
    Ok(out)
}

fn record_to_dict<'py>(py: Python<'py>, record: &TraceRecord) -> PyResult<Bound<'py, PyDict>> {
    let out = PyDict::new_bound(py);
    out.set_item("t", record.t)?;
    out.set_item("N", record.n)?;
    out.set_item("theta", record.theta)?;
    out.set_item("risk", record.risk)?;
    out.set_item("violation", record.violation)?;
    out.set_item("status", record.status.to_string())?;
    Ok(out)
}

/// Runs the online design loop.
///
/// `config` is a dict using the same keys as the command-line
/// configuration file (`problem.id`, `controller.epsilon`,
/// `controller.beta`, `run.steps`, `run.seed`, ...).  Returns one trace
/// per replication; each trace is a list of per-step dicts with keys
/// `t`, `N`, `theta`, `risk`, `violation`, and `status`.  Replication
/// `r` runs with seed `run.seed + r`, matching the command-line tool.
#[pyfunction]
pub fn run<'py>(
    py: Python<'py>,
    config: &Bound<'py, PyDict>,
) -> PyResult<Vec<Vec<Bound<'py, PyDict>>>> {
    let mut text = String::new();
    for (key, value) in config.iter() {
        let key: String = key
            .extract()
            .map_err(|_| PyValueError::new_err("config keys must be strings"))?;
        text.push_str(&format!("{key} = {}\n", value.str()?));
    }
    let spec = parse_run_spec(&text).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let problem = spec.problem.build();
    let mut traces = Vec::with_capacity(spec.reps as usize);
    for rep in 0..spec.reps {
        let trace = controller::run(
            problem.as_ref(),
            &spec.controller,
            spec.steps,
            spec.seed.wrapping_add(u64::from(rep)),
        )
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
        let records: Vec<Bound<'py, PyDict>> = trace
            .iter()
            .map(|r| record_to_dict(py, r))
            .collect::<PyResult<_>>()?;
        traces.push(records);
    }
    Ok(traces)
}

/// Registers the extension module (imported as `scenario_sizer_py`).
#[pymodule]
#[pyo3(name = "scenario_sizer_py")]
pub fn register(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(log_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(digamma, m)?)?;
    m.add_function(wrap_pyfunction!(trigamma, m)?)?;
    m.add_function(wrap_pyfunction!(log_beta, m)?)?;
    m.add_function(wrap_pyfunction!(reg_inc_beta, m)?)?;
    m.add_function(wrap_pyfunction!(hoeffding_confidence, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_sample_size, m)?)?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_class::<BetaRiskModel>()?;
    Ok(())
}
