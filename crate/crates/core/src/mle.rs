//! Weighted maximum-likelihood estimation of the risk-model shape `θ`.
//!
//! Given observations `D = {(v_j, N_j, w_j)}` the weighted average
//! log-likelihood is
//!
//! ```text
//! ℓ(θ; D) = Σ_j w_j ln f_θ(v_j, N_j) / Σ_j w_j,
//! ```
//!
//! a piecewise function of `θ`: the positive axis splits at the distinct
//! sample sizes, and on each interval between consecutive split points every
//! observation contributes either a constant (risk 0, sample size 0, or an
//! already-saturated branch) or a smooth strictly concave Beta term. The
//! function is upper semi-continuous — its only jumps come from worst-case
//! observations (`v = 1`), whose contribution rises from `-∞` to `ln N` at
//! `θ = N` — so a global maximizer always exists and is found exactly by
//! comparing, per interval, the closed left endpoint with at most one
//! interior stationary point located by safeguarded Newton–Raphson on `ℓ'`:
//!
//! ```text
//! ℓ'(θ)  = Σ_active w_j [ln v_j − ln(1−v_j) − ψ(θ) + ψ(N_j−θ+1)] / Σ w_j,
//! ℓ''(θ) = −Σ_active w_j [ψ'(θ) + ψ'(N_j−θ+1)] / Σ w_j < 0,
//! ```
//!
//! where the active set holds the observations still on their Beta branch
//! (`v_j ∈ (0,1)` and `N_j > θ` throughout the interval).
//!
//! The module also provides the asymptotic log-likelihood `ℓ_N` — the exact
//! expectation of `ln f_θ(V, N)` under `V ~ Beta(θ∘, N−θ∘+1)` — which the
//! tests use as an analytic oracle for the fitter's large-sample behaviour.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::risk_model::BetaRiskModel;
use crate::specfun::{digamma, log_beta, log_gamma, trigamma};

/// Convergence tolerance for the per-interval Newton iteration.
const NEWTON_TOL: f64 = 1e-10;

/// Newton iteration cap; hitting it is recorded in the fit diagnostics.
const NEWTON_MAX_ITER: usize = 100;

/// Clamp margin keeping the initial Newton iterate strictly interior.
const GUESS_MARGIN: f64 = 1e-6;

/// Errors from dataset construction and fitting.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum MleError {
    /// `fit` needs at least one observation.
    #[error("dataset must contain at least one observation")]
    EmptyDataset,
    /// Observed risks live in `[0, 1]`.
    #[error("observed risk must lie in [0, 1], got {0}")]
    InvalidRisk(f64),
    /// Weights must be positive and finite.
    #[error("observation weight must be positive and finite, got {0}")]
    InvalidWeight(f64),
}

/// One observed (risk, sample size) pair together with a positive weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataPoint {
    risk: f64,
    sample_size: u32,
    weight: f64,
}

impl DataPoint {
    /// Unit-weight observation.
    pub fn new(risk: f64, sample_size: u32) -> Result<Self, MleError> {
        Self::weighted(risk, sample_size, 1.0)
    }

    /// Observation with an explicit weight.
    pub fn weighted(risk: f64, sample_size: u32, weight: f64) -> Result<Self, MleError> {
        if !(0.0..=1.0).contains(&risk) {
            return Err(MleError::InvalidRisk(risk));
        }
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(MleError::InvalidWeight(weight));
        }
        Ok(Self {
            risk,
            sample_size,
            weight,
        })
    }

    /// The observed risk `v ∈ [0, 1]`.
    pub fn risk(&self) -> f64 {
        self.risk
    }

    /// The sample size `N` the decision was computed from.
    pub fn sample_size(&self) -> u32 {
        self.sample_size
    }

    /// The observation weight `w > 0`.
    pub fn weight(&self) -> f64 {
        self.weight
    }
}

/// An ordered collection of observations.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    points: Vec<DataPoint>,
}

impl Dataset {
    /// An empty dataset.
    pub fn new() -> Self {
        Self::default()
    }

    /// Wraps an existing collection of observations.
    pub fn from_points(points: Vec<DataPoint>) -> Self {
        Self { points }
    }

    /// Appends one observation.
    pub fn push(&mut self, point: DataPoint) {
        self.points.push(point);
    }

    /// The observations, in insertion order.
    pub fn points(&self) -> &[DataPoint] {
        &self.points
    }

    /// Number of observations.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Whether the dataset holds no observations.
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// One evaluated maximizer candidate, kept for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalCandidate {
    /// Left end of the interval the candidate belongs to (closed).
    pub start: f64,
    /// Right end of the interval (open; `+∞` for the last one).
    pub end: f64,
    /// Candidate location.
    pub theta: f64,
    /// Weighted log-likelihood at `theta`.
    pub loglik: f64,
    /// Newton iterations spent (0 for endpoint candidates).
    pub newton_iterations: usize,
    /// Whether the iteration cap was reached before `|Δθ| ≤ 1e-10`.
    pub hit_iteration_cap: bool,
}

/// Outcome of [`fit`].
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    /// The maximizer, or `None` when the likelihood is flat (every
    /// observation has risk 0 or sample size 0, so the data carry no
    /// information about `θ`).
    pub theta: Option<f64>,
    /// Weighted log-likelihood at the maximizer (0 for a flat likelihood).
    pub loglik: f64,
    /// Every candidate that was evaluated, in ascending `θ` order.
    pub interval_diagnostics: Vec<IntervalCandidate>,
}

impl FitResult {
    /// Whether the likelihood was constant over the whole parameter range.
    pub fn is_flat(&self) -> bool {
        self.theta.is_none()
    }
}

/// Weighted average log-likelihood `ℓ(θ; D)`; `-∞` when any observation has
/// zero density at `θ` (a worst-case risk with `N > θ`).
///
/// # Panics
///
/// Panics if `theta` is not positive and finite or `data` is empty.
pub fn weighted_loglik(theta: f64, data: &Dataset) -> f64 {
    assert!(
        theta > 0.0 && theta.is_finite(),
        "weighted_loglik: theta must be positive and finite, got {theta}"
    );
    assert!(!data.is_empty(), "weighted_loglik: dataset is empty");
    let model = BetaRiskModel::new(theta).expect("theta validated above");
    let mut num = 0.0;
    let mut total = 0.0;
    for p in data.points() {
        num += p.weight * model.log_pdf(p.risk, p.sample_size);
        total += p.weight;
    }
    num / total
}

/// Exact asymptotic log-likelihood `ℓ_N(θ)` when risks are truly
/// `Beta(θ∘, N−θ∘+1)`-distributed: the expectation of `ln f_θ(V, N)`,
///
/// ```text
/// ℓ_N(θ) = (θ̃−1) ψ(θ∘) + (N−θ̃) ψ(N−θ∘+1) − ln Γ(θ̃) − ln Γ(N−θ̃+1)
///          + ln Γ(N+1) − (N−1) ψ(N+1),        θ̃ = min{θ, N}.
/// ```
///
/// It has its unique maximum at `θ = θ∘` and is constant on `[N, ∞)`.
///
/// # Panics
///
/// Panics unless `theta > 0`, `theta_circ > 0` and `n ≥ theta_circ`.
pub fn asymptotic_loglik(theta: f64, theta_circ: f64, n: u32) -> f64 {
    assert!(
        theta > 0.0 && theta.is_finite(),
        "asymptotic_loglik: theta must be positive and finite, got {theta}"
    );
    let n = f64::from(n);
    assert!(
        theta_circ > 0.0 && theta_circ <= n,
        "asymptotic_loglik: need 0 < theta_circ <= n, got theta_circ={theta_circ}, n={n}"
    );
    let t = theta.min(n);
    (t - 1.0) * digamma(theta_circ) + (n - t) * digamma(n - theta_circ + 1.0)
        - log_gamma(t)
        - log_gamma(n - t + 1.0)
        + log_gamma(n + 1.0)
        - (n - 1.0) * digamma(n + 1.0)
}

/// Interior-risk observations sharing one sample size, with the sufficient
/// statistics the likelihood needs from them.
struct Group {
    n: f64,
    weight: f64,
    sum_ln_v: f64,
    sum_ln_1mv: f64,
    sum_v: f64,
}

/// Dataset reduced to sufficient statistics: evaluating `ℓ`, `ℓ'` or `ℓ''`
/// costs one pass over the distinct sample sizes instead of the raw points.
struct GroupedData {
    total_weight: f64,
    /// Σ w ln N over worst-case (`v = 1`) observations; their contribution
    /// once `θ` clears the admissibility floor.
    worst_case_constant: f64,
    /// Smallest `θ` with finite likelihood: max N over `v = 1` observations
    /// (0 when there are none).
    floor: f64,
    /// Interior-risk groups in ascending sample-size order.
    groups: Vec<Group>,
}

impl GroupedData {
    fn build(data: &Dataset) -> Self {
        let mut total_weight = 0.0;
        let mut worst_case_constant = 0.0;
        let mut floor = 0u32;
        let mut by_n: BTreeMap<u32, Group> = BTreeMap::new();
        for p in data.points() {
            total_weight += p.weight;
            if p.risk == 0.0 || p.sample_size == 0 {
                continue; // ln f ≡ 0: invisible to the fit
            }
            if p.risk == 1.0 {
                worst_case_constant += p.weight * f64::from(p.sample_size).ln();
                floor = floor.max(p.sample_size);
            } else {
                let g = by_n.entry(p.sample_size).or_insert(Group {
                    n: f64::from(p.sample_size),
                    weight: 0.0,
                    sum_ln_v: 0.0,
                    sum_ln_1mv: 0.0,
                    sum_v: 0.0,
                });
                g.weight += p.weight;
                g.sum_ln_v += p.weight * p.risk.ln();
                g.sum_ln_1mv += p.weight * (-p.risk).ln_1p();
                g.sum_v += p.weight * p.risk;
            }
        }
        Self {
            total_weight,
            worst_case_constant,
            floor: f64::from(floor),
            groups: by_n.into_values().collect(),
        }
    }

    /// `ℓ(θ)` for `θ` at or above the floor.
    fn loglik_at(&self, theta: f64) -> f64 {
        let mut num = self.worst_case_constant;
        for g in &self.groups {
            num += if g.n > theta {
                (theta - 1.0) * g.sum_ln_v + (g.n - theta) * g.sum_ln_1mv
                    - g.weight * log_beta(theta, g.n - theta + 1.0)
            } else {
                g.weight * g.n.ln() + (g.n - 1.0) * g.sum_ln_v
            };
        }
        num / self.total_weight
    }

    /// Unnormalized slope `W·ℓ'(θ)` and curvature `W·ℓ''(θ)` summed over the
    /// groups still on their Beta branch, i.e. those with `n ≥ active_from`.
    fn slope_curvature(&self, theta: f64, active_from: f64) -> (f64, f64) {
        let mut slope = 0.0;
        let mut curvature = 0.0;
        for g in self.groups.iter().filter(|g| g.n >= active_from) {
            slope += g.sum_ln_v - g.sum_ln_1mv
                + g.weight * (digamma(g.n - theta + 1.0) - digamma(theta));
            curvature -= g.weight * (trigamma(theta) + trigamma(g.n - theta + 1.0));
        }
        (slope, curvature)
    }
}

/// Fits `θ` by weighted maximum likelihood.
///
/// Returns the global maximizer of [`weighted_loglik`] over `(0, ∞)`, with
/// ties broken towards the smallest `θ`, or the flat-likelihood marker when
/// the data carry no information (every observation has risk 0 or sample
/// size 0).
pub fn fit(data: &Dataset) -> Result<FitResult, MleError> {
    if data.is_empty() {
        return Err(MleError::EmptyDataset);
    }
    if data
        .points()
        .iter()
        .all(|p| p.risk == 0.0 || p.sample_size == 0)
    {
        return Ok(FitResult {
            theta: None,
            loglik: 0.0,
            interval_diagnostics: Vec::new(),
        });
    }

    let grouped = GroupedData::build(data);

    // Interval endpoints: the admissibility floor (0 stands for the open end
    // at the origin) followed by every distinct sample size beyond it.
    let mut ends = vec![grouped.floor];
    ends.extend(
        grouped
            .groups
            .iter()
            .map(|g| g.n)
            .filter(|&n| n > grouped.floor),
    );

    let mut candidates: Vec<IntervalCandidate> = Vec::new();
    for (i, &a) in ends.iter().enumerate() {
        let b = ends.get(i + 1).copied().unwrap_or(f64::INFINITY);
        if a > 0.0 {
            // Closed left endpoint; ℓ is upper semi-continuous there.
            candidates.push(IntervalCandidate {
                start: a,
                end: b,
                theta: a,
                loglik: grouped.loglik_at(a),
                newton_iterations: 0,
                hit_iteration_cap: false,
            });
        }
        if !b.is_finite() {
            continue; // beyond the last split point every group saturates
        }

        let lo = if a == 0.0 { 1e-12 } else { a + 1e-12 };
        let hi = b - 1e-9;
        let (slope_lo, _) = grouped.slope_curvature(lo, b);
        if slope_lo <= 0.0 {
            // ℓ decreases from the left edge, so the interval's maximum is
            // the (already recorded) endpoint. At the open origin the slope
            // diverges to +∞, so this cannot trigger with a = 0 for sane
            // data; record the edge value anyway rather than lose it.
            if a == 0.0 {
                candidates.push(IntervalCandidate {
                    start: a,
                    end: b,
                    theta: lo,
                    loglik: grouped.loglik_at(lo),
                    newton_iterations: 0,
                    hit_iteration_cap: false,
                });
            }
            continue;
        }
        let (slope_hi, _) = grouped.slope_curvature(hi, b);
        if slope_hi >= 0.0 {
            // ℓ still rises at the right edge: its supremum over [a, b) is
            // the limit at b, which equals ℓ(b) by continuity of the Beta
            // branch and is captured by the next interval's left endpoint.
            continue;
        }

        // Interior stationary point. Moment-matching initial iterate: the
        // Beta(θ, N−θ+1) mean is θ/(N+1), so θ₀ = v̄(N̄+1) over the active
        // groups, clamped to the interval's interior.
        let mut weight = 0.0;
        let mut sum_v = 0.0;
        let mut sum_n = 0.0;
        for g in grouped.groups.iter().filter(|g| g.n >= b) {
            weight += g.weight;
            sum_v += g.sum_v;
            sum_n += g.weight * g.n;
        }
        let guess =
            ((sum_v / weight) * (sum_n / weight + 1.0)).clamp(a + GUESS_MARGIN, b - GUESS_MARGIN);
        let (theta, iterations, capped) = newton_stationary_point(&grouped, b, lo, hi, guess);
        candidates.push(IntervalCandidate {
            start: a,
            end: b,
            theta,
            loglik: grouped.loglik_at(theta),
            newton_iterations: iterations,
            hit_iteration_cap: capped,
        });
    }

    // Candidates are in ascending θ order; `>` keeps the smallest on ties.
    let mut best = candidates[0];
    for c in &candidates[1..] {
        if c.loglik > best.loglik {
            best = *c;
        }
    }
    Ok(FitResult {
        theta: Some(best.theta),
        loglik: best.loglik,
        interval_diagnostics: candidates,
    })
}

/// Newton–Raphson for the root of `ℓ'` inside `[lo, hi]`, safeguarded by the
/// sign-change bracket: an iterate that leaves the current bracket is
/// replaced by its midpoint, so the method cannot escape the interval.
/// Caller guarantees `ℓ'(lo) > 0 > ℓ'(hi)` and strict concavity.
fn newton_stationary_point(
    grouped: &GroupedData,
    active_from: f64,
    lo: f64,
    hi: f64,
    guess: f64,
) -> (f64, usize, bool) {
    let mut bracket = (lo, hi);
    let mut theta = guess;
    for iteration in 1..=NEWTON_MAX_ITER {
        let (slope, curvature) = grouped.slope_curvature(theta, active_from);
        if slope > 0.0 {
            bracket.0 = theta;
        } else {
            bracket.1 = theta;
        }
        let mut next = theta - slope / curvature;
        if !next.is_finite() || next <= bracket.0 || next >= bracket.1 {
            next = 0.5 * (bracket.0 + bracket.1);
        }
        if (next - theta).abs() <= NEWTON_TOL {
            return (next, iteration, false);
        }
        theta = next;
    }
    (theta, NEWTON_MAX_ITER, true)
}
