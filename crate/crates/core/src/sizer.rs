//! Inversion of the risk cdf: the smallest sample size whose predicted risk
//! stays below a tolerance with the requested confidence,
//!
//! ```text
//! N̂(θ; ε, β) = min{ N ∈ ℕ : C_θ(ε, N) ≥ β }.
//! ```
//!
//! For sizes at or below `θ` the cdf is `ε^N < β` (tolerances satisfy
//! `ε < β`), so the minimizer always lies in the Beta regime `N > θ`, where
//! the cdf increases with `N`. That makes integer bisection sound: bracket
//! by doubling from `⌊θ⌋ + 1`, then halve. Results are clamped to a caller
//! budget `n_max` instead of failing.

use thiserror::Error;

use crate::risk_model::BetaRiskModel;

/// Errors from [`SizerQuery`] construction.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum SizerError {
    /// The shape parameter must be a positive finite number.
    #[error("shape parameter theta must be positive and finite, got {0}")]
    InvalidTheta(f64),
    /// Tolerances must satisfy `0 < ε < β < 1`.
    #[error("tolerances must satisfy 0 < epsilon < beta < 1, got epsilon={epsilon}, beta={beta}")]
    InvalidTolerances {
        /// Offending risk tolerance.
        epsilon: f64,
        /// Offending confidence level.
        beta: f64,
    },
    /// The sample-size budget must be at least one.
    #[error("sample-size budget n_max must be positive")]
    ZeroBudget,
}

/// A validated sample-size query: shape `θ`, tolerances `0 < ε < β < 1` and
/// a budget `n_max ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizerQuery {
    theta: f64,
    epsilon: f64,
    beta: f64,
    n_max: u32,
}

impl SizerQuery {
    /// Validates and builds a query.
    pub fn new(theta: f64, epsilon: f64, beta: f64, n_max: u32) -> Result<Self, SizerError> {
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(SizerError::InvalidTheta(theta));
        }
        if !(0.0 < epsilon && epsilon < beta && beta < 1.0) {
            return Err(SizerError::InvalidTolerances { epsilon, beta });
        }
        if n_max == 0 {
            return Err(SizerError::ZeroBudget);
        }
        Ok(Self {
            theta,
            epsilon,
            beta,
            n_max,
        })
    }

    /// The shape parameter `θ`.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// The risk tolerance `ε`.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// The confidence level `β`.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// The sample-size budget.
    pub fn n_max(&self) -> u32 {
        self.n_max
    }
}

/// Smallest sample size meeting the query's confidence target, clamped to
/// the budget: `min{N̂(θ; ε, β), n_max}`.
pub fn optimal_sample_size(query: SizerQuery) -> u32 {
    let model = BetaRiskModel::new(query.theta).expect("theta validated by SizerQuery");
    let meets = |n: u32| model.cdf_at(query.epsilon, n) >= query.beta;

    // Sizes at or below θ evaluate to ε^N < β, so start just beyond θ.
    let first = (query.theta.floor() + 1.0).min(f64::from(u32::MAX)) as u32;
    if first >= query.n_max {
        return query.n_max;
    }
    if meets(first) {
        return first;
    }

    // Bracket by doubling: lo always fails, hi (once found) succeeds.
    let mut lo = first;
    let mut span = 1u32;
    let mut hi = loop {
        let candidate = lo.saturating_add(span).min(query.n_max);
        if meets(candidate) {
            break candidate;
        }
        if candidate == query.n_max {
            return query.n_max; // budget exhausted before reaching β
        }
        lo = candidate;
        span = span.saturating_mul(2);
    };

    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if meets(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;

    fn query(theta: f64, epsilon: f64, beta: f64, n_max: u32) -> SizerQuery {
        SizerQuery::new(theta, epsilon, beta, n_max).unwrap()
    }

    /// Independent reference: scan sizes upward until the cdf target holds.
    fn linear_scan(q: SizerQuery) -> u32 {
        let model = BetaRiskModel::new(q.theta()).unwrap();
        let mut n = 1;
        while n < q.n_max() {
            if model.cdf_at(q.epsilon(), n) >= q.beta() {
                return n;
            }
            n += 1;
        }
        q.n_max()
    }

    #[test]
    fn validation() {
        assert!(SizerQuery::new(0.0, 0.1, 0.9, 100).is_err());
        assert!(SizerQuery::new(1.0, 0.9, 0.1, 100).is_err());
        assert!(SizerQuery::new(1.0, 0.1, 0.1, 100).is_err());
        assert!(SizerQuery::new(1.0, 0.0, 0.9, 100).is_err());
        assert!(SizerQuery::new(1.0, 0.1, 1.0, 100).is_err());
        assert!(SizerQuery::new(1.0, 0.1, 0.9, 0).is_err());
        assert!(SizerQuery::new(1.0, 0.1, 0.9, 1).is_ok());
    }

    /// Values confirmed by a linear scan of the cdf run ahead of time.
    #[test]
    fn reference_sizes() {
        let cases = [
            (0.5, 13),
            (1.0, 22), // smallest N with 1 − 0.9^N ≥ 0.9
            (2.0, 38),
            (2.5, 45),
            (3.0, 52),
            (3.3, 56),
            (5.0, 78),
            (7.3, 107),
            (10.0, 140),
            (20.0, 256),
        ];
        for (theta, want) in cases {
            let got = optimal_sample_size(query(theta, 0.1, 0.9, 1_000_000));
            assert_eq!(got, want, "theta={theta}");
        }
        assert_eq!(optimal_sample_size(query(1.0, 0.05, 0.99, 1_000_000)), 90);
    }

    #[test]
    fn clamps_to_budget() {
        assert_eq!(optimal_sample_size(query(1.0, 0.1, 0.9, 10)), 10);
        // Budget below the saturated regime's edge: still the budget.
        assert_eq!(optimal_sample_size(query(50.0, 0.1, 0.9, 20)), 20);
        assert_eq!(optimal_sample_size(query(1.0, 0.1, 0.9, 22)), 22);
        assert_eq!(optimal_sample_size(query(1.0, 0.1, 0.9, 21)), 21);
    }

    #[test]
    fn matches_linear_scan() {
        for theta in [0.2, 0.9, 1.0, 1.7, 4.0, 9.9, 26.0, 41.5] {
            for (eps, beta) in [(0.05, 0.9), (0.1, 0.5), (0.2, 0.21), (0.01, 0.99)] {
                let q = query(theta, eps, beta, 100_000);
                assert_eq!(
                    optimal_sample_size(q),
                    linear_scan(q),
                    "theta={theta}, eps={eps}, beta={beta}"
                );
            }
        }
    }

    #[test]
    fn exceeds_shape_parameter() {
        for theta in [0.3, 1.0, 5.5, 17.0] {
            let n = optimal_sample_size(query(theta, 0.1, 0.9, 1_000_000));
            assert!(f64::from(n) > theta);
        }
    }

    #[test]
    fn monotone_in_each_argument() {
        // Non-decreasing in θ...
        let mut prev = 0;
        for i in 1..=40 {
            let n = optimal_sample_size(query(i as f64 * 0.5, 0.1, 0.9, 1_000_000));
            assert!(n >= prev, "theta grid broke at {i}");
            prev = n;
        }
        // ...non-decreasing in β...
        let mut prev = 0;
        for beta in [0.3, 0.5, 0.7, 0.9, 0.99] {
            let n = optimal_sample_size(query(2.5, 0.1, beta, 1_000_000));
            assert!(n >= prev, "beta grid broke at {beta}");
            prev = n;
        }
        // ...non-increasing in ε.
        let mut prev = u32::MAX;
        for eps in [0.02, 0.05, 0.1, 0.2, 0.3] {
            let n = optimal_sample_size(query(2.5, eps, 0.9, 1_000_000));
            assert!(n <= prev, "epsilon grid broke at {eps}");
            prev = n;
        }
    }

    /// Small parameter perturbations move the answer by at most one step.
    #[test]
    fn pseudo_continuous_in_theta() {
        for theta in [0.7, 1.0, 2.5, 7.3, 20.0, 33.33] {
            let base = optimal_sample_size(query(theta, 0.1, 0.9, 1_000_000));
            for nudged in [theta - 1e-9, theta + 1e-9] {
                let n = optimal_sample_size(query(nudged, 0.1, 0.9, 1_000_000));
                assert!(
                    n.abs_diff(base) <= 1,
                    "theta={theta}: {base} vs {n} at {nudged}"
                );
            }
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            /// Doubling + bisection agrees with an exhaustive scan.
            #[test]
            fn bisection_equals_scan(
                theta in 0.01f64..50.0,
                epsilon in 0.011f64..0.3,
                gap in 0.01f64..0.68,
            ) {
                let beta = (epsilon + gap).min(0.99);
                let q = query(theta, epsilon, beta, 50_000);
                prop_assert_eq!(optimal_sample_size(q), linear_scan(q));
            }
        }
    }
}
