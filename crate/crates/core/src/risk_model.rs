//! The parametric risk density and its cumulative distribution.
//!
//! The risk of a decision computed from `N` sampled constraints is modelled
//! by a single-parameter family of densities on `[0, 1]`:
//!
//! ```text
//!             ⎧ 1                                   v = 0 or N = 0,
//! f_θ(v, N) = ⎨ v^(θ-1) (1-v)^(N-θ) / B(θ, N-θ+1)   v ≠ 0 and N > θ,
//!             ⎩ N v^(N-1)                           otherwise,
//! ```
//!
//! with shape parameter `θ ∈ (0, ∞)`. For `N > θ` this is the
//! `Beta(θ, N-θ+1)` density; once `N ≤ θ` it saturates at the density of the
//! worst case supported by `N` constraints, `N v^(N-1)`, which is the
//! `θ → N` limit of the Beta branch. For fixed `v ∈ (0, 1)` the map
//! `θ ↦ f_θ(v, N)` is continuous on `(0, N]` and constant beyond, while at
//! `v = 1` it jumps from `0` (for `θ < N`) to `N` (for `θ ≥ N`); it is upper
//! semi-continuous everywhere, which is what the fitting code relies on.
//!
//! The corresponding cdf at a risk tolerance `ε` is
//!
//! ```text
//!             ⎧ ε                  N = 0,
//! C_θ(ε, N) = ⎨ ε^N                1 ≤ N ≤ θ,
//!             ⎩ I_ε(θ, N-θ+1)      N > θ,
//! ```
//!
//! which is nondecreasing in `N` and is what the sample-size search inverts.

use thiserror::Error;

use crate::specfun::{log_beta, reg_inc_beta};

/// Error raised when constructing a [`BetaRiskModel`] from an invalid shape.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ModelError {
    /// The shape parameter must be a positive finite number.
    #[error("shape parameter theta must be positive and finite, got {0}")]
    InvalidTheta(f64),
}

/// The extended Beta risk model with shape parameter `θ > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaRiskModel {
    theta: f64,
}

impl BetaRiskModel {
    /// Creates a model with the given shape parameter.
    pub fn new(theta: f64) -> Result<Self, ModelError> {
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(ModelError::InvalidTheta(theta));
        }
        Ok(Self { theta })
    }

    /// The shape parameter `θ`.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Density `f_θ(v, n)` of observing risk `v` after sizing with `n`
    /// constraints.
    ///
    /// # Panics
    ///
    /// Panics if `v` is outside `[0, 1]`.
    pub fn pdf(&self, v: f64, n: u32) -> f64 {
        assert!(
            (0.0..=1.0).contains(&v),
            "pdf: risk must lie in [0, 1], got {v}"
        );
        if v == 0.0 || n == 0 {
            return 1.0;
        }
        let n_f = f64::from(n);
        if n_f > self.theta {
            self.log_pdf(v, n).exp()
        } else {
            // Direct evaluation keeps the exact value n at v = 1.
            n_f * v.powf(n_f - 1.0)
        }
    }

    /// Natural logarithm of [`pdf`](Self::pdf); `-∞` where the density
    /// vanishes (only at `v = 1` with `n > θ`).
    ///
    /// # Panics
    ///
    /// Panics if `v` is outside `[0, 1]`.
    pub fn log_pdf(&self, v: f64, n: u32) -> f64 {
        assert!(
            (0.0..=1.0).contains(&v),
            "log_pdf: risk must lie in [0, 1], got {v}"
        );
        if v == 0.0 || n == 0 {
            return 0.0;
        }
        let n_f = f64::from(n);
        if n_f > self.theta {
            (self.theta - 1.0) * v.ln() + (n_f - self.theta) * (-v).ln_1p()
                - log_beta(self.theta, n_f - self.theta + 1.0)
        } else {
            n_f.ln() + (n_f - 1.0) * v.ln()
        }
    }

    /// Cumulative distribution `C_θ(ε, n) = P[V ≤ ε]` of the risk after
    /// sizing with `n` constraints.
    ///
    /// # Panics
    ///
    /// Panics if `eps` is outside `[0, 1]`.
    pub fn cdf_at(&self, eps: f64, n: u32) -> f64 {
        assert!(
            (0.0..=1.0).contains(&eps),
            "cdf_at: tolerance must lie in [0, 1], got {eps}"
        );
        if n == 0 {
            return eps;
        }
        let n_f = f64::from(n);
        if n_f <= self.theta {
            eps.powi(n as i32)
        } else if eps == 0.0 || eps == 1.0 {
            eps
        } else {
            reg_inc_beta(eps, self.theta, n_f - self.theta + 1.0)
        }
    }
}
