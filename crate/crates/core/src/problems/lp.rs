//! A dense two-phase simplex solver and the Gaussian linear program.
//!
//! The solver handles `min cᵀx` s.t. `Ax ≤ b` with free variables, which it
//! rewrites in standard form through the split `x = x⁺ − x⁻` plus one slack
//! per row. Rows with negative right-hand sides are negated and given an
//! artificial variable; phase 1 minimizes the sum of artificials to find a
//! basic feasible point, phase 2 minimizes the true objective. Pivots follow
//! Bland's rule (smallest eligible index enters, ratio ties resolved by the
//! smallest basic index), which rules out cycling, so the iteration cap is
//! pure defense and exceeding it is a bug.
//!
//! The sizes involved here (hundreds of rows, tens of columns) make the
//! dense tableau the simplest adequate representation; no sparsity or
//! factorization machinery is warranted.

use rand::RngCore;
use rand_distr::{Distribution, Normal};

use super::{normal_cdf, Constraint, ScenarioProblem, Solution, SolveError};

/// Reduced costs below `-PIVOT_TOL` qualify a column for entering; pivot
/// elements must exceed `PIVOT_TOL` in the ratio test.
const PIVOT_TOL: f64 = 1e-9;
/// A phase-1 optimum above this value declares the program infeasible.
const FEAS_TOL: f64 = 1e-7;
/// Rows whose residual `b − a·x` is at most this count as active.
const ACTIVE_TOL: f64 = 1e-7;

/// A linear program `min objective·x` subject to `rows[i]·x ≤ rhs[i]`, with
/// `x` free.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    /// Cost vector `c`.
    pub objective: Vec<f64>,
    /// Constraint rows `aᵢ`.
    pub rows: Vec<Vec<f64>>,
    /// Right-hand sides `bᵢ`.
    pub rhs: Vec<f64>,
}

/// The outcome of [`solve_lp`].
#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    /// A finite optimum was found.
    Optimal {
        /// An optimal point.
        x: Vec<f64>,
        /// The optimal value `c·x`.
        objective: f64,
        /// Indices of rows active at the optimum (residual ≤ 1e-7),
        /// ascending.
        active_rows: Vec<usize>,
    },
    /// The objective decreases without bound over the feasible set.
    Unbounded,
    /// No point satisfies all rows.
    Infeasible,
}

/// One simplex tableau: equality rows over the split/slack/artificial
/// columns, kept with a nonnegative right-hand side throughout.
struct Tableau {
    rows: usize,
    cols: usize,
    /// Row-major `rows × cols` coefficient matrix.
    a: Vec<f64>,
    /// Right-hand side, length `rows`.
    b: Vec<f64>,
    /// Basic column of each row.
    basis: Vec<usize>,
}

/// The objective row of reduced costs; `neg_value` tracks the negative of
/// the current objective value, as in the classical full-tableau layout.
struct ObjRow {
    c: Vec<f64>,
    neg_value: f64,
}

impl ObjRow {
    /// Builds the reduced-cost row for `costs` against the current basis.
    fn reduced(costs: Vec<f64>, tab: &Tableau) -> Self {
        let mut row = ObjRow {
            c: costs,
            neg_value: 0.0,
        };
        for r in 0..tab.rows {
            let f = row.c[tab.basis[r]];
            if f != 0.0 {
                for j in 0..tab.cols {
                    row.c[j] -= f * tab.a[r * tab.cols + j];
                }
                row.c[tab.basis[r]] = 0.0;
                row.neg_value -= f * tab.b[r];
            }
        }
        row
    }

    fn value(&self) -> f64 {
        -self.neg_value
    }
}

enum SimplexStatus {
    Optimal,
    Unbounded,
}

impl Tableau {
    /// Pivots on `(row, col)`: normalizes the pivot row and eliminates the
    /// entering column from every other row and from the objective row.
    fn pivot(&mut self, row: usize, col: usize, obj: &mut ObjRow) {
        let cols = self.cols;
        let inv = 1.0 / self.a[row * cols + col];
        for j in 0..cols {
            self.a[row * cols + j] *= inv;
        }
        self.b[row] *= inv;
        self.a[row * cols + col] = 1.0;
        for i in 0..self.rows {
            if i == row {
                continue;
            }
            let f = self.a[i * cols + col];
            if f != 0.0 {
                for j in 0..cols {
                    self.a[i * cols + j] -= f * self.a[row * cols + j];
                }
                self.a[i * cols + col] = 0.0;
                self.b[i] -= f * self.b[row];
            }
        }
        let f = obj.c[col];
        if f != 0.0 {
            for j in 0..cols {
                obj.c[j] -= f * self.a[row * cols + j];
            }
            obj.c[col] = 0.0;
            obj.neg_value -= f * self.b[row];
        }
        self.basis[row] = col;
    }

    /// Runs Bland-rule simplex iterations until optimality or unboundedness.
    /// Only columns below `enter_limit` may enter the basis, which keeps
    /// artificial variables out once phase 1 is done.
    fn optimize(&mut self, obj: &mut ObjRow, enter_limit: usize) -> SimplexStatus {
        let max_iter = 50 * (self.rows + self.cols);
        for _ in 0..max_iter {
            let Some(entering) = (0..enter_limit).find(|&j| obj.c[j] < -PIVOT_TOL) else {
                return SimplexStatus::Optimal;
            };
            let mut leaving: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.a[r * self.cols + entering];
                if a > PIVOT_TOL {
                    let ratio = self.b[r] / a;
                    let better = match leaving {
                        None => true,
                        Some((best_r, best_ratio)) => {
                            ratio < best_ratio - PIVOT_TOL
                                || (ratio < best_ratio + PIVOT_TOL
                                    && self.basis[r] < self.basis[best_r])
                        }
                    };
                    if better {
                        leaving = Some((r, ratio));
                    }
                }
            }
            match leaving {
                Some((r, _)) => self.pivot(r, entering, obj),
                None => return SimplexStatus::Unbounded,
            }
        }
        panic!("simplex iteration cap exceeded; Bland's rule should prevent this");
    }
}

/// Solves `min c·x` s.t. `Ax ≤ b` over free `x` with the two-phase simplex
/// method.
///
/// # Panics
///
/// Panics when the inputs are structurally invalid: empty objective, a row
/// whose length differs from the objective's, a right-hand side whose length
/// differs from the row count, or any non-finite entry.
pub fn solve_lp(problem: &LpProblem) -> LpOutcome {
    let n = problem.objective.len();
    let m = problem.rows.len();
    assert!(n >= 1, "solve_lp: objective must have at least one entry");
    assert!(
        problem.objective.iter().all(|c| c.is_finite()),
        "solve_lp: objective entries must be finite"
    );
    assert_eq!(
        problem.rhs.len(),
        m,
        "solve_lp: one right-hand side per row required"
    );
    assert!(
        problem.rhs.iter().all(|b| b.is_finite()),
        "solve_lp: right-hand sides must be finite"
    );
    for row in &problem.rows {
        assert_eq!(row.len(), n, "solve_lp: row length must match objective");
        assert!(
            row.iter().all(|a| a.is_finite()),
            "solve_lp: row entries must be finite"
        );
    }

    if m == 0 {
        // Unconstrained: bounded only for a zero objective.
        return if problem.objective.iter().all(|&c| c == 0.0) {
            LpOutcome::Optimal {
                x: vec![0.0; n],
                objective: 0.0,
                active_rows: Vec::new(),
            }
        } else {
            LpOutcome::Unbounded
        };
    }

    let slack_start = 2 * n;
    let art_start = slack_start + m;
    let art_count = problem.rhs.iter().filter(|&&b| b < 0.0).count();
    let cols = art_start + art_count;

    let mut tab = Tableau {
        rows: m,
        cols,
        a: vec![0.0; m * cols],
        b: vec![0.0; m],
        basis: vec![0; m],
    };
    let mut next_art = art_start;
    for i in 0..m {
        let sign = if problem.rhs[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            tab.a[i * cols + j] = sign * problem.rows[i][j];
            tab.a[i * cols + n + j] = -sign * problem.rows[i][j];
        }
        tab.a[i * cols + slack_start + i] = sign;
        tab.b[i] = sign * problem.rhs[i];
        if sign < 0.0 {
            tab.a[i * cols + next_art] = 1.0;
            tab.basis[i] = next_art;
            next_art += 1;
        } else {
            tab.basis[i] = slack_start + i;
        }
    }

    if art_count > 0 {
        let mut phase1 = vec![0.0; cols];
        for c in &mut phase1[art_start..] {
            *c = 1.0;
        }
        let mut obj = ObjRow::reduced(phase1, &tab);
        match tab.optimize(&mut obj, art_start) {
            SimplexStatus::Optimal => {}
            SimplexStatus::Unbounded => {
                unreachable!("phase 1 objective is bounded below by zero")
            }
        }
        if obj.value() > FEAS_TOL {
            return LpOutcome::Infeasible;
        }
        // Pivot any leftover zero-level artificial out of the basis so the
        // phase-2 basis is structural wherever possible; a row with no
        // structural pivot is redundant and its artificial stays at zero.
        for r in 0..m {
            if tab.basis[r] >= art_start {
                if let Some(col) = (0..art_start).find(|&j| tab.a[r * cols + j].abs() > PIVOT_TOL) {
                    tab.pivot(r, col, &mut obj);
                }
            }
        }
    }

    let mut phase2 = vec![0.0; cols];
    for j in 0..n {
        phase2[j] = problem.objective[j];
        phase2[n + j] = -problem.objective[j];
    }
    let mut obj = ObjRow::reduced(phase2, &tab);
    match tab.optimize(&mut obj, art_start) {
        SimplexStatus::Unbounded => LpOutcome::Unbounded,
        SimplexStatus::Optimal => {
            let mut split = vec![0.0; slack_start];
            for r in 0..m {
                if tab.basis[r] < slack_start {
                    split[tab.basis[r]] = tab.b[r];
                }
            }
            let x: Vec<f64> = (0..n).map(|j| split[j] - split[n + j]).collect();
            let objective: f64 = problem.objective.iter().zip(&x).map(|(c, xj)| c * xj).sum();
            let active_rows: Vec<usize> = (0..m)
                .filter(|&i| {
                    let ax: f64 = problem.rows[i].iter().zip(&x).map(|(a, xj)| a * xj).sum();
                    problem.rhs[i] - ax <= ACTIVE_TOL
                })
                .collect();
            LpOutcome::Optimal {
                x,
                objective,
                active_rows,
            }
        }
    }
}

/// The Gaussian linear program `min Σᵢ x⁽ⁱ⁾` s.t. `uᵀx ≤ 1` per scenario,
/// with `u ~ 𝒩(0, I)`. Its fixed complexity equals the dimension, and for
/// small scenario counts the program is unbounded almost surely, which
/// exercises the controller's failure handling.
#[derive(Debug, Clone, Copy)]
pub struct GaussianLp {
    dim: usize,
    unit_normal: Normal<f64>,
}

/// Builds the Gaussian linear program in `dim ≥ 1` variables.
pub fn gaussian_lp_problem(dim: usize) -> GaussianLp {
    assert!(dim >= 1, "gaussian_lp_problem: dim must be >= 1");
    GaussianLp {
        dim,
        unit_normal: Normal::new(0.0, 1.0).expect("unit normal is valid"),
    }
}

impl GaussianLp {
    fn vector<'c>(&self, scenario: &'c Constraint) -> &'c [f64] {
        match scenario {
            Constraint::Vector(u) if u.len() == self.dim => u,
            other => panic!("Gaussian LP got a foreign scenario payload: {other:?}"),
        }
    }
}

impl ScenarioProblem for GaussianLp {
    fn sample(&self, rng: &mut dyn RngCore, _t: u64) -> Constraint {
        Constraint::Vector(
            (0..self.dim)
                .map(|_| self.unit_normal.sample(rng))
                .collect(),
        )
    }

    fn solve(&self, scenarios: &[Constraint], _t: u64) -> Result<Solution, SolveError> {
        if scenarios.is_empty() {
            return Err(SolveError::EmptyScenarios);
        }
        let lp = LpProblem {
            objective: vec![1.0; self.dim],
            rows: scenarios.iter().map(|s| self.vector(s).to_vec()).collect(),
            rhs: vec![1.0; scenarios.len()],
        };
        match solve_lp(&lp) {
            LpOutcome::Optimal { x, objective, .. } => Ok(Solution {
                x,
                objective: Some(objective),
            }),
            LpOutcome::Unbounded => Err(SolveError::Unbounded),
            LpOutcome::Infeasible => Err(SolveError::Infeasible),
        }
    }

    fn constraint_value(&self, solution: &Solution, scenario: &Constraint, _t: u64) -> f64 {
        let u = self.vector(scenario);
        u.iter()
            .zip(&solution.x)
            .map(|(ui, xi)| ui * xi)
            .sum::<f64>()
            - 1.0
    }

    fn exact_risk(&self, solution: &Solution, _t: u64) -> Option<f64> {
        // uᵀx ~ 𝒩(0, ‖x‖²), so P[uᵀx > 1] = 1 − Φ(1/‖x‖).
        let norm = solution.x.iter().map(|xi| xi * xi).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Some(0.0);
        }
        Some(1.0 - normal_cdf(1.0 / norm))
    }
}
