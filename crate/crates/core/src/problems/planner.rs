//! Viapoint path planning among randomly placed obstacle pairs.
//!
//! The decision is a chain of `H` viapoints from a start point toward a
//! target inside a rectangular arena, consecutive points at most `δ` apart.
//! Each scenario places a pair of unit squares (axis-aligned, half-width ½)
//! centered at `[c_x + drift(t), y ∓ offset]` for one sampled height
//! `y ~ 𝒩(μ, σ²)`; a path violates a scenario when any viapoint lies
//! strictly inside either square,
//!
//! ```text
//! g(x, ξ) = max_k max{ ½ − ‖x_k − c_lower‖∞, ½ − ‖x_k − c_upper‖∞ }.
//! ```
//!
//! The solver rasterizes the sampled squares onto an occupancy grid dilated
//! by half the grid spacing, runs 8-connected A* between the grid nodes
//! nearest to start and target, and resamples the shortest route at
//! arc-length `δ` (viapoints pile up at the route's end when the step
//! budget `H·δ` runs out, leaving a positive terminal distance — a valid,
//! if imperfect, path). Dilating by `res/2` makes any point of a free-free
//! grid edge provably clear of every square: such a point lies within
//! `res/2` (in `‖·‖∞`) of a free node, which itself is more than
//! `½ + res/2` from every center. A failed attempt retries on a finer grid
//! before reporting failure.
//!
//! Because obstacle geometry is a deterministic function of the sampled
//! height and the step index, the risk of a fixed path has a closed form:
//! the union of height intervals that drive some square into some viapoint,
//! integrated under the Gaussian height law.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use ordered_float::OrderedFloat;
use rand::RngCore;
use rand_distr::{Distribution, Normal};

use super::{normal_cdf, Constraint, ScenarioProblem, Solution, SolveError};

/// Obstacles are unit squares: half-width ½ in the `‖·‖∞` sense.
const OBSTACLE_HALF_WIDTH: f64 = 0.5;
/// Grid spacing of the first planning attempt.
const COARSE_RES: f64 = 0.025;
/// Grid spacing of the retry attempt.
const FINE_RES: f64 = 0.0125;
/// Largest tolerated penetration of a planned viapoint into an obstacle.
const CLEARANCE_TOL: f64 = 1e-9;

/// Horizontal motion law of the obstacle pair across steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CenterDrift {
    /// The pair stays put.
    Static,
    /// The pair slides by `amplitude · sin(frequency · t)`.
    Oscillating {
        /// Peak horizontal displacement.
        amplitude: f64,
        /// Angular rate per step.
        frequency: f64,
    },
}

impl CenterDrift {
    /// Horizontal displacement of the pair centers at step `t`.
    pub fn offset_at(&self, t: u64) -> f64 {
        match *self {
            CenterDrift::Static => 0.0,
            CenterDrift::Oscillating {
                amplitude,
                frequency,
            } => amplitude * (frequency * t as f64).sin(),
        }
    }
}

/// Geometry and distribution parameters of the path-planning problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathConfig {
    /// Number of viapoints `H`.
    pub viapoints: usize,
    /// Largest allowed distance `δ` between consecutive viapoints.
    pub step_budget: f64,
    /// Fixed start point.
    pub start: [f64; 2],
    /// Target the path should reach.
    pub target: [f64; 2],
    /// Upper-right corner of the arena `[0, b₀] × [0, b₁]`.
    pub bounds: [f64; 2],
    /// Horizontal center of the obstacle pair before drift.
    pub center_x: f64,
    /// Mean of the sampled obstacle height.
    pub center_mean: f64,
    /// Standard deviation of the sampled obstacle height.
    pub center_sigma: f64,
    /// Vertical distance from the sampled height to each square's center.
    pub pair_offset: f64,
    /// Horizontal motion of the pair across steps.
    pub drift: CenterDrift,
}

impl PathConfig {
    /// The benchmark with a fixed obstacle pair and a wide vertical spread:
    /// 100 viapoints with step 0.045 across a 5×3 arena.
    pub fn steady() -> Self {
        PathConfig {
            viapoints: 100,
            step_budget: 0.045,
            start: [0.5, 0.5],
            target: [4.5, 0.5],
            bounds: [5.0, 3.0],
            center_x: 2.5,
            center_mean: 1.5,
            center_sigma: 0.05,
            pair_offset: 0.8,
            drift: CenterDrift::Static,
        }
    }

    /// The benchmark whose obstacle pair oscillates horizontally by
    /// `sin(0.1 t)` and sits closer together vertically.
    pub fn time_varying() -> Self {
        PathConfig {
            pair_offset: 0.3,
            drift: CenterDrift::Oscillating {
                amplitude: 1.0,
                frequency: 0.1,
            },
            ..PathConfig::steady()
        }
    }
}

/// The path-planning scenario problem; see the module docs.
#[derive(Debug, Clone, Copy)]
pub struct PathPlanning {
    config: PathConfig,
    height_dist: Normal<f64>,
}

/// Builds the path-planning problem from a validated configuration.
pub fn path_planning_problem(config: PathConfig) -> PathPlanning {
    assert!(config.viapoints >= 1, "path planning needs a viapoint");
    assert!(
        config.step_budget > 0.0 && config.step_budget.is_finite(),
        "step budget must be positive"
    );
    assert!(
        config.bounds.iter().all(|&b| b > 0.0 && b.is_finite()),
        "arena bounds must be positive"
    );
    for (name, p) in [("start", config.start), ("target", config.target)] {
        assert!(
            (0.0..=config.bounds[0]).contains(&p[0]) && (0.0..=config.bounds[1]).contains(&p[1]),
            "{name} must lie inside the arena"
        );
    }
    assert!(
        config.center_sigma > 0.0 && config.center_sigma.is_finite(),
        "height deviation must be positive"
    );
    assert!(
        config.pair_offset >= 0.0 && config.pair_offset.is_finite(),
        "pair offset must be nonnegative"
    );
    assert!(config.center_x.is_finite() && config.center_mean.is_finite());
    PathPlanning {
        config,
        height_dist: Normal::new(config.center_mean, config.center_sigma)
            .expect("parameters validated"),
    }
}

impl PathPlanning {
    /// This problem's configuration.
    pub fn config(&self) -> &PathConfig {
        &self.config
    }

    fn pair(&self, scenario: &Constraint) -> ([f64; 2], [f64; 2]) {
        match scenario {
            Constraint::ObstaclePair { lower, upper } => (*lower, *upper),
            other => panic!("path planning got a foreign scenario payload: {other:?}"),
        }
    }
}

fn linf(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).abs().max((a[1] - b[1]).abs())
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Deepest penetration of any viapoint into any square (negative when the
/// whole path is clear).
fn deepest_penetration(viapoints: &[[f64; 2]], centers: &[[f64; 2]]) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for p in viapoints {
        for c in centers {
            worst = worst.max(OBSTACLE_HALF_WIDTH - linf(*p, *c));
        }
    }
    worst
}

/// An axis-aligned occupancy grid over the arena with spacing `res`;
/// nodes within `½ + res/2` of an obstacle center are blocked.
struct Grid {
    res: f64,
    nx: usize,
    ny: usize,
    blocked: Vec<bool>,
}

impl Grid {
    fn build(bounds: [f64; 2], centers: &[[f64; 2]], res: f64) -> Grid {
        let nx = (bounds[0] / res + 1e-9).floor() as usize;
        let ny = (bounds[1] / res + 1e-9).floor() as usize;
        let mut blocked = vec![false; (nx + 1) * (ny + 1)];
        let reach = OBSTACLE_HALF_WIDTH + res / 2.0;
        for c in centers {
            if c[0] + reach < 0.0
                || c[0] - reach > bounds[0]
                || c[1] + reach < 0.0
                || c[1] - reach > bounds[1]
            {
                continue;
            }
            let i_lo = ((c[0] - reach) / res - 1e-12).ceil().max(0.0) as usize;
            let i_hi = ((c[0] + reach) / res + 1e-12).floor().min(nx as f64) as usize;
            let j_lo = ((c[1] - reach) / res - 1e-12).ceil().max(0.0) as usize;
            let j_hi = ((c[1] + reach) / res + 1e-12).floor().min(ny as f64) as usize;
            for j in j_lo..=j_hi {
                for i in i_lo..=i_hi {
                    blocked[j * (nx + 1) + i] = true;
                }
            }
        }
        Grid {
            res,
            nx,
            ny,
            blocked,
        }
    }

    fn node(&self, idx: usize) -> [f64; 2] {
        let stride = self.nx + 1;
        [
            (idx % stride) as f64 * self.res,
            (idx / stride) as f64 * self.res,
        ]
    }

    fn nearest(&self, p: [f64; 2]) -> usize {
        let i = (p[0] / self.res).round().clamp(0.0, self.nx as f64) as usize;
        let j = (p[1] / self.res).round().clamp(0.0, self.ny as f64) as usize;
        j * (self.nx + 1) + i
    }
}

/// 8-connected A* with Euclidean costs and heuristic. Ties in the queue
/// break on the node index, so the search is fully deterministic.
fn astar(grid: &Grid, start: usize, goal: usize) -> Option<Vec<usize>> {
    if grid.blocked[start] || grid.blocked[goal] {
        return None;
    }
    let stride = grid.nx + 1;
    let (gi, gj) = (goal % stride, goal / stride);
    let heuristic = |idx: usize| {
        let di = (idx % stride) as f64 - gi as f64;
        let dj = (idx / stride) as f64 - gj as f64;
        grid.res * (di * di + dj * dj).sqrt()
    };
    let n = grid.blocked.len();
    let mut best = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut heap = BinaryHeap::new();
    best[start] = 0.0;
    heap.push(Reverse((OrderedFloat(heuristic(start)), start)));
    while let Some(Reverse((_, u))) = heap.pop() {
        if closed[u] {
            continue;
        }
        closed[u] = true;
        if u == goal {
            let mut path = vec![u];
            let mut cur = u;
            while parent[cur] != usize::MAX {
                cur = parent[cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        let (ui, uj) = ((u % stride) as isize, (u / stride) as isize);
        for (di, dj) in [
            (-1, -1),
            (-1, 0),
            (-1, 1),
            (0, -1),
            (0, 1),
            (1, -1),
            (1, 0),
            (1, 1),
        ] {
            let (vi, vj) = (ui + di, uj + dj);
            if vi < 0 || vj < 0 || vi > grid.nx as isize || vj > grid.ny as isize {
                continue;
            }
            let v = vj as usize * stride + vi as usize;
            if grid.blocked[v] || closed[v] {
                continue;
            }
            let cost = if di != 0 && dj != 0 {
                grid.res * std::f64::consts::SQRT_2
            } else {
                grid.res
            };
            let cand = best[u] + cost;
            if cand + 1e-15 < best[v] {
                best[v] = cand;
                parent[v] = u;
                heap.push(Reverse((OrderedFloat(cand + heuristic(v)), v)));
            }
        }
    }
    None
}

/// Walks `count` arc-length stations of spacing `step` along a polyline;
/// stations beyond the total length stick to the endpoint, so consecutive
/// outputs are never farther apart than `step`.
fn resample(polyline: &[[f64; 2]], count: usize, step: f64) -> Vec<[f64; 2]> {
    debug_assert!(polyline.len() >= 2);
    let mut cum = Vec::with_capacity(polyline.len());
    cum.push(0.0);
    let mut total = 0.0;
    for w in polyline.windows(2) {
        total += dist(w[0], w[1]);
        cum.push(total);
    }
    let mut points = Vec::with_capacity(count);
    let mut seg = 0;
    for k in 1..=count {
        let s = (k as f64 * step).min(total);
        while seg + 2 < cum.len() && cum[seg + 1] < s {
            seg += 1;
        }
        let len = cum[seg + 1] - cum[seg];
        let u = if len > 0.0 { (s - cum[seg]) / len } else { 0.0 };
        let (a, b) = (polyline[seg], polyline[seg + 1]);
        points.push([a[0] + u * (b[0] - a[0]), a[1] + u * (b[1] - a[1])]);
    }
    points
}

impl ScenarioProblem for PathPlanning {
    fn sample(&self, rng: &mut dyn RngCore, t: u64) -> Constraint {
        let y = self.height_dist.sample(rng);
        let cx = self.config.center_x + self.config.drift.offset_at(t);
        Constraint::ObstaclePair {
            lower: [cx, y - self.config.pair_offset],
            upper: [cx, y + self.config.pair_offset],
        }
    }

    fn solve(&self, scenarios: &[Constraint], _t: u64) -> Result<Solution, SolveError> {
        let cfg = &self.config;
        let mut centers = Vec::with_capacity(2 * scenarios.len());
        for s in scenarios {
            let (lower, upper) = self.pair(s);
            centers.push(lower);
            centers.push(upper);
        }
        for res in [COARSE_RES, FINE_RES] {
            let grid = Grid::build(cfg.bounds, &centers, res);
            let Some(node_path) = astar(&grid, grid.nearest(cfg.start), grid.nearest(cfg.target))
            else {
                continue;
            };
            let mut polyline = vec![cfg.start];
            for idx in node_path {
                let p = grid.node(idx);
                if p != *polyline.last().expect("polyline starts nonempty") {
                    polyline.push(p);
                }
            }
            if cfg.target != *polyline.last().expect("polyline starts nonempty") {
                polyline.push(cfg.target);
            }
            if polyline.len() == 1 {
                polyline.push(cfg.start);
            }
            let viapoints = resample(&polyline, cfg.viapoints, cfg.step_budget);
            if deepest_penetration(&viapoints, &centers) > CLEARANCE_TOL {
                continue;
            }
            let terminal = dist(
                *viapoints.last().expect("at least one viapoint"),
                cfg.target,
            );
            return Ok(Solution {
                x: viapoints.into_iter().flatten().collect(),
                objective: Some(terminal),
            });
        }
        Err(SolveError::PlannerFailed)
    }

    fn constraint_value(&self, solution: &Solution, scenario: &Constraint, _t: u64) -> f64 {
        let (lower, upper) = self.pair(scenario);
        let mut worst = f64::NEG_INFINITY;
        for p in solution.x.chunks_exact(2) {
            let p = [p[0], p[1]];
            worst = worst
                .max(OBSTACLE_HALF_WIDTH - linf(p, lower))
                .max(OBSTACLE_HALF_WIDTH - linf(p, upper));
        }
        worst
    }

    fn exact_risk(&self, solution: &Solution, t: u64) -> Option<f64> {
        let cfg = &self.config;
        let cx = cfg.center_x + cfg.drift.offset_at(t);
        // A square centered at height y ∓ offset swallows viapoint p exactly
        // when y falls in an open window of width 1 around p_y ± offset, and
        // only viapoints horizontally within ½ of the pair are reachable.
        let mut intervals = Vec::new();
        for p in solution.x.chunks_exact(2) {
            if (p[0] - cx).abs() < OBSTACLE_HALF_WIDTH {
                for anchor in [p[1] + cfg.pair_offset, p[1] - cfg.pair_offset] {
                    intervals.push((anchor - OBSTACLE_HALF_WIDTH, anchor + OBSTACLE_HALF_WIDTH));
                }
            }
        }
        if intervals.is_empty() {
            return Some(0.0);
        }
        intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mass = |lo: f64, hi: f64| {
            normal_cdf((hi - cfg.center_mean) / cfg.center_sigma)
                - normal_cdf((lo - cfg.center_mean) / cfg.center_sigma)
        };
        let mut total = 0.0;
        let (mut lo, mut hi) = intervals[0];
        for &(a, b) in &intervals[1..] {
            if a <= hi {
                hi = hi.max(b);
            } else {
                total += mass(lo, hi);
                lo = a;
                hi = b;
            }
        }
        total += mass(lo, hi);
        Some(total.clamp(0.0, 1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn viapoints(sol: &Solution) -> Vec<[f64; 2]> {
        sol.x.chunks_exact(2).map(|c| [c[0], c[1]]).collect()
    }

    fn assert_steps_within_budget(cfg: &PathConfig, sol: &Solution) {
        let pts = viapoints(sol);
        assert_eq!(pts.len(), cfg.viapoints);
        let mut prev = cfg.start;
        for p in pts {
            assert!(dist(prev, p) <= cfg.step_budget + 1e-12);
            assert!((0.0..=cfg.bounds[0] + 1e-9).contains(&p[0]));
            assert!((0.0..=cfg.bounds[1] + 1e-9).contains(&p[1]));
            prev = p;
        }
    }

    #[test]
    fn empty_scenario_list_gives_a_straight_path() {
        let p = path_planning_problem(PathConfig::steady());
        let sol = p.solve(&[], 1).unwrap();
        assert!(sol.objective.unwrap() <= 1e-9);
        assert_steps_within_budget(p.config(), &sol);
        for pt in viapoints(&sol) {
            assert!((pt[1] - 0.5).abs() <= 1e-9, "straight path expected");
        }
        // Unconstrained planning cuts straight through the corridor, which a
        // freshly sampled lower square almost surely covers.
        let risk = p.exact_risk(&sol, 1).unwrap();
        assert!(
            risk >= 0.999,
            "reckless path should be near-certain to fail"
        );
    }

    #[test]
    fn steady_route_ducks_under_the_pair() {
        let p = path_planning_problem(PathConfig::steady());
        let scenario = Constraint::ObstaclePair {
            lower: [2.5, 0.7],
            upper: [2.5, 2.3],
        };
        let sol = p.solve(std::slice::from_ref(&scenario), 1).unwrap();
        assert!(sol.objective.unwrap() <= 1e-9, "budget suffices to arrive");
        assert_steps_within_budget(p.config(), &sol);
        assert!(p.constraint_value(&sol, &scenario, 1) <= CLEARANCE_TOL);
        // The crossing squeezes under the lower square on the first free
        // grid row, height 0.175.
        for pt in viapoints(&sol) {
            if (pt[0] - 2.5).abs() < 0.5 {
                assert!(pt[1] < 0.19, "expected an under-route, got {pt:?}");
            }
        }
        // Heights in (0.475, 1.475) drop the lower square onto that row, so
        // the closed-form risk is Φ(−0.5) up to a negligible left tail.
        let risk = p.exact_risk(&sol, 1).unwrap();
        assert!(
            (risk - 0.30853753872598694).abs() <= 0.02,
            "risk {risk} far from Φ(−0.5)"
        );
    }

    #[test]
    fn oscillating_pair_leaves_the_straight_route_open() {
        let p = path_planning_problem(PathConfig::time_varying());
        let t = 16; // sin(1.6) ≈ 1: the pair sits far right of center
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let scenarios: Vec<_> = (0..8).map(|_| p.sample(&mut rng, t)).collect();
        for s in &scenarios {
            let Constraint::ObstaclePair { lower, upper } = s else {
                panic!("wrong payload")
            };
            assert!((lower[0] - 3.5).abs() <= 0.01, "drift should shift x");
            assert!((upper[1] - lower[1] - 0.6).abs() <= 1e-12);
        }
        let sol = p.solve(&scenarios, t).unwrap();
        assert!(sol.objective.unwrap() <= 1e-9);
        assert_steps_within_budget(p.config(), &sol);
        for pt in viapoints(&sol) {
            assert!((pt[1] - 0.5).abs() <= 1e-9, "tall wall is cleared below");
        }
        let risk = p.exact_risk(&sol, t).unwrap();
        assert!(risk <= 1e-3, "straight route risk {risk} should be tiny");
    }

    #[test]
    fn planned_path_clears_every_scenario() {
        let p = path_planning_problem(PathConfig::steady());
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for t in 1..=10u64 {
            let scenarios: Vec<_> = (0..25).map(|_| p.sample(&mut rng, t)).collect();
            let sol = p.solve(&scenarios, t).unwrap();
            assert_steps_within_budget(p.config(), &sol);
            for s in &scenarios {
                assert!(p.constraint_value(&sol, s, t) <= CLEARANCE_TOL);
            }
        }
    }

    #[test]
    fn solve_is_deterministic() {
        let p = path_planning_problem(PathConfig::steady());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let scenarios: Vec<_> = (0..15).map(|_| p.sample(&mut rng, 3)).collect();
        let a = p.solve(&scenarios, 3).unwrap();
        let b = p.solve(&scenarios, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn exact_risk_merges_overlapping_windows() {
        let p = path_planning_problem(PathConfig::steady());
        // Two viapoints under the pair at heights 0.175 and 0.3: their
        // lower-square windows (0.475, 1.475) and (0.6, 1.6) overlap and
        // merge to (0.475, 1.6); upper-square windows lie far below zero.
        let sol = Solution {
            x: vec![2.5, 0.175, 2.6, 0.3],
            objective: None,
        };
        let risk = p.exact_risk(&sol, 1).unwrap();
        let want = normal_cdf((1.6 - 1.5) / 0.05) - normal_cdf((0.475 - 1.5) / 0.05);
        assert!((risk - want).abs() <= 1e-12, "risk {risk}, want {want}");
    }

    #[test]
    fn exact_risk_matches_monte_carlo() {
        let p = path_planning_problem(PathConfig::steady());
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let scenarios: Vec<_> = (0..5).map(|_| p.sample(&mut rng, 1)).collect();
        let sol = p.solve(&scenarios, 1).unwrap();
        let exact = p.exact_risk(&sol, 1).unwrap();
        let trials = 200_000;
        let hits = (0..trials)
            .filter(|_| {
                let s = p.sample(&mut rng, 1);
                p.constraint_value(&sol, &s, 1) > 0.0
            })
            .count();
        let mc = hits as f64 / trials as f64;
        let band = 3.0 * (exact * (1.0 - exact) / trials as f64).sqrt() + 1e-4;
        assert!((mc - exact).abs() <= band, "mc {mc} vs exact {exact}");
    }

    #[test]
    fn fully_blocked_arena_reports_planner_failure() {
        let config = PathConfig {
            viapoints: 10,
            step_budget: 0.2,
            start: [0.1, 0.5],
            target: [0.9, 0.5],
            bounds: [1.0, 1.0],
            center_x: 0.5,
            center_mean: 0.5,
            center_sigma: 0.01,
            pair_offset: 0.0,
            drift: CenterDrift::Static,
        };
        let p = path_planning_problem(config);
        let wall = Constraint::ObstaclePair {
            lower: [0.5, 0.5],
            upper: [0.5, 0.5],
        };
        assert_eq!(
            p.solve(std::slice::from_ref(&wall), 1).unwrap_err(),
            SolveError::PlannerFailed
        );
    }
}
