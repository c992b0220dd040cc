//! Reference solvers for small instances.
//!
//! Both work on uniform grids with endpoints included. Neither
//! shares code with the ADMM path beyond instance evaluation, so their
//! answers can be used to check it. Accuracy is limited to about one grid
//! cell.

use crate::error::{Error, Result};
use crate::problem::ProblemInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMethod {
    BruteForce,
    DynamicProgramming,
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub u: Vec<f64>,
    pub x: Vec<f64>,
    pub objective: f64,
    /// Points per input axis.
    pub u_grid: usize,
    /// Points per state axis (zero for brute force, which does not grid x).
    pub x_grid: usize,
    pub method: OracleMethod,
}

impl OracleResult {
    /// Width of one input grid cell at stage `k`.
    pub fn u_cell(&self, inst: &ProblemInstance, k: usize) -> f64 {
        cell(inst.u_min[k], inst.u_max[k], self.u_grid)
    }

    /// Width of one state grid cell for the successor state of stage `k`.
    pub fn x_cell(&self, inst: &ProblemInstance, k: usize) -> f64 {
        cell(inst.x_min[k], inst.x_max[k], self.x_grid)
    }
}

fn cell(lo: f64, hi: f64, points: usize) -> f64 {
    if points < 2 {
        0.0
    } else {
        (hi - lo) / (points - 1) as f64
    }
}

fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 || lo == hi {
        return vec![lo; points.max(1)];
    }
    let h = (hi - lo) / (points - 1) as f64;
    (0..points)
        .map(|i| if i + 1 == points { hi } else { lo + h * i as f64 })
        .collect()
}

pub const BRUTE_FORCE_MAX_HORIZON: usize = 4;

const GOLDEN_STEPS: usize = 40;

/// Rounding allowance when an input is solved to land on an interval end.
const BOUND_SNAP: f64 = 1e-12;

/// Exhaustive search over the Cartesian input grid, keeping only
/// trajectories that satisfy every state bound.
pub fn brute_force_solve(inst: &ProblemInstance, grid_points: usize) -> Result<OracleResult> {
    inst.validate()?;
    if inst.n > BRUTE_FORCE_MAX_HORIZON {
        return Err(Error::OracleTooLarge { n: inst.n, max: BRUTE_FORCE_MAX_HORIZON });
    }
    if grid_points < 3 {
        return Err(Error::InvalidParams("brute force needs at least 3 grid points".into()));
    }
    let grids: Vec<Vec<f64>> =
        (0..inst.n).map(|k| linspace(inst.u_min[k], inst.u_max[k], grid_points)).collect();

    struct Search<'a> {
        inst: &'a ProblemInstance,
        grids: &'a [Vec<f64>],
        u: Vec<f64>,
        best: Option<(f64, Vec<f64>)>,
    }

    impl Search<'_> {
        fn descend(&mut self, k: usize, x_prev: f64, cost: f64) {
            if k == self.inst.n {
                if self.best.as_ref().is_none_or(|(c, _)| cost < *c) {
                    self.best = Some((cost, self.u.clone()));
                }
                return;
            }
            let inst = self.inst;
            for i in 0..self.grids[k].len() {
                let uk = self.grids[k][i];
                let xk = inst.a[k] * x_prev + inst.b(k, uk);
                if xk < inst.x_min[k] || xk > inst.x_max[k] {
                    continue;
                }
                self.u[k] = uk;
                let c = cost + inst.stage_cost(k, uk) + inst.state_cost(k, xk);
                self.descend(k + 1, xk, c);
            }
        }
    }

    let mut search = Search { inst, grids: &grids, u: vec![0.0; inst.n], best: None };
    search.descend(0, inst.x0, 0.0);
    let (_, u) = search.best.ok_or(Error::InfeasibleAtResolution(grid_points))?;
    let x = inst.rollout(&u)?;
    let objective = inst.eval_objective(&u, &x)?;
    Ok(OracleResult {
        u,
        x,
        objective,
        u_grid: grid_points,
        x_grid: 0,
        method: OracleMethod::BruteForce,
    })
}

/// Piecewise-linear cost-to-go on a uniform grid over the interval of
/// states from which the remaining constraints can be met. Infinite values
/// mark nodes with no feasible continuation at the grid resolution;
/// interpolating towards one gives infinity.
struct ValueTable {
    lo: f64,
    hi: f64,
    step: f64,
    values: Vec<f64>,
}

impl ValueTable {
    fn terminal(lo: f64, hi: f64) -> Self {
        ValueTable { lo, hi, step: 0.0, values: vec![0.0] }
    }

    fn eval(&self, x: f64) -> f64 {
        if x < self.lo || x > self.hi {
            return f64::INFINITY;
        }
        let m = self.values.len();
        if m == 1 {
            return self.values[0];
        }
        let pos = (x - self.lo) / self.step;
        let i = (pos.floor() as usize).min(m - 2);
        let t = pos - i as f64;
        let (v0, v1) = (self.values[i], self.values[i + 1]);
        if t <= 0.0 {
            v0
        } else if t >= 1.0 {
            v1
        } else if v0.is_infinite() || v1.is_infinite() {
            f64::INFINITY
        } else {
            let chord = v0 + t * (v1 - v0);
            self.kink_envelope(i, t).map_or(chord, |e| e.min(chord))
        }
    }

    /// Where the four nodes around cell `i` have nondecreasing slopes,
    /// the larger of the two lines continued from the neighbouring cells.
    /// For locally convex data this recovers a kink inside the cell, which
    /// the chord smears over the whole cell.
    fn kink_envelope(&self, i: usize, t: f64) -> Option<f64> {
        if i == 0 || i + 2 >= self.values.len() {
            return None;
        }
        let w = &self.values[i - 1..i + 3];
        if w.iter().any(|v| v.is_infinite()) {
            return None;
        }
        let (left, mid, right) = (w[1] - w[0], w[2] - w[1], w[3] - w[2]);
        if !(left <= mid && mid <= right) {
            return None;
        }
        Some((w[1] + t * left).max(w[2] - (1.0 - t) * right))
    }
}

/// Range of `b_k` over the input box and an input attaining the maximum.
fn b_range(inst: &ProblemInstance, k: usize) -> (f64, f64, f64) {
    let (lo, hi) = (inst.u_min[k], inst.u_max[k]);
    let (b_lo, b_hi) = (inst.b(k, lo), inst.b(k, hi));
    let mut top = if b_hi > b_lo { hi } else { lo };
    if inst.beta2[k] > 0.0 {
        let vertex = (inst.d[k] + inst.beta1[k] / (2.0 * inst.beta2[k])).clamp(lo, hi);
        if inst.b(k, vertex) > inst.b(k, top) {
            top = vertex;
        }
    }
    (b_lo.min(b_hi), inst.b(k, top), top)
}

/// States `x` with `a x + b` in `target` for some `b` in `[b_min, b_max]`.
fn preimage(a: f64, target: (f64, f64), b_min: f64, b_max: f64) -> (f64, f64) {
    let (lo, hi) = (target.0 - b_max, target.1 - b_min);
    if a > 0.0 {
        (lo / a, hi / a)
    } else if a < 0.0 {
        (hi / a, lo / a)
    } else if lo <= 0.0 && 0.0 <= hi {
        (f64::NEG_INFINITY, f64::INFINITY)
    } else {
        (f64::INFINITY, f64::NEG_INFINITY)
    }
}

/// Inputs in the box of stage `k` that move state `x` exactly onto either
/// end of `target`.
fn landing_inputs(inst: &ProblemInstance, k: usize, x: f64, target: (f64, f64)) -> [f64; 4] {
    let (b2, b1, b0, d) = (inst.beta2[k], inst.beta1[k], inst.beta0[k], inst.d[k]);
    let mut out = [f64::NAN; 4];
    for (i, end) in [target.0, target.1].into_iter().enumerate() {
        // b(u) = end - a x  <=>  b2 t^2 + b1 t + c = 0 with t = d - u
        let c = b0 + end - inst.a[k] * x;
        if b2 == 0.0 {
            if b1 != 0.0 {
                out[2 * i] = d + c / b1;
            }
        } else {
            let disc = b1 * b1 - 4.0 * b2 * c;
            if disc >= 0.0 {
                let q = -0.5 * (b1 + b1.signum() * disc.sqrt());
                out[2 * i] = d - q / b2;
                if q != 0.0 {
                    out[2 * i + 1] = d - c / q;
                }
            }
        }
    }
    out
}

/// Best input from state `x` at stage `k`, given the cost-to-go of the
/// successor state. Candidates are the input grid, the maximizer of `b_k`
/// and the inputs that land exactly on an end of the successor's feasible
/// interval, so active state constraints cost no grid cell. The best one
/// is then refined by a golden-section search over the neighbouring cells.
fn best_input(
    inst: &ProblemInstance,
    k: usize,
    x: f64,
    u_grid: &[f64],
    b_top: f64,
    next: &ValueTable,
) -> Option<(f64, f64)> {
    best_input_with(inst, k, x, u_grid, b_top, (next.lo, next.hi), |xn| next.eval(xn))
}

/// [`best_input`] against an arbitrary cost-to-go on the interval `target`.
fn best_input_with(
    inst: &ProblemInstance,
    k: usize,
    x: f64,
    u_grid: &[f64],
    b_top: f64,
    target: (f64, f64),
    tail: impl Fn(f64) -> f64,
) -> Option<(f64, f64)> {
    let (lo, hi) = (inst.u_min[k], inst.u_max[k]);
    let extra = landing_inputs(inst, k, x, target);
    let candidates = u_grid
        .iter()
        .copied()
        .chain(std::iter::once(b_top))
        .chain(extra.into_iter().filter(|u| *u >= lo && *u <= hi));
    let mut best: Option<(f64, f64)> = None;
    for u in candidates {
        let xn = inst.a[k] * x + inst.b(k, u);
        let slack = BOUND_SNAP * (1.0 + xn.abs());
        if xn < target.0 - slack || xn > target.1 + slack {
            continue;
        }
        let xn = xn.clamp(target.0, target.1);
        let rest = tail(xn);
        if rest.is_infinite() {
            continue;
        }
        let c = inst.stage_cost(k, u) + inst.state_cost(k, xn) + rest;
        if best.is_none_or(|(bc, _)| c < bc) {
            best = Some((c, u));
        }
    }
    let (c, u) = best?;
    // golden-section search within one input cell of the best candidate
    let step = if u_grid.len() > 1 { u_grid[1] - u_grid[0] } else { 0.0 };
    let cost = |v: f64| {
        let xn = inst.a[k] * x + inst.b(k, v);
        if xn < target.0 || xn > target.1 {
            return f64::INFINITY;
        }
        inst.stage_cost(k, v) + inst.state_cost(k, xn) + tail(xn)
    };
    let (mut a, mut b) = ((u - step).max(lo), (u + step).min(hi));
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut p, mut q) = (b - ratio * (b - a), a + ratio * (b - a));
    let (mut fp, mut fq) = (cost(p), cost(q));
    for _ in 0..GOLDEN_STEPS {
        if fp <= fq {
            b = q;
            (q, fq) = (p, fp);
            p = b - ratio * (b - a);
            fp = cost(p);
        } else {
            a = p;
            (p, fp) = (q, fq);
            q = a + ratio * (b - a);
            fq = cost(q);
        }
    }
    let (fr, r) = if fp <= fq { (fp, p) } else { (fq, q) };
    Some(if fr < c { (fr, r) } else { (c, u) })
}

/// Backward value iteration with linear interpolation of the cost-to-go,
/// then a forward pass from `x0` along the exact dynamics. The forward pass
/// scores each input by solving the following stage against the table
/// after it, so an interpolation error in the next table never decides a
/// choice. At every stage
/// the state grid is uniform over the part of the state box from which the
/// later state bounds can still be met, which is an interval computed by
/// backward reachability.
pub fn dp_solve(inst: &ProblemInstance, u_grid: usize, x_grid: usize) -> Result<OracleResult> {
    inst.validate()?;
    if u_grid < 2 || x_grid < 2 {
        return Err(Error::InvalidParams("dynamic programming needs at least 2 grid points per axis".into()));
    }
    let n = inst.n;
    let (u_grids, ranges, tables) = dp_tables(inst, u_grid, x_grid)?;
    let mut u = Vec::with_capacity(n);
    let mut x_prev = inst.x0;
    for k in 0..n {
        let choice = if k + 1 < n {
            let lookahead = |xn: f64| {
                best_input(inst, k + 1, xn, &u_grids[k + 1], ranges[k + 1].2, &tables[k + 1])
                    .map_or(f64::INFINITY, |(c, _)| c)
            };
            let target = (tables[k].lo, tables[k].hi);
            best_input_with(inst, k, x_prev, &u_grids[k], ranges[k].2, target, lookahead)
        } else {
            best_input(inst, k, x_prev, &u_grids[k], ranges[k].2, &tables[k])
        };
        let (_, uk) = choice.ok_or(Error::InfeasibleAtResolution(x_grid))?;
        u.push(uk);
        x_prev = inst.a[k] * x_prev + inst.b(k, uk);
    }
    let x = inst.rollout(&u)?;
    let objective = inst.eval_objective(&u, &x)?;
    Ok(OracleResult { u, x, objective, u_grid, x_grid, method: OracleMethod::DynamicProgramming })
}

/// Input grids, `b_range` per stage, cost-to-go tables.
type DpTables = (Vec<Vec<f64>>, Vec<(f64, f64, f64)>, Vec<ValueTable>);

/// `tables[k]` is indexed by `x_{k+1}`.
fn dp_tables(inst: &ProblemInstance, u_grid: usize, x_grid: usize) -> Result<DpTables> {
    let n = inst.n;
    let u_grids: Vec<Vec<f64>> =
        (0..n).map(|k| linspace(inst.u_min[k], inst.u_max[k], u_grid)).collect();
    let ranges: Vec<(f64, f64, f64)> = (0..n).map(|k| b_range(inst, k)).collect();

    // tables[k] is the cost-to-go of x_{k+1}, the successor state of stage k
    let mut tables: Vec<ValueTable> = Vec::with_capacity(n);
    tables.push(ValueTable::terminal(inst.x_min[n - 1], inst.x_max[n - 1]));
    for k in (1..n).rev() {
        let next = tables.last().unwrap();
        let (b_min, b_max, b_top) = ranges[k];
        let (r_lo, r_hi) = preimage(inst.a[k], (next.lo, next.hi), b_min, b_max);
        // states x_k live in the box of stage k - 1
        let lo = inst.x_min[k - 1].max(r_lo);
        let hi = inst.x_max[k - 1].min(r_hi);
        if lo > hi {
            return Err(Error::InfeasibleAtResolution(x_grid));
        }
        let xs = linspace(lo, hi, if lo == hi { 1 } else { x_grid });
        let values = xs
            .iter()
            .map(|&x| best_input(inst, k, x, &u_grids[k], b_top, next).map_or(f64::INFINITY, |(c, _)| c))
            .collect();
        tables.push(ValueTable { lo, hi, step: cell(lo, hi, xs.len()), values });
    }
    tables.reverse();
    Ok((u_grids, ranges, tables))
}

/// True when every input and state of the oracle optimum is at least `tol`
/// inside its box, so the equality multipliers of a problem without state
/// cost vanish.
pub fn certify_multiplier_free_optimum(inst: &ProblemInstance, result: &OracleResult, tol: f64) -> bool {
    (0..inst.n).all(|k| {
        result.u[k] > inst.u_min[k] + tol
            && result.u[k] < inst.u_max[k] - tol
            && result.x[k] > inst.x_min[k] + tol
            && result.x[k] < inst.x_max[k] - tol
    })
}
