//! Per-stage input sub-problem
//! `min_{lo <= u <= hi} g_k(u) + (rho1/2) (b_k(u) - w)^2`.

use super::cubic::{cubic_real_roots, CubicRoots};
use crate::problem::ProblemInstance;

/// Stage objective `J_k(u) = g_k(u) + (rho1/2)(b_k(u) - w)^2`.
#[inline]
pub fn stage_objective(inst: &ProblemInstance, k: usize, rho1: f64, w: f64, u: f64) -> f64 {
    let e = inst.b(k, u) - w;
    inst.stage_cost(k, u) + 0.5 * rho1 * e * e
}

/// `J_k'(u) = g_k'(u) + rho1 b_k'(u) (b_k(u) - w)`.
#[inline]
pub fn stage_objective_grad(inst: &ProblemInstance, k: usize, rho1: f64, w: f64, u: f64) -> f64 {
    inst.stage_cost_grad(k, u) + rho1 * inst.db(k, u) * (inst.b(k, u) - w)
}

/// Coefficients `[c3, c2, c1, c0]` of the cubic `J_k'`.
pub fn stage_gradient_cubic(inst: &ProblemInstance, k: usize, rho1: f64, w: f64) -> [f64; 4] {
    let (b2, b1, b0, d) = (inst.beta2[k], inst.beta1[k], inst.beta0[k], inst.d[k]);
    // b(u) = p2 u^2 + p1 u + p0
    let p2 = -b2;
    let p1 = 2.0 * b2 * d + b1;
    let p0 = -b2 * d * d - b1 * d - b0;
    let q0 = p0 - w;
    [
        2.0 * rho1 * p2 * p2,
        3.0 * rho1 * p1 * p2,
        rho1 * (2.0 * p2 * q0 + p1 * p1) + 2.0 * inst.alpha2[k],
        rho1 * p1 * q0 + inst.alpha1[k],
    ]
}

/// Global minimizer of `J_k` over the stage input box: the best of the
/// stationary points inside the box and both endpoints. Ties go to the
/// smallest candidate.
pub fn solve_stage(inst: &ProblemInstance, k: usize, rho1: f64, w: f64) -> f64 {
    let (lo, hi) = (inst.u_min[k], inst.u_max[k]);
    if lo == hi {
        return lo;
    }
    let [c3, c2, c1, c0] = stage_gradient_cubic(inst, k, rho1, w);
    let mut candidates: [f64; 5] = [lo, 0.0, 0.0, 0.0, hi];
    let mut count = 1;
    if let CubicRoots::Finite(roots) = cubic_real_roots(c3, c2, c1, c0) {
        for &r in roots.iter() {
            if r > lo && r < hi {
                candidates[count] = r;
                count += 1;
            }
        }
    }
    candidates[count] = hi;
    count += 1;
    // roots arrive sorted, so candidates are ascending
    let mut best_u = candidates[0];
    let mut best_j = stage_objective(inst, k, rho1, w, best_u);
    for &u in &candidates[1..count] {
        let j = stage_objective(inst, k, rho1, w, u);
        if j < best_j {
            best_u = u;
            best_j = j;
        }
    }
    best_u
}
