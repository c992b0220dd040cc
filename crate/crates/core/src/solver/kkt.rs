//! First-order optimality check for an iterate.
//!
//! With unscaled multipliers `y_hat = rho1 y`, `z_hat = rho2 z` the
//! conditions are
//!
//! * primal feasibility: `b(u) - v = 0`, `Phi x0 + Psi v - x = 0`;
//! * input stationarity: `g_k'(u_k) + y_hat_k b_k'(u_k)` in minus the normal
//!   cone of the input box at `u_k`;
//! * v stationarity: `-y_hat + Psi^T z_hat = 0`;
//! * state stationarity: `f_{k+1}'(x_k) - z_hat_k` in minus the normal cone of
//!   the state box at `x_k`.
//!
//! At an active bound only the sign that pushes out of the box is allowed,
//! so the violation there is the positive part of the inward gradient.

use super::admm::IterateState;
use super::params::SolverParams;
use crate::error::Result;
use crate::problem::{PredictionMatrices, ProblemInstance};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktReport {
    /// `||b_hat(u) + B x_hat||_inf`
    pub primal: f64,
    pub input_stationarity: f64,
    pub v_stationarity: f64,
    pub x_stationarity: f64,
}

impl KktReport {
    pub fn max_violation(&self) -> f64 {
        self.primal
            .max(self.input_stationarity)
            .max(self.v_stationarity)
            .max(self.x_stationarity)
    }
}

/// Violation of `grad + normal_cone(value) = 0` on `[lo, hi]`.
pub fn projected_stationarity(grad: f64, value: f64, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        0.0
    } else if value <= lo {
        (-grad).max(0.0)
    } else if value >= hi {
        grad.max(0.0)
    } else {
        grad.abs()
    }
}

pub fn kkt_residual(
    inst: &ProblemInstance,
    pm: &PredictionMatrices,
    params: &SolverParams,
    state: &IterateState,
) -> Result<KktReport> {
    let n = inst.n;
    state.check(n)?;
    let (rho1, rho2) = (params.rho1, params.rho2);

    let pred = pm.predict(inst.x0, &state.v);
    let mut primal: f64 = 0.0;
    for k in 0..n {
        primal = primal
            .max((inst.b(k, state.u[k]) - state.v[k]).abs())
            .max((pred[k] - state.x[k]).abs());
    }

    let mut input_stationarity: f64 = 0.0;
    for k in 0..n {
        let u = state.u[k];
        let grad = inst.stage_cost_grad(k, u) + rho1 * state.y[k] * inst.db(k, u);
        input_stationarity = input_stationarity
            .max(projected_stationarity(grad, u, inst.u_min[k], inst.u_max[k]));
    }

    let z_hat: Vec<f64> = state.z.iter().map(|z| rho2 * z).collect();
    let psi_t_z = pm.apply_psi_t(&z_hat);
    let v_stationarity = (0..n)
        .map(|k| (psi_t_z[k] - rho1 * state.y[k]).abs())
        .fold(0.0, f64::max);

    let mut x_stationarity: f64 = 0.0;
    for k in 0..n {
        let x = state.x[k];
        let grad = inst.state_cost_grad(k, x) - z_hat[k];
        x_stationarity =
            x_stationarity.max(projected_stationarity(grad, x, inst.x_min[k], inst.x_max[k]));
    }

    Ok(KktReport { primal, input_stationarity, v_stationarity, x_stationarity })
}
