use std::time::Instant;

use super::params::{SolverParams, TraceLevel};
use super::stage::solve_stage;
use crate::error::{check_len, Result};
use crate::problem::{clamp, PredictionMatrices, ProblemInstance};

/// ADMM iterate. `y` and `z` are the scaled multipliers of
/// `b(u) - v = 0` and `Phi x0 + Psi v - x = 0`; the unscaled ones are
/// `rho1 * y` and `rho2 * z`.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateState {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub j: usize,
}

impl IterateState {
    pub fn n(&self) -> usize {
        self.u.len()
    }

    pub(crate) fn check(&self, n: usize) -> Result<()> {
        check_len(n, self.u.len())?;
        check_len(n, self.v.len())?;
        check_len(n, self.x.len())?;
        check_len(n, self.y.len())?;
        check_len(n, self.z.len())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIters,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub state: IterateState,
    pub converged: bool,
    /// Number of complete iterations executed.
    pub iterations: usize,
    pub r_norm_history: Vec<f64>,
    pub s_norm_history: Vec<f64>,
    /// Objective after every iteration (`TraceLevel::Residuals` and up).
    pub objective_history: Vec<f64>,
    /// Initialization followed by every iterate (`TraceLevel::FullIterates`).
    pub iterates: Vec<IterateState>,
    pub objective: f64,
    pub termination: Termination,
    pub wall_time: f64,
}

impl SolveReport {
    pub fn final_r_norm(&self) -> f64 {
        self.r_norm_history.last().copied().unwrap_or(f64::NAN)
    }

    pub fn final_s_norm(&self) -> f64 {
        self.s_norm_history.last().copied().unwrap_or(f64::NAN)
    }

    /// `iter,r_norm,s_norm,objective` rows, one per iteration.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("iter,r_norm,s_norm,objective\n");
        for i in 0..self.r_norm_history.len() {
            let obj = self.objective_history.get(i).copied().unwrap_or(f64::NAN);
            out.push_str(&format!(
                "{},{:.16e},{:.16e},{:.16e}\n",
                i + 1,
                self.r_norm_history[i],
                self.s_norm_history[i],
                obj
            ));
        }
        out
    }
}

/// Primal residual `r = [b(u) - v; Phi x0 + Psi v - x]` (length `2N`) and
/// dual residual `s_k = rho1 b_k'(u_k) (v_k - v_k_prev)` (length `N`).
#[derive(Debug, Clone, PartialEq)]
pub struct Residuals {
    pub r: Vec<f64>,
    pub s: Vec<f64>,
}

impl Residuals {
    pub fn r_norm(&self) -> f64 {
        norm2(&self.r)
    }

    pub fn s_norm(&self) -> f64 {
        norm2(&self.s)
    }
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Minimizer of `g_k` over the input box; an affine `g_k` picks the cheaper
/// bound, ties to the lower one.
fn input_cost_argmin(inst: &ProblemInstance, k: usize) -> f64 {
    let (a2, a1) = (inst.alpha2[k], inst.alpha1[k]);
    if a2 > 0.0 {
        inst.clamp_u(k, -a1 / (2.0 * a2))
    } else if a1 < 0.0 {
        inst.u_max[k]
    } else {
        inst.u_min[k]
    }
}

/// Starting point that treats the box constraints as inactive:
/// `u = clamp(argmin g)`, `v = b(u)`, `x = clamp(Phi x0 + Psi v)`,
/// zero multipliers.
pub fn initialize(inst: &ProblemInstance, pm: &PredictionMatrices) -> IterateState {
    let n = inst.n;
    let u: Vec<f64> = (0..n).map(|k| input_cost_argmin(inst, k)).collect();
    let v = inst.b_vec(&u);
    let x = pm
        .predict(inst.x0, &v)
        .into_iter()
        .enumerate()
        .map(|(k, xk)| inst.clamp_x(k, xk))
        .collect();
    IterateState { u, v, x, y: vec![0.0; n], z: vec![0.0; n], j: 0 }
}

/// Stage-wise global minimizers of `g_k(u) + (rho1/2)(b_k(u) - v_k + y_k)^2`.
pub fn u_update(inst: &ProblemInstance, params: &SolverParams, v: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    check_len(inst.n, v.len())?;
    check_len(inst.n, y.len())?;
    Ok((0..inst.n).map(|k| solve_stage(inst, k, params.rho1, v[k] - y[k])).collect())
}

/// Solves `(rho1 I + rho2 Psi^T Psi) v = rho1 (b(u) + y) + rho2 Psi^T (x - Phi x0 - z)`.
pub fn v_update(
    inst: &ProblemInstance,
    pm: &PredictionMatrices,
    params: &SolverParams,
    u_new: &[f64],
    y: &[f64],
    x: &[f64],
    z: &[f64],
) -> Result<Vec<f64>> {
    let rhs = v_update_rhs(inst, pm, params, u_new, y, x, z)?;
    pm.solve_v_system(params.rho1, params.rho2, &rhs)
}

/// Right-hand side of the v-update linear system.
pub fn v_update_rhs(
    inst: &ProblemInstance,
    pm: &PredictionMatrices,
    params: &SolverParams,
    u_new: &[f64],
    y: &[f64],
    x: &[f64],
    z: &[f64],
) -> Result<Vec<f64>> {
    let n = inst.n;
    for len in [u_new.len(), y.len(), x.len(), z.len()] {
        check_len(n, len)?;
    }
    let phi = pm.phi();
    let w: Vec<f64> = (0..n).map(|k| x[k] - phi[k] * inst.x0 - z[k]).collect();
    let psi_t_w = pm.apply_psi_t(&w);
    Ok((0..n)
        .map(|k| params.rho1 * (inst.b(k, u_new[k]) + y[k]) + params.rho2 * psi_t_w[k])
        .collect())
}

/// Box-clamped minimizers of `f_{k+1}(x) + (rho2/2)(c_k - x)^2` with
/// `c = Phi x0 + Psi v + z`; `z[k]` is aligned with `x_{k+1}`.
pub fn x_update(
    inst: &ProblemInstance,
    pm: &PredictionMatrices,
    params: &SolverParams,
    v_new: &[f64],
    z: &[f64],
) -> Result<Vec<f64>> {
    check_len(inst.n, v_new.len())?;
    check_len(inst.n, z.len())?;
    let rho2 = params.rho2;
    let pred = pm.predict(inst.x0, v_new);
    Ok((0..inst.n)
        .map(|k| {
            let c = pred[k] + z[k];
            let unconstrained = (rho2 * c - inst.gamma1[k]) / (2.0 * inst.gamma2[k] + rho2);
            clamp(unconstrained, inst.x_min[k], inst.x_max[k])
        })
        .collect())
}

fn primal_residual(inst: &ProblemInstance, pm: &PredictionMatrices, u: &[f64], v: &[f64], x: &[f64]) -> Vec<f64> {
    let n = inst.n;
    let mut r = Vec::with_capacity(2 * n);
    r.extend((0..n).map(|k| inst.b(k, u[k]) - v[k]));
    let pred = pm.predict(inst.x0, v);
    r.extend((0..n).map(|k| pred[k] - x[k]));
    r
}

/// `y + b(u) - v` and `z + Phi x0 + Psi v - x`.
pub fn dual_update(
    inst: &ProblemInstance,
    pm: &PredictionMatrices,
    state: &IterateState,
    u_new: &[f64],
    v_new: &[f64],
    x_new: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = inst.n;
    state.check(n)?;
    for len in [u_new.len(), v_new.len(), x_new.len()] {
        check_len(n, len)?;
    }
    let r = primal_residual(inst, pm, u_new, v_new, x_new);
    Ok(add_residual(state, &r))
}

fn add_residual(state: &IterateState, r: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = state.y.len();
    let y = (0..n).map(|k| state.y[k] + r[k]).collect();
    let z = (0..n).map(|k| state.z[k] + r[n + k]).collect();
    (y, z)
}

fn dual_residual(inst: &ProblemInstance, rho1: f64, u_new: &[f64], v_prev: &[f64], v_new: &[f64]) -> Vec<f64> {
    (0..inst.n).map(|k| rho1 * inst.db(k, u_new[k]) * (v_new[k] - v_prev[k])).collect()
}

/// Residuals of the transition `prev -> new`.
pub fn residuals(
    inst: &ProblemInstance,
    pm: &PredictionMatrices,
    params: &SolverParams,
    prev: &IterateState,
    new: &IterateState,
) -> Result<Residuals> {
    prev.check(inst.n)?;
    new.check(inst.n)?;
    Ok(Residuals {
        r: primal_residual(inst, pm, &new.u, &new.v, &new.x),
        s: dual_residual(inst, params.rho1, &new.u, &prev.v, &new.v),
    })
}

/// One full iteration from `state`; returns the new iterate and the
/// residuals of the transition.
pub fn step(
    inst: &ProblemInstance,
    pm: &PredictionMatrices,
    params: &SolverParams,
    state: &IterateState,
) -> Result<(IterateState, Residuals)> {
    let u = u_update(inst, params, &state.v, &state.y)?;
    let v = v_update(inst, pm, params, &u, &state.y, &state.x, &state.z)?;
    let x = x_update(inst, pm, params, &v, &state.z)?;
    let r = primal_residual(inst, pm, &u, &v, &x);
    let (y, z) = add_residual(state, &r);
    let s = dual_residual(inst, params.rho1, &u, &state.v, &v);
    Ok((IterateState { u, v, x, y, z, j: state.j + 1 }, Residuals { r, s }))
}

/// Runs the ADMM iteration from [`initialize`] until
/// `||r||_2 <= eps_primal` and `||s||_2 <= eps_dual` after a complete
/// iteration, or until `max_iters` iterations.
pub fn solve(inst: &ProblemInstance, params: &SolverParams) -> Result<SolveReport> {
    inst.validate()?;
    params.validate()?;
    let mut pm = PredictionMatrices::build(&inst.a)?;
    pm.ensure_factor(params.rho1, params.rho2)?;
    let start = Instant::now();
    let init = initialize(inst, &pm);
    solve_from(inst, &pm, params, init, start)
}

/// Runs the iteration from a caller-supplied iterate. `pm` must already
/// hold the factorization for `(params.rho1, params.rho2)`.
pub fn solve_from_state(
    inst: &ProblemInstance,
    pm: &PredictionMatrices,
    params: &SolverParams,
    state: IterateState,
) -> Result<SolveReport> {
    inst.validate()?;
    params.validate()?;
    state.check(inst.n)?;
    solve_from(inst, pm, params, state, Instant::now())
}

fn solve_from(
    inst: &ProblemInstance,
    pm: &PredictionMatrices,
    params: &SolverParams,
    mut state: IterateState,
    start: Instant,
) -> Result<SolveReport> {
    let mut r_hist = Vec::new();
    let mut s_hist = Vec::new();
    let mut obj_hist = Vec::new();
    let mut iterates = Vec::new();
    if params.trace_level >= TraceLevel::FullIterates {
        iterates.push(state.clone());
    }
    let mut converged = false;
    for _ in 0..params.max_iters {
        let (next, res) = step(inst, pm, params, &state)?;
        state = next;
        let (rn, sn) = (res.r_norm(), res.s_norm());
        r_hist.push(rn);
        s_hist.push(sn);
        if params.trace_level >= TraceLevel::Residuals {
            obj_hist.push(inst.objective_unchecked(&state.u, &state.x));
        }
        if params.trace_level >= TraceLevel::FullIterates {
            iterates.push(state.clone());
        }
        if rn <= params.eps_primal && sn <= params.eps_dual {
            converged = true;
            break;
        }
    }
    let wall_time = start.elapsed().as_secs_f64();
    Ok(SolveReport {
        objective: inst.objective_unchecked(&state.u, &state.x),
        iterations: r_hist.len(),
        converged,
        termination: if converged { Termination::Converged } else { Termination::MaxIters },
        state,
        r_norm_history: r_hist,
        s_norm_history: s_hist,
        objective_history: obj_hist,
        iterates,
        wall_time,
    })
}
