//! Convergence diagnostics built on
//!
//! ```text
//! V(u, x_hat, y_hat) = ||y_hat - y_ref||^2_{R^-1} + ||B (x_hat - x_ref)||^2_R + ||r(u, x_hat)||^2_R
//! ```
//!
//! with `x_hat = (v, x)`, `R = diag(rho1 I, rho2 I)`,
//! `B = [[-I, 0], [Psi, -I]]` and `r = [b(u) - v; Phi x0 + Psi v - x]`.
//! Multipliers here are unscaled: an [`IterateState`] stores `y`, `z` scaled
//! by `1/rho1`, `1/rho2`, and they are converted on the way in.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_len, Error, Result};
use crate::oracle::OracleResult;
use crate::problem::{PredictionMatrices, ProblemInstance};
use crate::solver::{solve_from_state, initialize, IterateState, SolveReport, SolverParams, TraceLevel};

/// Tolerance on `b(u) - v = 0`, `Phi x0 + Psi v - x = 0` for a reference.
pub const REFERENCE_TOL: f64 = 1e-8;

/// Relative tolerance used by the descent and telescoping checks.
pub const DESCENT_RTOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct ReferencePoint {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub x: Vec<f64>,
    /// Unscaled multiplier of `b(u) - v = 0`.
    pub y: Vec<f64>,
    /// Unscaled multiplier of `Phi x0 + Psi v - x = 0`.
    pub z: Vec<f64>,
}

impl ReferencePoint {
    /// Checks lengths and primal feasibility of the equality constraints.
    pub fn new(
        inst: &ProblemInstance,
        pm: &PredictionMatrices,
        u: Vec<f64>,
        x: Vec<f64>,
        y: Vec<f64>,
        z: Vec<f64>,
    ) -> Result<Self> {
        let n = inst.n;
        for len in [u.len(), x.len(), y.len(), z.len()] {
            check_len(n, len)?;
        }
        let v = inst.b_vec(&u);
        let pred = pm.predict(inst.x0, &v);
        let defect = (0..n).map(|k| (pred[k] - x[k]).abs()).fold(0.0, f64::max);
        if defect > REFERENCE_TOL {
            return Err(Error::InvalidParams(format!(
                "reference violates the dynamics by {defect:e}"
            )));
        }
        Ok(ReferencePoint { u, v, x, y, z })
    }

    /// Reference with zero multipliers from an oracle optimum. Only
    /// meaningful when the optimum is interior and there is no state cost.
    pub fn from_oracle(inst: &ProblemInstance, pm: &PredictionMatrices, result: &OracleResult) -> Result<Self> {
        let x = inst.rollout(&result.u)?;
        Self::new(inst, pm, result.u.clone(), x, vec![0.0; inst.n], vec![0.0; inst.n])
    }

    /// Exact unconstrained optimum of a problem with affine `b` (all
    /// `beta2 = 0`), together with its multipliers `z = f'(x)`,
    /// `y = Psi^T z`. Box constraints are ignored; see [`Self::is_interior`].
    pub fn affine_quadratic(inst: &ProblemInstance, pm: &PredictionMatrices) -> Result<Self> {
        inst.validate()?;
        let n = inst.n;
        if inst.beta2.iter().any(|&b| b != 0.0) {
            return Err(Error::InvalidInstance("input map is not affine".into()));
        }
        let slope = &inst.beta1;
        let offset: Vec<f64> = (0..n).map(|k| -inst.beta1[k] * inst.d[k] - inst.beta0[k]).collect();
        let psi = DMatrix::from_row_slice(n, n, pm.psi_dense());
        let phi = DVector::from_column_slice(pm.phi());

        // x = x_free + M u with M = Psi diag(slope)
        let m = DMatrix::from_fn(n, n, |i, j| psi[(i, j)] * slope[j]);
        let x_free = &phi * inst.x0 + &psi * DVector::from_column_slice(&offset);
        let two_gamma2 = DMatrix::from_diagonal(&DVector::from_iterator(n, inst.gamma2.iter().map(|g| 2.0 * g)));
        let gamma1 = DVector::from_column_slice(&inst.gamma1);
        let mut hessian = m.transpose() * &two_gamma2 * &m;
        for k in 0..n {
            hessian[(k, k)] += 2.0 * inst.alpha2[k];
        }
        let rhs = -(DVector::from_column_slice(&inst.alpha1)
            + m.transpose() * (&two_gamma2 * &x_free + &gamma1));
        let chol = hessian
            .cholesky()
            .ok_or_else(|| Error::InvalidInstance("objective is not strictly convex".into()))?;
        let u = chol.solve(&rhs);
        let u: Vec<f64> = u.iter().copied().collect();
        let x = inst.rollout(&u)?;
        let z: Vec<f64> = (0..n).map(|k| inst.state_cost_grad(k, x[k])).collect();
        let y = pm.apply_psi_t(&z);
        Self::new(inst, pm, u, x, y, z)
    }

    /// True when every input and state is at least `tol` inside its box.
    pub fn is_interior(&self, inst: &ProblemInstance, tol: f64) -> bool {
        (0..inst.n).all(|k| {
            self.u[k] > inst.u_min[k] + tol
                && self.u[k] < inst.u_max[k] - tol
                && self.x[k] > inst.x_min[k] + tol
                && self.x[k] < inst.x_max[k] - tol
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovTerms {
    /// `||y_hat - y_ref||^2_{R^-1}`
    pub dual: f64,
    /// `||B (x_hat - x_ref)||^2_R`
    pub state: f64,
    /// `||r||^2_R`
    pub residual: f64,
}

impl LyapunovTerms {
    pub fn total(&self) -> f64 {
        self.dual + self.state + self.residual
    }
}

fn sq(x: f64) -> f64 {
    x * x
}

/// `||r(u, x_hat)||^2_R`.
pub fn residual_norm_sq(
    inst: &ProblemInstance,
    pm: &PredictionMatrices,
    params: &SolverParams,
    u: &[f64],
    v: &[f64],
    x: &[f64],
) -> f64 {
    let pred = pm.predict(inst.x0, v);
    (0..inst.n)
        .map(|k| params.rho1 * sq(inst.b(k, u[k]) - v[k]) + params.rho2 * sq(pred[k] - x[k]))
        .sum()
}

/// `||B (x_hat_a - x_hat_b)||^2_R = rho1 ||dv||^2 + rho2 ||Psi dv - dx||^2`.
pub fn state_distance_sq(
    pm: &PredictionMatrices,
    params: &SolverParams,
    va: &[f64],
    xa: &[f64],
    vb: &[f64],
    xb: &[f64],
) -> f64 {
    let n = va.len();
    let dv: Vec<f64> = (0..n).map(|k| va[k] - vb[k]).collect();
    let psi_dv = pm.apply_psi(&dv);
    (0..n)
        .map(|k| params.rho1 * sq(dv[k]) + params.rho2 * sq(psi_dv[k] - (xa[k] - xb[k])))
        .sum()
}

pub fn lyapunov_value(
    inst: &ProblemInstance,
    pm: &PredictionMatrices,
    params: &SolverParams,
    state: &IterateState,
    reference: &ReferencePoint,
) -> Result<LyapunovTerms> {
    let n = inst.n;
    state.check(n)?;
    for len in [reference.u.len(), reference.v.len(), reference.x.len(), reference.y.len(), reference.z.len()] {
        check_len(n, len)?;
    }
    let (rho1, rho2) = (params.rho1, params.rho2);
    let dual = (0..n)
        .map(|k| sq(rho1 * state.y[k] - reference.y[k]) / rho1 + sq(rho2 * state.z[k] - reference.z[k]) / rho2)
        .sum();
    Ok(LyapunovTerms {
        dual,
        state: state_distance_sq(pm, params, &state.v, &state.x, &reference.v, &reference.x),
        residual: residual_norm_sq(inst, pm, params, &state.u, &state.v, &state.x),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovTrace {
    /// `V^j` for every recorded iterate, initialization first.
    pub v_values: Vec<f64>,
    /// `V^j - V^{j+1} - ||r^j||^2_R - ||B (x_hat^{j+1} - x_hat^j)||^2_R`
    pub decrease_slack: Vec<f64>,
    /// Running sum of `||r^j||^2_R + ||B (x_hat^{j+1} - x_hat^j)||^2_R`.
    pub cumulative_sum: Vec<f64>,
}

impl LyapunovTrace {
    pub fn record(
        inst: &ProblemInstance,
        pm: &PredictionMatrices,
        params: &SolverParams,
        iterates: &[IterateState],
        reference: &ReferencePoint,
    ) -> Result<Self> {
        let terms = iterates
            .iter()
            .map(|s| lyapunov_value(inst, pm, params, s, reference))
            .collect::<Result<Vec<_>>>()?;
        let v_values: Vec<f64> = terms.iter().map(LyapunovTerms::total).collect();
        let mut decrease_slack = Vec::with_capacity(iterates.len().saturating_sub(1));
        let mut cumulative_sum = Vec::with_capacity(decrease_slack.capacity());
        let mut acc = 0.0;
        for j in 0..iterates.len().saturating_sub(1) {
            let (a, b) = (&iterates[j], &iterates[j + 1]);
            let dissipation = terms[j].residual + state_distance_sq(pm, params, &b.v, &b.x, &a.v, &a.x);
            acc += dissipation;
            decrease_slack.push(v_values[j] - v_values[j + 1] - dissipation);
            cumulative_sum.push(acc);
        }
        Ok(LyapunovTrace { v_values, decrease_slack, cumulative_sum })
    }

    pub fn v0(&self) -> f64 {
        self.v_values.first().copied().unwrap_or(0.0)
    }

    /// `DESCENT_RTOL * max(1, V^0)`
    pub fn tolerance(&self) -> f64 {
        DESCENT_RTOL * self.v0().max(1.0)
    }

    /// Keeps the first `iterations` transitions.
    pub fn truncated(&self, iterations: usize) -> Self {
        let m = iterations.min(self.decrease_slack.len());
        LyapunovTrace {
            v_values: self.v_values[..m + 1].to_vec(),
            decrease_slack: self.decrease_slack[..m].to_vec(),
            cumulative_sum: self.cumulative_sum[..m].to_vec(),
        }
    }

    /// `iter,V,decrease_slack,cumsum`; the last row has no transition and
    /// reports `NaN` slack.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,V,decrease_slack,cumsum\n");
        for (j, v) in self.v_values.iter().enumerate() {
            let slack = self.decrease_slack.get(j).copied().unwrap_or(f64::NAN);
            let cum = self
                .cumulative_sum
                .get(j)
                .or(self.cumulative_sum.last())
                .copied()
                .unwrap_or(0.0);
            out.push_str(&format!("{j},{v:.16e},{slack:.16e},{cum:.16e}\n"));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescentReport {
    /// Transitions `j -> j+1` whose slack is below `-threshold`.
    pub violations: Vec<usize>,
    pub threshold: f64,
    pub worst_slack: f64,
}

impl DescentReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn check_descent(trace: &LyapunovTrace) -> DescentReport {
    let threshold = trace.tolerance();
    let violations = trace
        .decrease_slack
        .iter()
        .enumerate()
        .filter(|(_, &s)| s < -threshold)
        .map(|(j, _)| j)
        .collect();
    let worst_slack = trace.decrease_slack.iter().copied().fold(f64::INFINITY, f64::min);
    DescentReport { violations, threshold, worst_slack }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TelescopingReport {
    pub holds: bool,
    /// `V^0` minus the full dissipation sum.
    pub slack: f64,
}

pub fn check_telescoping(trace: &LyapunovTrace) -> TelescopingReport {
    let total = trace.cumulative_sum.last().copied().unwrap_or(0.0);
    let slack = trace.v0() - total;
    TelescopingReport { holds: slack >= -trace.tolerance(), slack }
}

/// Whether `V(state) <= c`.
pub fn s_c_membership(
    inst: &ProblemInstance,
    pm: &PredictionMatrices,
    params: &SolverParams,
    state: &IterateState,
    reference: &ReferencePoint,
    c: f64,
) -> Result<bool> {
    if !(c > 0.0) {
        return Err(Error::InvalidParams(format!("level must be positive, got {c}")));
    }
    Ok(lyapunov_value(inst, pm, params, state, reference)?.total() <= c)
}

/// Solves with full iterate tracing and records the Lyapunov trace against
/// `reference`.
pub fn traced_solve(
    inst: &ProblemInstance,
    params: &SolverParams,
    reference: &ReferencePoint,
) -> Result<(SolveReport, LyapunovTrace)> {
    let params = params.clone().with_trace(TraceLevel::FullIterates);
    let mut pm = PredictionMatrices::build(&inst.a)?;
    pm.ensure_factor(params.rho1, params.rho2)?;
    let init = initialize(inst, &pm);
    let report = solve_from_state(inst, &pm, &params, init)?;
    let trace = LyapunovTrace::record(inst, &pm, &params, &report.iterates, reference)?;
    Ok((report, trace))
}
