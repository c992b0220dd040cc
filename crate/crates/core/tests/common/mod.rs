//! Corpus builders and dense reference computations shared by the
//! integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use nmpc_admm::lyapunov::ReferencePoint;
use nmpc_admm::problem::generate_random_instance;
use nmpc_admm::solver::IterateState;
use nmpc_admm::{PredictionMatrices, ProblemInstance, SolverParams, SplitMix64};

pub fn psi_matrix(pm: &PredictionMatrices) -> DMatrix<f64> {
    let n = pm.n();
    DMatrix::from_fn(n, n, |i, j| if j <= i { pm.psi(i, j) } else { 0.0 })
}

/// `B = [[-I, 0], [Psi, -I]]`.
pub fn b_matrix(pm: &PredictionMatrices) -> DMatrix<f64> {
    let n = pm.n();
    let psi = psi_matrix(pm);
    let mut b = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        b[(i, i)] = -1.0;
        b[(n + i, n + i)] = -1.0;
        for j in 0..n {
            b[(n + i, j)] = psi[(i, j)];
        }
    }
    b
}

pub fn r_weights(n: usize, params: &SolverParams) -> DVector<f64> {
    DVector::from_fn(2 * n, |i, _| if i < n { params.rho1 } else { params.rho2 })
}

pub fn stack(a: &[f64], b: &[f64]) -> DVector<f64> {
    DVector::from_iterator(a.len() + b.len(), a.iter().chain(b).copied())
}

/// `s = [db(u)]^T R B (x_hat_prev - x_hat_new)` with `db = [diag(b'); 0]`.
pub fn stacked_dual_residual(
    inst: &ProblemInstance,
    pm: &PredictionMatrices,
    params: &SolverParams,
    prev: &IterateState,
    new: &IterateState,
) -> Vec<f64> {
    let n = inst.n;
    let mut db = DMatrix::zeros(2 * n, n);
    for k in 0..n {
        db[(k, k)] = inst.eval_db(k, new.u[k]).unwrap();
    }
    let r = DMatrix::from_diagonal(&r_weights(n, params));
    let dx = stack(&prev.v, &prev.x) - stack(&new.v, &new.x);
    let s = db.transpose() * r * b_matrix(pm) * dx;
    s.iter().copied().collect()
}

/// `V` evaluated with the stacked matrices.
pub fn dense_lyapunov(
    inst: &ProblemInstance,
    pm: &PredictionMatrices,
    params: &SolverParams,
    state: &IterateState,
    reference: &ReferencePoint,
) -> f64 {
    let n = inst.n;
    let w = r_weights(n, params);
    let y_hat = stack(
        &state.y.iter().map(|y| params.rho1 * y).collect::<Vec<_>>(),
        &state.z.iter().map(|z| params.rho2 * z).collect::<Vec<_>>(),
    );
    let dy = y_hat - stack(&reference.y, &reference.z);
    let bx = b_matrix(pm) * (stack(&state.v, &state.x) - stack(&reference.v, &reference.x));
    let phi = DVector::from_column_slice(pm.phi());
    let b_hat = stack(&inst.b_vec(&state.u), (phi * inst.x0).as_slice());
    let r = b_hat + b_matrix(pm) * stack(&state.v, &state.x);
    let mut v = 0.0;
    for i in 0..2 * n {
        v += dy[i] * dy[i] / w[i] + w[i] * bx[i] * bx[i] + w[i] * r[i] * r[i];
    }
    v
}

/// `(rho1 I + rho2 Psi^T Psi)^{-1} rhs` by dense LU.
pub fn dense_v_solve(pm: &PredictionMatrices, rho1: f64, rho2: f64, rhs: &[f64]) -> Vec<f64> {
    let n = pm.n();
    let psi = psi_matrix(pm);
    let m = DMatrix::identity(n, n) * rho1 + psi.transpose() * &psi * rho2;
    let x = m.lu().solve(&DVector::from_column_slice(rhs)).expect("nonsingular");
    x.iter().copied().collect()
}

/// Standard random instance with affine input map.
pub fn convex_instance(seed: u64, n: usize) -> ProblemInstance {
    let mut p = generate_random_instance(seed, n);
    p.beta2 = vec![0.0; n];
    p
}

/// Convex instance with a quadratic state cost, wide state bounds and an
/// input cost whose minimizer is well inside the input box.
pub fn convex_state_cost_instance(seed: u64, n: usize) -> ProblemInstance {
    let mut rng = SplitMix64::new(seed);
    let mut p = ProblemInstance::zeros(n, (-0.5, 0.5), (-10.0, 10.0));
    for k in 0..n {
        p.d[k] = rng.uniform(-1.0, 1.0);
        p.alpha2[k] = rng.uniform(0.5, 1.0);
        p.alpha1[k] = rng.uniform(-0.3, 0.3);
        p.beta1[k] = rng.uniform(0.2, 1.0);
        p.gamma2[k] = rng.uniform(0.05, 0.5);
        p.gamma1[k] = rng.uniform(-0.1, 0.1);
    }
    p.x0 = rng.uniform(-0.5, 0.5);
    p
}

/// `count` instances from [`convex_state_cost_instance`] with horizons in
/// `2..=30` whose exact optimum is interior by `margin`, together with that
/// optimum and its multipliers.
pub fn convex_interior_corpus(master: u64, count: usize, margin: f64) -> Vec<(ProblemInstance, ReferencePoint)> {
    let mut out = Vec::new();
    let mut i = 0u64;
    while out.len() < count {
        let seed = SplitMix64::nth_output(master, i);
        i += 1;
        let n = 2 + (seed % 29) as usize;
        let p = convex_state_cost_instance(seed, n);
        let pm = PredictionMatrices::build(&p.a).unwrap();
        let r = ReferencePoint::affine_quadratic(&p, &pm).unwrap();
        if r.is_interior(&p, margin) {
            out.push((p, r));
        }
    }
    out
}

/// Random stage data for sub-problem checks: possibly nonconvex input map,
/// input box `[-0.5, 0.5]`.
pub fn random_stage(rng: &mut SplitMix64) -> ProblemInstance {
    let mut p = ProblemInstance::zeros(1, (-0.5, 0.5), (-2.0, 2.0));
    p.d[0] = rng.uniform(-1.0, 1.0);
    p.alpha2[0] = rng.uniform(0.0, 1.0);
    p.alpha1[0] = rng.uniform(-1.0, 1.0);
    p.alpha0[0] = rng.uniform(-0.1, 0.1);
    p.beta2[0] = rng.uniform(0.0, 0.5);
    p.beta1[0] = rng.uniform(0.0, 1.0);
    p.beta0[0] = rng.uniform(-0.1, 0.1);
    p
}

/// `10^U[lo, hi]`.
pub fn log_uniform(rng: &mut SplitMix64, lo: f64, hi: f64) -> f64 {
    10f64.powf(rng.uniform(lo, hi))
}
