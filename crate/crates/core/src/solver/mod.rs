//! ADMM iteration for the split problem
//!
//! ```text
//! min f(x) + g(u) + indicators   s.t.   b(u) - v = 0,   Phi x0 + Psi v - x = 0
//! ```
//!
//! Each iteration updates `u` stage by stage (cubic stationary points),
//! `v` by one structured linear solve, `x` stage by stage (clamped
//! quadratic minimizer) and then both scaled multipliers.

mod admm;
mod cubic;
mod kkt;
mod params;
mod stage;

pub use admm::{
    dual_update, initialize, residuals, solve, solve_from_state, step, u_update, v_update,
    v_update_rhs, x_update, IterateState, Residuals, SolveReport, Termination,
};
pub use cubic::{cubic_real_roots, quadratic_roots, CubicRoots, RootSet};
pub use kkt::{kkt_residual, projected_stationarity, KktReport};
pub use params::{SolverParams, TraceLevel};
pub use stage::{solve_stage, stage_gradient_cubic, stage_objective, stage_objective_grad};
