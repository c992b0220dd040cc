//! Nonconvex ADMM for box-constrained model predictive control with a
//! nonlinear (per-stage scalar) input map.
//!
//! The crate is organised as:
//!
//! * [`problem`]: instance data, prediction matrices, dynamics and cost
//!   evaluation, seeded random instance generation.
//! * [`solver`]: the ADMM iteration, stage solvers and first-order checks.
//! * [`oracle`]: brute-force and dynamic-programming reference solvers.
//! * [`lyapunov`]: convergence-certificate diagnostics over recorded traces.
//! * [`bench`]: experiment harness, summary statistics, CSV and SVG output.

pub mod bench;
pub mod error;
pub mod lyapunov;
pub mod oracle;
pub mod problem;
pub mod solver;

pub use error::{Error, Result};
pub use problem::{PredictionMatrices, ProblemInstance, SplitMix64};
pub use solver::{solve, IterateState, SolveReport, SolverParams, Termination, TraceLevel};
