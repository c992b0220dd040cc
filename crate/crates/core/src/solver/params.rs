use crate::error::{Error, Result};

/// How much of the iteration history a solve keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default)]
pub enum TraceLevel {
    /// Residual norm histories only.
    #[default]
    None,
    /// Residual norms plus the objective after every iteration.
    Residuals,
    /// Everything above plus a copy of every iterate, starting with the
    /// initialization.
    FullIterates,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverParams {
    pub rho1: f64,
    pub rho2: f64,
    pub eps_primal: f64,
    pub eps_dual: f64,
    pub max_iters: usize,
    pub trace_level: TraceLevel,
}

impl SolverParams {
    /// Equal primal and dual thresholds, 10^4 iteration cap, no tracing.
    pub fn new(rho1: f64, rho2: f64, eps: f64) -> Self {
        Self {
            rho1,
            rho2,
            eps_primal: eps,
            eps_dual: eps,
            max_iters: 10_000,
            trace_level: TraceLevel::None,
        }
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_trace(mut self, level: TraceLevel) -> Self {
        self.trace_level = level;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho1 > 0.0 && self.rho1.is_finite()) {
            return Err(Error::InvalidParams(format!("rho1 must be > 0, got {}", self.rho1)));
        }
        if !(self.rho2 > 0.0 && self.rho2.is_finite()) {
            return Err(Error::InvalidParams(format!("rho2 must be > 0, got {}", self.rho2)));
        }
        if !(self.eps_primal > 0.0 && self.eps_dual > 0.0) {
            return Err(Error::InvalidParams("stopping thresholds must be > 0".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParams("max_iters must be at least 1".into()));
        }
        Ok(())
    }
}
