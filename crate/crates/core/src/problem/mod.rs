//! Optimal-control problem data and evaluation.
//!
//! A horizon of `n` scalar stages with dynamics
//! `x[k+1] = a[k] * x[k] + b_k(u[k])`, quadratic input cost `g_k`,
//! quadratic state cost `f_{k+1}`, and per-stage boxes on `u[k]` and
//! `x[k+1]`. State sequences are always `(x_1, ..., x_N)`; entry `k` of any
//! state-indexed array belongs to the successor state of stage `k`.

mod generate;
mod prediction;
mod rng;

pub use generate::generate_random_instance;
pub use prediction::{PredictionMatrices, VSolveFactor};
pub use rng::SplitMix64;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInstance")]
pub struct ProblemInstance {
    pub n: usize,
    pub x0: f64,
    pub a: Vec<f64>,
    pub d: Vec<f64>,
    pub alpha2: Vec<f64>,
    pub alpha1: Vec<f64>,
    pub alpha0: Vec<f64>,
    pub beta2: Vec<f64>,
    pub beta1: Vec<f64>,
    pub beta0: Vec<f64>,
    pub u_min: Vec<f64>,
    pub u_max: Vec<f64>,
    pub x_min: Vec<f64>,
    pub x_max: Vec<f64>,
    pub gamma2: Vec<f64>,
    pub gamma1: Vec<f64>,
    pub gamma0: Vec<f64>,
}

/// On-disk form; `a` defaults to ones and the `gamma*` arrays to zeros.
#[derive(Deserialize)]
struct RawInstance {
    n: usize,
    x0: f64,
    a: Option<Vec<f64>>,
    d: Vec<f64>,
    alpha2: Vec<f64>,
    alpha1: Vec<f64>,
    alpha0: Vec<f64>,
    beta2: Vec<f64>,
    beta1: Vec<f64>,
    beta0: Vec<f64>,
    u_min: Vec<f64>,
    u_max: Vec<f64>,
    x_min: Vec<f64>,
    x_max: Vec<f64>,
    gamma2: Option<Vec<f64>>,
    gamma1: Option<Vec<f64>>,
    gamma0: Option<Vec<f64>>,
}

impl TryFrom<RawInstance> for ProblemInstance {
    type Error = Error;

    fn try_from(raw: RawInstance) -> Result<Self> {
        let n = raw.n;
        let inst = ProblemInstance {
            n,
            x0: raw.x0,
            a: raw.a.unwrap_or_else(|| vec![1.0; n]),
            d: raw.d,
            alpha2: raw.alpha2,
            alpha1: raw.alpha1,
            alpha0: raw.alpha0,
            beta2: raw.beta2,
            beta1: raw.beta1,
            beta0: raw.beta0,
            u_min: raw.u_min,
            u_max: raw.u_max,
            x_min: raw.x_min,
            x_max: raw.x_max,
            gamma2: raw.gamma2.unwrap_or_else(|| vec![0.0; n]),
            gamma1: raw.gamma1.unwrap_or_else(|| vec![0.0; n]),
            gamma0: raw.gamma0.unwrap_or_else(|| vec![0.0; n]),
        };
        inst.validate()?;
        Ok(inst)
    }
}

/// Which box a violation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Input,
    State,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: BoundKind,
    pub stage: usize,
    /// Distance outside the box (always positive).
    pub amount: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
    /// `||x - (Phi x0 + Psi b(u))||_inf`
    pub dynamics_defect: f64,
}

impl FeasibilityReport {
    pub fn is_feasible(&self, dynamics_tol: f64) -> bool {
        self.violations.is_empty() && self.dynamics_defect <= dynamics_tol
    }
}

#[inline]
pub(crate) fn clamp(value: f64, lo: f64, hi: f64) -> f64 {
    value.max(lo).min(hi)
}

impl ProblemInstance {
    /// Instance with identity dynamics, zero costs and zero loss, used as a
    /// starting point by tests and callers that fill fields by hand.
    pub fn zeros(n: usize, u_box: (f64, f64), x_box: (f64, f64)) -> Self {
        let z = vec![0.0; n];
        ProblemInstance {
            n,
            x0: 0.0,
            a: vec![1.0; n],
            d: z.clone(),
            alpha2: z.clone(),
            alpha1: z.clone(),
            alpha0: z.clone(),
            beta2: z.clone(),
            beta1: z.clone(),
            beta0: z.clone(),
            u_min: vec![u_box.0; n],
            u_max: vec![u_box.1; n],
            x_min: vec![x_box.0; n],
            x_max: vec![x_box.1; n],
            gamma2: z.clone(),
            gamma1: z.clone(),
            gamma0: z,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if n == 0 {
            return Err(Error::InvalidInstance("horizon must be at least 1".into()));
        }
        let arrays: [(&str, &Vec<f64>); 15] = [
            ("a", &self.a),
            ("d", &self.d),
            ("alpha2", &self.alpha2),
            ("alpha1", &self.alpha1),
            ("alpha0", &self.alpha0),
            ("beta2", &self.beta2),
            ("beta1", &self.beta1),
            ("beta0", &self.beta0),
            ("u_min", &self.u_min),
            ("u_max", &self.u_max),
            ("x_min", &self.x_min),
            ("x_max", &self.x_max),
            ("gamma2", &self.gamma2),
            ("gamma1", &self.gamma1),
            ("gamma0", &self.gamma0),
        ];
        for (name, arr) in arrays {
            if arr.len() != n {
                return Err(Error::InvalidInstance(format!(
                    "{name} has length {} but n = {n}",
                    arr.len()
                )));
            }
            if arr.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInstance(format!("{name} has non-finite entries")));
            }
        }
        if !self.x0.is_finite() {
            return Err(Error::InvalidInstance("x0 is not finite".into()));
        }
        for k in 0..n {
            if self.u_min[k] > self.u_max[k] {
                return Err(Error::InvalidInstance(format!("u_min > u_max at stage {k}")));
            }
            if self.x_min[k] > self.x_max[k] {
                return Err(Error::InvalidInstance(format!("x_min > x_max at stage {k}")));
            }
            if self.alpha2[k] < 0.0 {
                return Err(Error::InvalidInstance(format!("alpha2 < 0 at stage {k}")));
            }
            if self.gamma2[k] < 0.0 {
                return Err(Error::InvalidInstance(format!("gamma2 < 0 at stage {k}")));
            }
        }
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string()? + "\n")?;
        Ok(())
    }

    fn check_stage(&self, k: usize) -> Result<()> {
        if k < self.n {
            Ok(())
        } else {
            Err(Error::StageOutOfRange { stage: k, horizon: self.n })
        }
    }

    /// Charge increment `b_k(u) = -beta2 (d - u)^2 - beta1 (d - u) - beta0`.
    pub fn eval_b(&self, k: usize, u: f64) -> Result<f64> {
        self.check_stage(k)?;
        Ok(self.b(k, u))
    }

    /// `b_k'(u) = 2 beta2 (d - u) + beta1`.
    pub fn eval_db(&self, k: usize, u: f64) -> Result<f64> {
        self.check_stage(k)?;
        Ok(self.db(k, u))
    }

    #[inline]
    pub(crate) fn b(&self, k: usize, u: f64) -> f64 {
        let e = self.d[k] - u;
        -self.beta2[k] * e * e - self.beta1[k] * e - self.beta0[k]
    }

    #[inline]
    pub(crate) fn db(&self, k: usize, u: f64) -> f64 {
        2.0 * self.beta2[k] * (self.d[k] - u) + self.beta1[k]
    }

    /// `b(u)` over the whole horizon.
    pub fn b_vec(&self, u: &[f64]) -> Vec<f64> {
        u.iter().enumerate().map(|(k, &uk)| self.b(k, uk)).collect()
    }

    #[inline]
    pub fn stage_cost(&self, k: usize, u: f64) -> f64 {
        (self.alpha2[k] * u + self.alpha1[k]) * u + self.alpha0[k]
    }

    #[inline]
    pub fn stage_cost_grad(&self, k: usize, u: f64) -> f64 {
        2.0 * self.alpha2[k] * u + self.alpha1[k]
    }

    /// `f_{k+1}(x)`, the cost on the successor state of stage `k`.
    #[inline]
    pub fn state_cost(&self, k: usize, x: f64) -> f64 {
        (self.gamma2[k] * x + self.gamma1[k]) * x + self.gamma0[k]
    }

    #[inline]
    pub fn state_cost_grad(&self, k: usize, x: f64) -> f64 {
        2.0 * self.gamma2[k] * x + self.gamma1[k]
    }

    pub fn has_state_cost(&self) -> bool {
        self.gamma2.iter().chain(&self.gamma1).any(|&c| c != 0.0)
    }

    /// `sum_k g_k(u_k) + sum_k f_{k+1}(x_{k+1})`.
    pub fn eval_objective(&self, u: &[f64], x: &[f64]) -> Result<f64> {
        check_len(self.n, u.len())?;
        check_len(self.n, x.len())?;
        Ok(self.objective_unchecked(u, x))
    }

    pub(crate) fn objective_unchecked(&self, u: &[f64], x: &[f64]) -> f64 {
        let mut total = 0.0;
        for k in 0..self.n {
            total += self.stage_cost(k, u[k]) + self.state_cost(k, x[k]);
        }
        total
    }

    /// State trajectory `(x_1, ..., x_N)` from the recursion
    /// `x[k+1] = a[k] x[k] + b_k(u[k])`.
    pub fn rollout(&self, u: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n, u.len())?;
        let mut x = Vec::with_capacity(self.n);
        let mut prev = self.x0;
        for k in 0..self.n {
            prev = self.a[k] * prev + self.b(k, u[k]);
            x.push(prev);
        }
        Ok(x)
    }

    /// Bound violations beyond `tol` and the dynamics defect of `(u, x)`.
    pub fn check_feasibility(&self, u: &[f64], x: &[f64], tol: f64) -> FeasibilityReport {
        let mut violations = Vec::new();
        for k in 0..self.n.min(u.len()) {
            let excess = (self.u_min[k] - u[k]).max(u[k] - self.u_max[k]);
            if excess > tol {
                violations.push(Violation { kind: BoundKind::Input, stage: k, amount: excess });
            }
        }
        for k in 0..self.n.min(x.len()) {
            let excess = (self.x_min[k] - x[k]).max(x[k] - self.x_max[k]);
            if excess > tol {
                violations.push(Violation { kind: BoundKind::State, stage: k, amount: excess });
            }
        }
        let dynamics_defect = if u.len() == self.n && x.len() == self.n {
            let predicted = self.rollout(u).expect("length checked");
            predicted
                .iter()
                .zip(x)
                .map(|(p, xi)| (p - xi).abs())
                .fold(0.0, f64::max)
        } else {
            f64::INFINITY
        };
        FeasibilityReport { violations, dynamics_defect }
    }

    pub fn clamp_u(&self, k: usize, u: f64) -> f64 {
        clamp(u, self.u_min[k], self.u_max[k])
    }

    pub fn clamp_x(&self, k: usize, x: f64) -> f64 {
        clamp(x, self.x_min[k], self.x_max[k])
    }
}
