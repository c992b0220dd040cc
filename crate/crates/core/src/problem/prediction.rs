use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{check_len, Error, Result};

/// Condensed prediction matrices `x = Phi x0 + Psi b(u)`.
///
/// `phi[k] = a[0] * ... * a[k]` and `psi` is unit lower triangular with
/// `psi[i][j] = a[j+1] * ... * a[i]` for `j < i` (zero-based rows and
/// columns). Products with `Psi` and `Psi^T` are evaluated by the O(N)
/// recursions rather than through the dense matrix.
#[derive(Debug, Clone)]
pub struct PredictionMatrices {
    a: Vec<f64>,
    phi: Vec<f64>,
    psi: Vec<f64>,
    unit_dynamics: bool,
    v_solve_cache: Option<VSolveFactor>,
}

/// Factorization of `rho1 I + rho2 Psi^T Psi`, tagged with its penalties.
#[derive(Debug, Clone)]
pub struct VSolveFactor {
    rho1: f64,
    rho2: f64,
    kind: FactorKind,
}

#[derive(Debug, Clone)]
enum FactorKind {
    /// Unit dynamics: `Psi^{-1}` is the first-difference operator `D`, so
    /// `(rho1 I + rho2 Psi^T Psi)^{-1} = D (rho1 D^T D + rho2 I)^{-1} D^T`
    /// and the middle factor is tridiagonal. Stored as the `L D L^T`
    /// pivots and multipliers of that tridiagonal matrix.
    Tridiagonal { pivots: Vec<f64>, multipliers: Vec<f64>, off_diag: f64 },
    Dense(Cholesky<f64, Dyn>),
}

impl PredictionMatrices {
    pub fn build(a: &[f64]) -> Result<Self> {
        let n = a.len();
        if n == 0 {
            return Err(Error::InvalidInstance("empty dynamics sequence".into()));
        }
        let mut phi = Vec::with_capacity(n);
        let mut acc = 1.0;
        for &ak in a {
            acc *= ak;
            phi.push(acc);
        }
        let mut psi = vec![0.0; n * n];
        for i in 0..n {
            psi[i * n + i] = 1.0;
            for j in (0..i).rev() {
                psi[i * n + j] = psi[i * n + j + 1] * a[j + 1];
            }
        }
        Ok(Self {
            a: a.to_vec(),
            phi,
            psi,
            unit_dynamics: a.iter().all(|&ak| ak == 1.0),
            v_solve_cache: None,
        })
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn psi(&self, i: usize, j: usize) -> f64 {
        self.psi[i * self.n() + j]
    }

    /// Row-major dense `Psi`.
    pub fn psi_dense(&self) -> &[f64] {
        &self.psi
    }

    pub fn unit_dynamics(&self) -> bool {
        self.unit_dynamics
    }

    /// `Psi v`, via `w[k] = a[k] w[k-1] + v[k]`.
    pub fn apply_psi(&self, v: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(v.len());
        let mut prev = 0.0;
        for (k, &vk) in v.iter().enumerate() {
            prev = if k == 0 { vk } else { self.a[k] * prev + vk };
            out.push(prev);
        }
        out
    }

    /// `Psi^T w`, via `q[k] = w[k] + a[k+1] q[k+1]`.
    pub fn apply_psi_t(&self, w: &[f64]) -> Vec<f64> {
        let n = w.len();
        let mut out = vec![0.0; n];
        let mut next = 0.0;
        for k in (0..n).rev() {
            next = if k + 1 == n { w[k] } else { w[k] + self.a[k + 1] * next };
            out[k] = next;
        }
        out
    }

    /// `Phi x0 + Psi v`, the state trajectory driven by increments `v`.
    pub fn predict(&self, x0: f64, v: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(v.len());
        let mut prev = x0;
        for (k, &vk) in v.iter().enumerate() {
            prev = self.a[k] * prev + vk;
            out.push(prev);
        }
        out
    }

    /// `(rho1 I + rho2 Psi^T Psi) v`.
    pub fn apply_v_system(&self, rho1: f64, rho2: f64, v: &[f64]) -> Vec<f64> {
        let pv = self.apply_psi(v);
        let ptpv = self.apply_psi_t(&pv);
        v.iter().zip(&ptpv).map(|(vi, qi)| rho1 * vi + rho2 * qi).collect()
    }

    pub fn factor(&self) -> Option<&VSolveFactor> {
        self.v_solve_cache.as_ref()
    }

    /// Builds (or rebuilds) the cached factorization for `(rho1, rho2)`.
    pub fn ensure_factor(&mut self, rho1: f64, rho2: f64) -> Result<()> {
        if let Some(f) = &self.v_solve_cache {
            if f.rho1 == rho1 && f.rho2 == rho2 {
                return Ok(());
            }
        }
        if !(rho1 > 0.0 && rho2 >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "v-system needs rho1 > 0 and rho2 >= 0, got ({rho1}, {rho2})"
            )));
        }
        let kind = if self.unit_dynamics {
            self.tridiagonal_factor(rho1, rho2)
        } else {
            self.dense_factor(rho1, rho2)?
        };
        self.v_solve_cache = Some(VSolveFactor { rho1, rho2, kind });
        Ok(())
    }

    fn tridiagonal_factor(&self, rho1: f64, rho2: f64) -> FactorKind {
        let n = self.n();
        // rho1 D^T D + rho2 I: diagonal 2 rho1 + rho2 (last entry rho1 + rho2),
        // off-diagonal -rho1.
        let off_diag = -rho1;
        let mut pivots = Vec::with_capacity(n);
        let mut multipliers = Vec::with_capacity(n.saturating_sub(1));
        for i in 0..n {
            let diag = if i + 1 == n { rho1 + rho2 } else { 2.0 * rho1 + rho2 };
            if i == 0 {
                pivots.push(diag);
            } else {
                let l = off_diag / pivots[i - 1];
                multipliers.push(l);
                pivots.push(diag - l * off_diag);
            }
        }
        FactorKind::Tridiagonal { pivots, multipliers, off_diag }
    }

    fn dense_factor(&self, rho1: f64, rho2: f64) -> Result<FactorKind> {
        let n = self.n();
        let psi = DMatrix::from_row_slice(n, n, &self.psi);
        let mut m = psi.transpose() * &psi * rho2;
        for i in 0..n {
            m[(i, i)] += rho1;
        }
        let chol = Cholesky::new(m).ok_or_else(|| {
            Error::InvalidParams("v-system matrix is not positive definite".into())
        })?;
        Ok(FactorKind::Dense(chol))
    }

    /// Solves `(rho1 I + rho2 Psi^T Psi) v = rhs` with the cached factor.
    pub fn solve_v_system(&self, rho1: f64, rho2: f64, rhs: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n(), rhs.len())?;
        let f = self.v_solve_cache.as_ref().ok_or(Error::MissingFactorization)?;
        if f.rho1 != rho1 || f.rho2 != rho2 {
            return Err(Error::StaleFactorization {
                built_rho1: f.rho1,
                built_rho2: f.rho2,
                rho1,
                rho2,
            });
        }
        Ok(match &f.kind {
            FactorKind::Tridiagonal { pivots, multipliers, off_diag } => {
                let n = rhs.len();
                // D^T rhs
                let mut w: Vec<f64> = (0..n)
                    .map(|i| if i + 1 < n { rhs[i] - rhs[i + 1] } else { rhs[i] })
                    .collect();
                for i in 1..n {
                    w[i] -= multipliers[i - 1] * w[i - 1];
                }
                w[n - 1] /= pivots[n - 1];
                for i in (0..n - 1).rev() {
                    w[i] = (w[i] - off_diag * w[i + 1]) / pivots[i];
                }
                // D q
                let mut v = Vec::with_capacity(n);
                for i in 0..n {
                    v.push(if i == 0 { w[0] } else { w[i] - w[i - 1] });
                }
                v
            }
            FactorKind::Dense(chol) => {
                let b = DVector::from_column_slice(rhs);
                chol.solve(&b).as_slice().to_vec()
            }
        })
    }
}

impl VSolveFactor {
    pub fn rho(&self) -> (f64, f64) {
        (self.rho1, self.rho2)
    }

    pub fn is_tridiagonal(&self) -> bool {
        matches!(self.kind, FactorKind::Tridiagonal { .. })
    }
}
