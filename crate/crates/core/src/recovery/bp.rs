use serde::{Deserialize, Serialize};

use super::simplex;
use super::SparseVector;
use crate::error::{Error, Result};
use crate::matrix::{least_squares, norm, pseudo_inverse, DenseMatrix};

/// Entries of the Basis Pursuit output below this magnitude are dropped.
pub const SPARSIFY_THRESHOLD: f64 = 1e-6;

/// A polished support solution must satisfy `Ax = y` to this relative accuracy.
const POLISH_FEASIBILITY: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BpMethod {
    /// Exact two-phase revised simplex on the split LP.
    #[default]
    Simplex,
    /// ADMM with a least-squares polish of the final support.
    Admm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BpConfig {
    pub method: BpMethod,
    /// ADMM penalty `ρ` (initial value when adaptive).
    pub penalty: f64,
    /// ADMM iterations or simplex pivots.
    pub max_iterations: usize,
    pub primal_tol: f64,
    pub dual_tol: f64,
    /// ADMM only: rebalance `ρ` when the primal and dual residuals drift apart by more than 10x.
    pub adaptive_penalty: bool,
}

impl Default for BpConfig {
    fn default() -> Self {
        BpConfig {
            method: BpMethod::Simplex,
            penalty: 1.0,
            max_iterations: 5000,
            primal_tol: 1e-7,
            dual_tol: 1e-7,
            adaptive_penalty: true,
        }
    }
}

impl BpConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.penalty > 0.0 && self.penalty.is_finite()) {
            return Err(Error::invalid(format!("basis pursuit: penalty must be positive, got {}", self.penalty)));
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid("basis pursuit: max_iterations must be at least 1"));
        }
        if !(self.primal_tol > 0.0 && self.dual_tol > 0.0) {
            return Err(Error::invalid("basis pursuit: tolerances must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct BpSolution {
    pub estimate: SparseVector,
    /// False when `max_iterations` ran out before optimality (simplex) or
    /// before both residuals met tolerance (ADMM).
    pub converged: bool,
    pub iterations: usize,
    /// ADMM: `‖x − z‖`. Simplex: `‖Aα̂ − y‖`.
    pub primal_residual: f64,
    /// ADMM: `ρ‖z − z_prev‖`. Simplex: `max(0, ‖Aᵀπ‖∞ − 1)`.
    pub dual_residual: f64,
    /// ADMM only: the estimate was replaced by the least-squares fit on its support.
    pub polished: bool,
}

/// Basis Pursuit solver bound to one sensing matrix, solving
/// `min ‖x‖₁ s.t. Ax = y`.
///
/// The default [`BpMethod::Simplex`] solves the equivalent LP
/// `min 1ᵀ(u + v) s.t. A(u − v) = y, u, v ≥ 0` exactly and returns a vertex.
/// [`BpMethod::Admm`] runs ADMM on the split `x = z`:
///
/// ```text
/// x ← Π(z − u)              projection onto {x : Ax = y}
/// z ← soft(x + u, 1/ρ)
/// u ← u + x − z
/// ```
///
/// The projection `Π(v) = v + A⁺(y − Av)` uses a pseudo-inverse computed
/// once in [`BasisPursuit::new`]. After the loop, the support of `z` is refit
/// by least squares; the refit replaces `z` when it is feasible and its
/// ℓ1 norm is no larger than `z`'s (within 1e-6 relative).
pub struct BasisPursuit {
    a: DenseMatrix,
    pinv: Option<DenseMatrix>,
    cfg: BpConfig,
}

impl BasisPursuit {
    pub fn new(a: &DenseMatrix, cfg: BpConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(BasisPursuit {
            a: a.clone(),
            pinv: match cfg.method {
                BpMethod::Admm => Some(pseudo_inverse(a)?),
                BpMethod::Simplex => None,
            },
            cfg,
        })
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.a
    }

    fn project(&self, pinv: &DenseMatrix, v: &mut [f64], y: &[f64]) {
        let av = self.a.matvec(v).expect("conformant");
        let r: Vec<f64> = y.iter().zip(&av).map(|(yi, ai)| yi - ai).collect();
        let corr = pinv.matvec(&r).expect("conformant");
        for (vi, ci) in v.iter_mut().zip(&corr) {
            *vi += ci;
        }
    }

    pub fn solve(&self, y: &[f64]) -> Result<BpSolution> {
        let (m, l) = self.a.shape();
        if y.len() != m {
            return Err(Error::DimensionMismatch {
                op: "basis_pursuit",
                left_rows: m,
                left_cols: l,
                right_rows: y.len(),
                right_cols: 1,
            });
        }
        if y.iter().all(|&v| v == 0.0) {
            return Ok(BpSolution {
                estimate: SparseVector::zeros(l),
                converged: true,
                iterations: 0,
                primal_residual: 0.0,
                dual_residual: 0.0,
                polished: false,
            });
        }
        match &self.pinv {
            Some(pinv) => self.solve_admm(pinv, y),
            None => self.solve_simplex(y),
        }
    }

    fn solve_simplex(&self, y: &[f64]) -> Result<BpSolution> {
        let out = simplex::l1_min(&self.a, y, self.cfg.max_iterations)?;
        let estimate = SparseVector::from_dense(&out.x, SPARSIFY_THRESHOLD);
        let fit = self.a.matvec(&estimate.to_dense())?;
        let resid = norm(&fit.iter().zip(y).map(|(f, v)| f - v).collect::<Vec<_>>());
        Ok(BpSolution {
            estimate,
            converged: out.optimal,
            iterations: out.pivots,
            primal_residual: resid,
            dual_residual: out.dual_infeasibility,
            polished: false,
        })
    }

    fn solve_admm(&self, pinv: &DenseMatrix, y: &[f64]) -> Result<BpSolution> {
        let l = self.a.cols();
        let mut rho = self.cfg.penalty;
        let mut z = vec![0.0; l];
        let mut u = vec![0.0; l];
        let mut x = vec![0.0; l];
        let mut z_prev = vec![0.0; l];
        let (mut r_norm, mut s_norm) = (f64::INFINITY, f64::INFINITY);
        let mut converged = false;
        let mut iterations = 0;

        while iterations < self.cfg.max_iterations {
            iterations += 1;
            for i in 0..l {
                x[i] = z[i] - u[i];
            }
            self.project(pinv, &mut x, y);
            z_prev.copy_from_slice(&z);
            let kappa = 1.0 / rho;
            for i in 0..l {
                let v = x[i] + u[i];
                z[i] = if v > kappa {
                    v - kappa
                } else if v < -kappa {
                    v + kappa
                } else {
                    0.0
                };
                u[i] += x[i] - z[i];
            }

            r_norm = x.iter().zip(&z).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            s_norm = rho * z.iter().zip(&z_prev).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            let eps_pri = self.cfg.primal_tol * norm(&x).max(norm(&z));
            let eps_dual = self.cfg.dual_tol * rho * norm(&u);
            if r_norm <= eps_pri && s_norm <= eps_dual {
                converged = true;
                break;
            }
            if self.cfg.adaptive_penalty {
                // u is the scaled dual ρ⁻¹λ, so it rescales inversely with ρ.
                if r_norm > 10.0 * s_norm {
                    rho *= 2.0;
                    u.iter_mut().for_each(|v| *v *= 0.5);
                } else if s_norm > 10.0 * r_norm {
                    rho *= 0.5;
                    u.iter_mut().for_each(|v| *v *= 2.0);
                }
            }
        }

        let raw = SparseVector::from_dense(&z, SPARSIFY_THRESHOLD);
        let (estimate, polished) = match self.polish(&raw, y)? {
            Some(p) => (p, true),
            None => (raw, false),
        };
        Ok(BpSolution {
            estimate,
            converged,
            iterations,
            primal_residual: r_norm,
            dual_residual: s_norm,
            polished,
        })
    }

    fn polish(&self, raw: &SparseVector, y: &[f64]) -> Result<Option<SparseVector>> {
        let support = raw.support();
        if support.is_empty() || support.len() > self.a.rows() {
            return Ok(None);
        }
        let sub = self.a.select_columns(support);
        let coef = least_squares(&sub, y)?;
        let fit = sub.matvec(&coef)?;
        let resid = norm(&fit.iter().zip(y).map(|(f, v)| f - v).collect::<Vec<_>>());
        if resid > POLISH_FEASIBILITY * norm(y) {
            return Ok(None);
        }
        let candidate = SparseVector::new(raw.len(), support.to_vec(), coef)?;
        let bound = raw.l1_norm() * (1.0 + 1e-6);
        Ok((candidate.l1_norm() <= bound).then_some(candidate))
    }
}

/// One-shot Basis Pursuit; see [`BasisPursuit`].
pub fn basis_pursuit(a: &DenseMatrix, y: &[f64], cfg: &BpConfig) -> Result<BpSolution> {
    BasisPursuit::new(a, cfg.clone())?.solve(y)
}
