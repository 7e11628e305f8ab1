use serde::{Deserialize, Serialize};

use super::{BestTracker, OptimizerReport};
use crate::coherence::cross_coherence;
use crate::error::{Error, Result};
use crate::matrix::{dot, normalize_columns, normalize_rows, DenseMatrix};
use crate::rng::RngSeed;

/// Column norms further than this from one trigger internal normalization.
const UNIT_NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CrossCoherenceConfig {
    pub iterations: usize,
    /// Even exponent `p` of the smoothed maximum `Σ ⟨φ_i, ψ̄_j⟩^p`.
    pub smoothing_exponent: u32,
    pub step_size: f64,
    /// Multiplicative step decay per iteration, in `(0, 1]`.
    pub step_decay: f64,
    /// Seed of the Gaussian start drawn by [`CrossCoherenceConfig::initial_matrix`].
    pub seed: RngSeed,
}

impl Default for CrossCoherenceConfig {
    fn default() -> Self {
        CrossCoherenceConfig {
            iterations: 2000,
            smoothing_exponent: 8,
            step_size: 0.5,
            step_decay: 0.995,
            seed: RngSeed(0),
        }
    }
}

impl CrossCoherenceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::invalid("cross coherence: iterations must be at least 1"));
        }
        if self.smoothing_exponent < 2 || !self.smoothing_exponent.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "cross coherence: smoothing exponent must be even and >= 2, got {}",
                self.smoothing_exponent
            )));
        }
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::invalid(format!("cross coherence: step size must be positive, got {}", self.step_size)));
        }
        if !(self.step_decay > 0.0 && self.step_decay <= 1.0) {
            return Err(Error::invalid(format!(
                "cross coherence: step decay must be in (0, 1], got {}",
                self.step_decay
            )));
        }
        Ok(())
    }

    pub fn initial_matrix(&self, m: usize, n: usize) -> Result<DenseMatrix> {
        crate::matrix::gaussian_matrix(m, n, self.seed)
    }
}

/// `J(Φ) = Σ_{i,j} ⟨φ_i, ψ̄_j⟩^p` over rows `φ_i` of `phi` and columns
/// `ψ̄_j` of `psi_bar`.
pub fn cross_objective(phi: &DenseMatrix, psi_bar: &DenseMatrix, p: u32) -> Result<f64> {
    let c = phi.matmul(psi_bar)?;
    Ok(c.as_slice().iter().map(|v| v.powi(p as i32)).sum())
}

/// Euclidean gradient of [`cross_objective`]: row `i` is
/// `p Σ_j ⟨φ_i, ψ̄_j⟩^{p−1} ψ̄_j`.
pub fn cross_objective_gradient(phi: &DenseMatrix, psi_bar: &DenseMatrix, p: u32) -> Result<DenseMatrix> {
    let c = phi.matmul(psi_bar)?;
    let pf = p as f64;
    let weights = DenseMatrix::new(
        c.rows(),
        c.cols(),
        c.as_slice().iter().map(|v| pf * v.powi(p as i32 - 1)).collect(),
    )?;
    weights.matmul(&psi_bar.transpose())
}

/// Descent design of `Φ` for low cross coherence with the atoms of `Ψ`.
///
/// Rows are kept on the unit sphere. Each iteration moves every row against
/// the tangential part of the gradient of its own smoothed maximum
/// `(Σ_j ⟨φ_i, ψ̄_j⟩^p)^{1/p}`, which is the gradient of `J` rescaled per row,
/// then renormalizes the row and decays the step. Rows do not interact.
pub fn optimize_mu_cross(
    phi0: &DenseMatrix,
    psi: &DenseMatrix,
    cfg: &CrossCoherenceConfig,
) -> Result<(DenseMatrix, OptimizerReport)> {
    cfg.validate()?;
    if phi0.cols() != psi.rows() {
        return Err(Error::DimensionMismatch {
            op: "optimize_mu_cross",
            left_rows: phi0.rows(),
            left_cols: phi0.cols(),
            right_rows: psi.rows(),
            right_cols: psi.cols(),
        });
    }
    let renormalized = psi.column_norms().iter().any(|n| (n - 1.0).abs() > UNIT_NORM_TOL);
    let psi_bar = normalize_columns(psi)?;
    let psi_bar_t = psi_bar.transpose();
    let p = cfg.smoothing_exponent as i32;
    let inv_p = 1.0 / cfg.smoothing_exponent as f64;

    let mut phi = normalize_rows(phi0)?;
    let mut tracker = BestTracker::new(phi.clone(), cross_coherence(&phi, &psi_bar)?);
    let mut step = cfg.step_size;

    for _ in 0..cfg.iterations {
        let c = phi.matmul(&psi_bar)?;
        let mut weights = DenseMatrix::zeros(c.rows(), c.cols());
        for i in 0..c.rows() {
            let row = c.row(i);
            let j_row: f64 = row.iter().map(|v| v.powi(p)).sum();
            if j_row == 0.0 {
                continue;
            }
            // d/dφ (Σ c^p)^{1/p} = (Σ c^p)^{1/p − 1} Σ c^{p−1} ψ̄
            let scale = j_row.powf(inv_p - 1.0);
            for (w, v) in weights.row_mut(i).iter_mut().zip(row) {
                *w = scale * v.powi(p - 1);
            }
        }
        let grad = weights.matmul(&psi_bar_t)?;
        for i in 0..phi.rows() {
            let g = grad.row(i);
            let radial = dot(g, phi.row(i));
            let row = phi.row_mut(i);
            for (x, gi) in row.iter_mut().zip(g) {
                *x -= step * (gi - radial * *x);
            }
        }
        phi = normalize_rows(&phi)?;
        step *= cfg.step_decay;
        let mu = cross_coherence(&phi, &psi_bar)?;
        tracker.record(&phi, mu);
    }
    Ok(tracker.finish(renormalized))
}
