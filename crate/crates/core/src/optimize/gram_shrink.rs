use serde::{Deserialize, Serialize};

use super::{BestTracker, OptimizerReport};
use crate::coherence::mutual_coherence;
use crate::error::{Error, Result};
use crate::matrix::{normalize_columns, pseudo_inverse, symmetric_eigen, top_eigenpairs, DenseMatrix, SymmetricEigen};
use crate::rng::RngSeed;

/// How the shrinkage threshold `t` is chosen each iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShrinkThreshold {
    /// Fixed `t` in `(0, 1]`.
    Absolute(f64),
    /// `t` is this quantile of the current off-diagonal `|G|` values.
    Quantile(f64),
}

/// Eigensolver for the rank-M projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenSolver {
    /// Warm-started block subspace iteration on the top `M` eigenpairs.
    #[default]
    Subspace,
    /// Full Jacobi eigendecomposition. Exact but `O(L³)` per sweep.
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GramShrinkConfig {
    pub iterations: usize,
    /// Default: the 0.999 quantile, so only the top 0.1% of off-diagonal
    /// magnitudes are shrunk each iteration.
    pub threshold: ShrinkThreshold,
    /// `γ` in `(0, 1)`.
    pub shrink_factor: f64,
    /// Seeds the random padding of the eigensolver's starting block, and the
    /// Gaussian start drawn by [`GramShrinkConfig::initial_matrix`].
    pub seed: RngSeed,
    pub eigen_solver: EigenSolver,
}

impl Default for GramShrinkConfig {
    fn default() -> Self {
        GramShrinkConfig {
            iterations: 1000,
            threshold: ShrinkThreshold::Quantile(0.999),
            shrink_factor: 0.8,
            seed: RngSeed(0),
            eigen_solver: EigenSolver::Subspace,
        }
    }
}

impl GramShrinkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::invalid("gram shrink: iterations must be at least 1"));
        }
        if !(self.shrink_factor > 0.0 && self.shrink_factor < 1.0) {
            return Err(Error::invalid(format!(
                "gram shrink: shrink factor must be in (0, 1), got {}",
                self.shrink_factor
            )));
        }
        match self.threshold {
            ShrinkThreshold::Absolute(t) if !(t > 0.0 && t <= 1.0) => Err(Error::invalid(format!(
                "gram shrink: threshold must be in (0, 1], got {t}"
            ))),
            ShrinkThreshold::Quantile(q) if !(0.0..=1.0).contains(&q) => Err(Error::invalid(format!(
                "gram shrink: threshold quantile must be in [0, 1], got {q}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn initial_matrix(&self, m: usize, n: usize) -> Result<DenseMatrix> {
        crate::matrix::gaussian_matrix(m, n, self.seed)
    }
}

/// Applies the shrinkage rule to the off-diagonal entries of `gram` in place
/// and returns the threshold used:
///
/// * `|g| ≥ t`: `g ← γ g`
/// * `γ t ≤ |g| < t`: `g ← γ t sign(g)`
/// * `|g| < γ t`: unchanged
pub fn shrink_gram(gram: &mut DenseMatrix, threshold: ShrinkThreshold, gamma: f64) -> f64 {
    let n = gram.rows();
    let t = match threshold {
        ShrinkThreshold::Absolute(t) => t,
        ShrinkThreshold::Quantile(q) => {
            let mut off: Vec<f64> = Vec::with_capacity(n * (n - 1) / 2);
            for i in 0..n {
                for j in i + 1..n {
                    off.push(gram[(i, j)].abs());
                }
            }
            if off.is_empty() {
                return 0.0;
            }
            let rank = ((q * off.len() as f64).ceil() as usize).clamp(1, off.len()) - 1;
            *off.select_nth_unstable_by(rank, f64::total_cmp).1
        }
    };
    let low = gamma * t;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let g = gram[(i, j)];
            let a = g.abs();
            gram[(i, j)] = if a >= t {
                gamma * g
            } else if a >= low {
                low * g.signum()
            } else {
                g
            };
        }
    }
    t
}

fn check_shapes(phi0: &DenseMatrix, psi: &DenseMatrix) -> Result<()> {
    if phi0.cols() != psi.rows() {
        return Err(Error::DimensionMismatch {
            op: "optimize_mu_a",
            left_rows: phi0.rows(),
            left_cols: phi0.cols(),
            right_rows: psi.rows(),
            right_cols: psi.cols(),
        });
    }
    let (m, n, l) = (phi0.rows(), psi.rows(), psi.cols());
    if !(m <= n && n <= l) {
        return Err(Error::invalid(format!("optimize_mu_a needs M <= N <= L, got M={m}, N={n}, L={l}")));
    }
    Ok(())
}

/// Gram-shrinkage design of `Φ` for low mutual coherence of `ΦΨ`.
///
/// Each iteration normalizes the columns of `A = ΦΨ`, shrinks the large
/// off-diagonal entries of `G = AᵀA`, projects `G` onto rank `M` through its
/// `M` largest eigenpairs (negative eigenvalues clamped to zero), factors
/// `G ≈ BᵀB` with `B = diag(√λ) Vᵀ`, and sets `Φ = B Ψ⁺`.
pub fn optimize_mu_a(
    phi0: &DenseMatrix,
    psi: &DenseMatrix,
    cfg: &GramShrinkConfig,
) -> Result<(DenseMatrix, OptimizerReport)> {
    cfg.validate()?;
    check_shapes(phi0, psi)?;
    let m = phi0.rows();
    let psi_pinv = pseudo_inverse(psi)?;

    let mut phi = phi0.clone();
    let mut a = phi.matmul(psi)?;
    let mut tracker = BestTracker::new(phi.clone(), mutual_coherence(&a)?);
    let mut warm: Option<DenseMatrix> = None;

    for it in 0..cfg.iterations {
        let a_norm = normalize_columns(&a).map_err(|e| e.context(format!("iteration {it}")))?;
        let mut gram = a_norm.transpose().matmul(&a_norm)?;
        shrink_gram(&mut gram, cfg.threshold, cfg.shrink_factor);

        let eig = match cfg.eigen_solver {
            EigenSolver::Subspace => {
                let start = warm.as_ref().unwrap_or(&a_norm);
                let start = if warm.is_some() { start.clone() } else { start.transpose() };
                top_eigenpairs(&gram, m, Some(&start), cfg.seed.derive(&[it as u64]))?
            }
            EigenSolver::Full => truncate(symmetric_eigen(&gram)?, m),
        };

        let l = gram.rows();
        let mut b = DenseMatrix::zeros(m, l);
        for r in 0..m {
            let scale = eig.values[r].max(0.0).sqrt();
            for c in 0..l {
                b[(r, c)] = scale * eig.vectors[(c, r)];
            }
        }
        phi = b.matmul(&psi_pinv)?;
        a = phi.matmul(psi)?;
        let mu = mutual_coherence(&a).map_err(|e| e.context(format!("iteration {it}")))?;
        tracker.record(&phi, mu);
        warm = Some(eig.vectors);
    }
    Ok(tracker.finish(false))
}

fn truncate(e: SymmetricEigen, count: usize) -> SymmetricEigen {
    let idx: Vec<usize> = (0..count).collect();
    SymmetricEigen {
        values: e.values[..count].to_vec(),
        vectors: e.vectors.select_columns(&idx),
    }
}
