//! Sparse recovery: Orthogonal Matching Pursuit and Basis Pursuit, plus the
//! signal-domain success test used by the experiments.

mod bp;
mod omp;
mod simplex;

pub use bp::{basis_pursuit, BasisPursuit, BpConfig, BpMethod, BpSolution, SPARSIFY_THRESHOLD};
pub use omp::{omp, OmpSolution};

use crate::error::{Error, Result};
use crate::matrix::{norm, DenseMatrix};

/// A reconstruction succeeds when `‖Ψα − Ψα̂‖₂` is below this.
pub const SUCCESS_THRESHOLD: f64 = 1e-3;

/// Coefficient vector of length `len` stored as sorted support indices and
/// their values.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVector {
    len: usize,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseVector {
    pub fn zeros(len: usize) -> Self {
        SparseVector {
            len,
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Entries may come in any order; they are sorted by index.
    pub fn new(len: usize, indices: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if indices.len() != values.len() {
            return Err(Error::invalid(format!(
                "sparse vector: {} indices but {} values",
                indices.len(),
                values.len()
            )));
        }
        let mut pairs: Vec<(usize, f64)> = indices.into_iter().zip(values).collect();
        pairs.sort_by_key(|p| p.0);
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::invalid(format!("sparse vector: duplicate index {}", w[0].0)));
            }
        }
        if let Some(&(i, _)) = pairs.iter().find(|p| p.0 >= len) {
            return Err(Error::invalid(format!("sparse vector: index {i} out of range for length {len}")));
        }
        if let Some(&(i, v)) = pairs.iter().find(|p| !p.1.is_finite()) {
            return Err(Error::invalid(format!("sparse vector: non-finite value {v} at {i}")));
        }
        let (indices, values) = pairs.into_iter().unzip();
        Ok(SparseVector { len, indices, values })
    }

    /// Keeps the entries with `|v| >= threshold` (all non-zeros when `threshold` is 0).
    pub fn from_dense(dense: &[f64], threshold: f64) -> Self {
        let (indices, values) = dense
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0 && v.abs() >= threshold)
            .map(|(i, v)| (i, *v))
            .unzip();
        SparseVector {
            len: dense.len(),
            indices,
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Number of stored entries.
    pub fn sparsity(&self) -> usize {
        self.indices.len()
    }

    pub fn support(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.len];
        for (&i, &v) in self.indices.iter().zip(&self.values) {
            out[i] = v;
        }
        out
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum()
    }
}

/// `‖Ψ(α − α̂)‖₂`, the error in the signal domain.
pub fn signal_error(psi: &DenseMatrix, alpha: &SparseVector, alpha_hat: &SparseVector) -> Result<f64> {
    if alpha.len() != psi.cols() || alpha_hat.len() != psi.cols() {
        return Err(Error::invalid(format!(
            "coefficient lengths {} and {} do not match {} dictionary atoms",
            alpha.len(),
            alpha_hat.len(),
            psi.cols()
        )));
    }
    let diff: Vec<f64> = alpha
        .to_dense()
        .iter()
        .zip(alpha_hat.to_dense())
        .map(|(a, b)| a - b)
        .collect();
    Ok(norm(&psi.matvec(&diff)?))
}

/// Exact-reconstruction test: `‖Ψα − Ψα̂‖₂ < 10⁻³`.
pub fn reconstruction_success(psi: &DenseMatrix, alpha: &SparseVector, alpha_hat: &SparseVector) -> Result<bool> {
    Ok(signal_error(psi, alpha, alpha_hat)? < SUCCESS_THRESHOLD)
}
