use super::SparseVector;
use crate::error::{Error, Result};
use crate::matrix::{least_squares, norm, DenseMatrix};

#[derive(Debug, Clone)]
pub struct OmpSolution {
    pub estimate: SparseVector,
    /// Atoms in the order they were selected.
    pub selection_order: Vec<usize>,
    /// `‖r‖₂` before the first selection and after each one.
    pub residual_norms: Vec<f64>,
}

/// Orthogonal Matching Pursuit.
///
/// Selects the atom with the largest normalized correlation `|⟨a_j, r⟩| / ‖a_j‖`
/// (lowest index on ties), refits all selected coefficients by least squares
/// and stops once `max_sparsity` atoms are selected or `‖r‖₂ <= residual_tol`.
pub fn omp(a: &DenseMatrix, y: &[f64], max_sparsity: usize, residual_tol: f64) -> Result<OmpSolution> {
    let (m, l) = a.shape();
    if y.len() != m {
        return Err(Error::DimensionMismatch {
            op: "omp",
            left_rows: m,
            left_cols: l,
            right_rows: y.len(),
            right_cols: 1,
        });
    }
    if max_sparsity > m {
        return Err(Error::invalid(format!("omp: max sparsity {max_sparsity} exceeds {m} measurements")));
    }
    let col_norms = a.column_norms();
    let mut selected = vec![false; l];
    let mut support: Vec<usize> = Vec::with_capacity(max_sparsity);
    let mut coef: Vec<f64> = Vec::new();
    let mut residual = y.to_vec();
    let mut residual_norms = vec![norm(&residual)];

    while support.len() < max_sparsity && *residual_norms.last().unwrap() > residual_tol {
        let corr = a.tr_matvec(&residual)?;
        let mut best: Option<(usize, f64)> = None;
        for (j, (c, nj)) in corr.iter().zip(&col_norms).enumerate() {
            if selected[j] || *nj == 0.0 {
                continue;
            }
            let score = c.abs() / nj;
            if best.is_none_or(|(_, b)| score > b) {
                best = Some((j, score));
            }
        }
        let Some((j, score)) = best else { break };
        if score == 0.0 {
            break;
        }
        selected[j] = true;
        support.push(j);
        let sub = a.select_columns(&support);
        coef = least_squares(&sub, y)?;
        let fit = sub.matvec(&coef)?;
        residual = y.iter().zip(&fit).map(|(yi, fi)| yi - fi).collect();
        residual_norms.push(norm(&residual));
    }

    Ok(OmpSolution {
        estimate: SparseVector::new(l, support.clone(), coef)?,
        selection_order: support,
        residual_norms,
    })
}
