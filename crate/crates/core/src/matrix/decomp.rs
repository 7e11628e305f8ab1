use super::{axpy, dot, norm, DenseMatrix};
use crate::error::{Error, Result};
use crate::rng::{RngSeed, SeededRng};

/// Off-diagonal convergence tolerance shared by the Jacobi routines.
const JACOBI_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// Extra block columns carried by subspace iteration beyond the requested count.
const SUBSPACE_OVERSAMPLE: usize = 8;
const SUBSPACE_TOL: f64 = 1e-10;
const SUBSPACE_MAX_ITERS: usize = 1000;

/// Thin singular value decomposition `m = U diag(s) Vᵀ`.
#[derive(Debug, Clone)]
pub struct Svd {
    /// `rows x r`, orthonormal columns.
    pub u: DenseMatrix,
    /// Length `r = min(rows, cols)`, non-negative, descending.
    pub s: Vec<f64>,
    /// `cols x r`, orthonormal columns.
    pub v: DenseMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> DenseMatrix {
        let mut us = self.u.clone();
        for i in 0..us.rows() {
            for (x, s) in us.row_mut(i).iter_mut().zip(&self.s) {
                *x *= s;
            }
        }
        us.matmul(&self.v.transpose()).expect("svd factors are conformant")
    }

    /// Number of singular values above `rcond * s_max`.
    pub fn rank(&self, rcond: f64) -> usize {
        let cutoff = self.s.first().copied().unwrap_or(0.0) * rcond;
        self.s.iter().filter(|&&s| s > cutoff).count()
    }

    fn default_cutoff(&self) -> f64 {
        let dim = self.u.rows().max(self.v.rows()) as f64;
        self.s.first().copied().unwrap_or(0.0) * dim * f64::EPSILON
    }
}

/// One-sided (Hestenes) Jacobi SVD.
pub fn svd(m: &DenseMatrix) -> Result<Svd> {
    if m.rows() < m.cols() {
        let t = svd(&m.transpose())?;
        return Ok(Svd {
            u: t.v,
            s: t.s,
            v: t.u,
        });
    }
    let (rows, cols) = m.shape();
    let mut w = m.columns();
    let mut v: Vec<Vec<f64>> = (0..cols)
        .map(|j| {
            let mut e = vec![0.0; cols];
            e[j] = 1.0;
            e
        })
        .collect();
    let negligible = m.frobenius_norm() * f64::EPSILON * 1e-3;

    let mut converged = false;
    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha = dot(&w[p], &w[p]);
                let beta = dot(&w[q], &w[q]);
                let gamma = dot(&w[p], &w[q]);
                let scale = alpha.sqrt() * beta.sqrt();
                if scale <= negligible * negligible || gamma.abs() <= JACOBI_TOL * scale {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut w, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            routine: "svd",
            iterations: MAX_SWEEPS,
        });
    }

    let mut order: Vec<(f64, usize)> = w.iter().enumerate().map(|(j, c)| (norm(c), j)).collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let s_max = order.first().map_or(0.0, |o| o.0);
    let cutoff = s_max * rows as f64 * f64::EPSILON;

    let mut u_cols = Vec::with_capacity(cols);
    let mut v_cols = Vec::with_capacity(cols);
    let mut s = Vec::with_capacity(cols);
    for &(sigma, j) in &order {
        v_cols.push(v[j].clone());
        if sigma > cutoff && sigma > 0.0 {
            u_cols.push(w[j].iter().map(|x| x / sigma).collect::<Vec<_>>());
            s.push(sigma);
        } else {
            u_cols.push(vec![0.0; rows]);
            s.push(sigma);
        }
    }
    complete_orthonormal(&mut u_cols, &s, cutoff);

    Ok(Svd {
        u: DenseMatrix::from_columns(&u_cols)?,
        s,
        v: DenseMatrix::from_columns(&v_cols)?,
    })
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (head, tail) = cols.split_at_mut(q);
    let wp = &mut head[p];
    let wq = &mut tail[0];
    for (a, b) in wp.iter_mut().zip(wq.iter_mut()) {
        let x = *a;
        let y = *b;
        *a = c * x - s * y;
        *b = s * x + c * y;
    }
}

/// Replaces the columns whose singular value fell below `cutoff` with unit
/// vectors orthogonal to every other column.
fn complete_orthonormal(u_cols: &mut [Vec<f64>], s: &[f64], cutoff: f64) {
    let rows = u_cols.first().map_or(0, Vec::len);
    let mut candidate = 0;
    for j in 0..u_cols.len() {
        if s[j] > cutoff && s[j] > 0.0 {
            continue;
        }
        while candidate < rows {
            let mut e = vec![0.0; rows];
            e[candidate] = 1.0;
            candidate += 1;
            for _ in 0..2 {
                for (k, other) in u_cols.iter().enumerate() {
                    if k != j && other.iter().any(|&x| x != 0.0) {
                        let proj = dot(other, &e);
                        axpy(-proj, other, &mut e);
                    }
                }
            }
            let n = norm(&e);
            if n > 1e-8 {
                u_cols[j] = e.iter().map(|x| x / n).collect();
                break;
            }
        }
    }
}

/// Moore–Penrose pseudo-inverse, discarding singular values below
/// `max(rows, cols) * eps * s_max`.
pub fn pseudo_inverse(m: &DenseMatrix) -> Result<DenseMatrix> {
    let f = svd(m)?;
    let cutoff = f.default_cutoff();
    let mut v_scaled = f.v.clone();
    for i in 0..v_scaled.rows() {
        for (x, &s) in v_scaled.row_mut(i).iter_mut().zip(&f.s) {
            *x = if s > cutoff { *x / s } else { 0.0 };
        }
    }
    v_scaled.matmul(&f.u.transpose())
}

/// Minimum-norm least-squares solution of `a x ≈ b`.
pub fn least_squares(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch {
            op: "least_squares",
            left_rows: a.rows(),
            left_cols: a.cols(),
            right_rows: b.len(),
            right_cols: 1,
        });
    }
    let f = svd(a)?;
    let cutoff = f.default_cutoff();
    let utb = f.u.tr_matvec(b)?;
    let coef: Vec<f64> = utb
        .iter()
        .zip(&f.s)
        .map(|(c, &s)| if s > cutoff { c / s } else { 0.0 })
        .collect();
    f.v.matvec(&coef)
}

/// Eigenpairs of a symmetric matrix, eigenvalues in descending order and
/// eigenvectors as the matching columns of `vectors`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

/// Full eigendecomposition by the cyclic Jacobi method. Only the upper
/// triangle of `m` is read.
pub fn symmetric_eigen(m: &DenseMatrix) -> Result<SymmetricEigen> {
    let n = m.rows();
    if m.cols() != n {
        return Err(Error::DimensionMismatch {
            op: "symmetric_eigen",
            left_rows: m.rows(),
            left_cols: m.cols(),
            right_rows: m.cols(),
            right_cols: m.rows(),
        });
    }
    let mut a = m.clone();
    for i in 0..n {
        for j in 0..i {
            a[(i, j)] = a[(j, i)];
        }
    }
    let mut v = DenseMatrix::identity(n);

    let mut converged = n == 1;
    for _sweep in 0..MAX_SWEEPS {
        let mut off = 0.0;
        let mut diag = 0.0;
        for i in 0..n {
            diag += a[(i, i)] * a[(i, i)];
            for j in i + 1..n {
                off += a[(i, j)] * a[(i, j)];
            }
        }
        if off.sqrt() <= JACOBI_TOL * diag.sqrt().max(f64::MIN_POSITIVE) || off == 0.0 {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.is_finite() {
                    theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt())
                } else {
                    0.0
                };
                if t == 0.0 {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            routine: "symmetric_eigen",
            iterations: MAX_SWEEPS,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = v.select_columns(&order);
    Ok(SymmetricEigen { values, vectors })
}

/// The `count` algebraically largest eigenpairs of a symmetric matrix by
/// block subspace iteration with Rayleigh–Ritz extraction.
///
/// The block carries a few extra columns, so the result is exact (to
/// `SUBSPACE_TOL` residual) whenever the wanted eigenvalues are also among
/// the `count + 8` largest in magnitude. `start` seeds the block, which makes
/// repeated calls on slowly changing matrices cheap; missing columns are
/// filled with Gaussian vectors from `seed`.
pub fn top_eigenpairs(
    m: &DenseMatrix,
    count: usize,
    start: Option<&DenseMatrix>,
    seed: RngSeed,
) -> Result<SymmetricEigen> {
    let n = m.rows();
    if m.cols() != n {
        return Err(Error::DimensionMismatch {
            op: "top_eigenpairs",
            left_rows: m.rows(),
            left_cols: m.cols(),
            right_rows: m.cols(),
            right_cols: m.rows(),
        });
    }
    if count == 0 || count > n {
        return Err(Error::invalid(format!("top_eigenpairs: count {count} outside 1..={n}")));
    }
    let block = (count + SUBSPACE_OVERSAMPLE).min(n);
    if block == n {
        let full = symmetric_eigen(m)?;
        let idx: Vec<usize> = (0..count).collect();
        return Ok(SymmetricEigen {
            values: full.values[..count].to_vec(),
            vectors: full.vectors.select_columns(&idx),
        });
    }

    let mut rng = SeededRng::new(seed);
    let mut basis: Vec<Vec<f64>> = match start {
        Some(s) if s.rows() == n => s.columns().into_iter().take(block).collect(),
        Some(s) => {
            return Err(Error::DimensionMismatch {
                op: "top_eigenpairs start",
                left_rows: n,
                left_cols: n,
                right_rows: s.rows(),
                right_cols: s.cols(),
            })
        }
        None => Vec::new(),
    };
    orthonormalize(&mut basis, block, n, &mut rng);

    let scale = m.frobenius_norm().max(f64::MIN_POSITIVE);
    for _ in 0..SUBSPACE_MAX_ITERS {
        let v = DenseMatrix::from_columns(&basis)?;
        let gv = m.matmul(&v)?;
        let mut h = v.transpose().matmul(&gv)?;
        for i in 0..block {
            for j in 0..i {
                let avg = 0.5 * (h[(i, j)] + h[(j, i)]);
                h[(i, j)] = avg;
                h[(j, i)] = avg;
            }
        }
        let ritz = symmetric_eigen(&h)?;
        let x = v.matmul(&ritz.vectors)?;
        let gx = gv.matmul(&ritz.vectors)?;

        let theta_max = ritz.values.iter().fold(0.0f64, |acc, t| acc.max(t.abs()));
        let tol = SUBSPACE_TOL * theta_max.max(scale * f64::EPSILON);
        let done = (0..count).all(|j| {
            let r: f64 = (0..n)
                .map(|i| {
                    let d = gx[(i, j)] - ritz.values[j] * x[(i, j)];
                    d * d
                })
                .sum();
            r.sqrt() <= tol
        });
        if done {
            let idx: Vec<usize> = (0..count).collect();
            return Ok(SymmetricEigen {
                values: ritz.values[..count].to_vec(),
                vectors: x.select_columns(&idx),
            });
        }
        basis = gx.columns();
        orthonormalize(&mut basis, block, n, &mut rng);
    }
    Err(Error::NoConvergence {
        routine: "top_eigenpairs",
        iterations: SUBSPACE_MAX_ITERS,
    })
}

/// Modified Gram–Schmidt with one re-orthogonalization pass. Columns that
/// collapse are replaced by fresh random directions until `want` columns
/// are orthonormal.
fn orthonormalize(cols: &mut Vec<Vec<f64>>, want: usize, n: usize, rng: &mut SeededRng) {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(want);
    let mut pending = std::mem::take(cols).into_iter();
    while out.len() < want {
        let (mut c, fresh) = match pending.next() {
            Some(c) => (c, false),
            None => ((0..n).map(|_| rng.standard_normal()).collect::<Vec<_>>(), true),
        };
        let before = norm(&c);
        if before == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for q in &out {
                let p = dot(q, &c);
                axpy(-p, q, &mut c);
            }
        }
        let after = norm(&c);
        if after > 1e-10 * before {
            c.iter_mut().for_each(|x| *x /= after);
            out.push(c);
        } else if fresh && out.len() >= n {
            break;
        }
    }
    *cols = out;
}
