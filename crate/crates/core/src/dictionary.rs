//! Dictionaries `Ψ` used as the fixed sparsifying basis.

use std::f64::consts::PI;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{gaussian_matrix, normalize_columns, read_matrix_csv, DenseMatrix};
use crate::rng::RngSeed;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DictionaryKind {
    /// `[I | DCT]`, requires `L = 2N`.
    IdentityDct,
    /// Column-normalized Gaussian.
    GaussianRandom,
    /// Headerless CSV, column-normalized on load.
    FromFile(PathBuf),
}

impl std::str::FromStr for DictionaryKind {
    type Err = String;

    /// `idct`, `gauss` or `file:PATH`.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "idct" => Ok(DictionaryKind::IdentityDct),
            "gauss" => Ok(DictionaryKind::GaussianRandom),
            _ => match s.strip_prefix("file:") {
                Some(p) if !p.is_empty() => Ok(DictionaryKind::FromFile(PathBuf::from(p))),
                _ => Err(format!("unknown dictionary {s:?}; expected idct, gauss or file:PATH")),
            },
        }
    }
}

/// Orthonormal DCT-II matrix; entry `(k, j)` is
/// `c(k) cos(π (2j + 1) k / 2n)` with `c(0) = √(1/n)` and `c(k) = √(2/n)`.
pub fn dct_matrix(n: usize) -> Result<DenseMatrix> {
    if n == 0 {
        return Err(Error::invalid("dct_matrix: n must be at least 1"));
    }
    let nf = n as f64;
    let mut d = DenseMatrix::zeros(n, n);
    for k in 0..n {
        let c = if k == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
        for j in 0..n {
            d[(k, j)] = c * (PI * (2 * j + 1) as f64 * k as f64 / (2.0 * nf)).cos();
        }
    }
    Ok(d)
}

pub fn build_dictionary(kind: &DictionaryKind, n: usize, l: usize, seed: RngSeed) -> Result<DenseMatrix> {
    if n == 0 || l == 0 {
        return Err(Error::invalid(format!("dictionary dimensions must be positive, got {n}x{l}")));
    }
    match kind {
        DictionaryKind::IdentityDct => {
            if l != 2 * n {
                return Err(Error::invalid(format!("[I|DCT] needs L = 2N, got N={n}, L={l}")));
            }
            DenseMatrix::identity(n).hcat(&dct_matrix(n)?)
        }
        DictionaryKind::GaussianRandom => gaussian_matrix(n, l, seed),
        DictionaryKind::FromFile(path) => {
            let m = read_matrix_csv(path)?;
            if m.shape() != (n, l) {
                return Err(Error::invalid(format!(
                    "{}: dictionary is {}x{}, expected {n}x{l}",
                    path.display(),
                    m.rows(),
                    m.cols()
                )));
            }
            normalize_columns(&m).map_err(|e| e.context(path.display().to_string()))
        }
    }
}
