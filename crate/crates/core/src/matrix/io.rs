//! Headerless CSV persistence: one matrix row per line, entries written with
//! 17 significant digits so every `f64` round-trips exactly.

use std::fmt::Write as _;
use std::path::Path;

use super::DenseMatrix;
use crate::error::{Error, Result};
use crate::fsutil::write_atomic;

pub fn format_matrix_csv(m: &DenseMatrix) -> String {
    let mut out = String::with_capacity(m.rows() * m.cols() * 25);
    for i in 0..m.rows() {
        for (j, v) in m.row(i).iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            write!(out, "{v:.16e}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn parse_matrix_csv(text: &str, path: &Path) -> Result<DenseMatrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|field| {
                let field = field.trim();
                field.parse::<f64>().map_err(|e| Error::Parse {
                    path: path.to_path_buf(),
                    line: lineno + 1,
                    message: format!("bad number {field:?}: {e}"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: lineno + 1,
                    message: format!("expected {} fields, found {}", first.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: "no data rows".into(),
        });
    }
    DenseMatrix::from_rows(&rows).map_err(|e| e.context(path.display().to_string()))
}

pub fn read_matrix_csv(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix_csv(&text, path)
}

pub fn write_matrix_csv(m: &DenseMatrix, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), format_matrix_csv(m).as_bytes())
}

/// Reads a vector stored either as a single column or a single row.
pub fn read_vector_csv(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let m = read_matrix_csv(path)?;
    match m.shape() {
        (_, 1) => Ok(m.column(0)),
        (1, _) => Ok(m.row(0).to_vec()),
        (r, c) => Err(Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: format!("expected a vector, found a {r}x{c} matrix"),
        }),
    }
}

/// Writes a vector as a single column.
pub fn write_vector_csv(v: &[f64], path: impl AsRef<Path>) -> Result<()> {
    let m = DenseMatrix::new(v.len(), 1, v.to_vec())?;
    write_matrix_csv(&m, path)
}
