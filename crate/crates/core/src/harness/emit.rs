use std::path::{Path, PathBuf};

use super::config::{Algorithm, MatrixVariant};
use super::run::{CurvePoint, ExperimentResult};
use crate::coherence::{coherence_distribution_of_a, reduced_coherence_distribution};
use crate::error::{Error, Result};
use crate::fsutil::write_atomic;

pub const CURVES_FILE: &str = "curves.csv";
pub const PROVENANCE_FILE: &str = "provenance.json";
const CURVES_HEADER: &str = "variant,algorithm,sparsity,trials,successes,frequency,stderr";

fn curves_csv(points: &[CurvePoint]) -> String {
    let mut out = String::from(CURVES_HEADER);
    out.push('\n');
    for p in points {
        // `{}` on f64 prints the shortest string that parses back to the same value.
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            p.variant, p.algorithm, p.sparsity, p.trials, p.successes, p.frequency, p.stderr
        ));
    }
    out
}

/// Writes `curves.csv`, `provenance.json` and, when the config asks for
/// them, `dist_<variant>_a.csv` and `dist_<variant>_reduced.csv` into `dir`.
/// Returns the paths written.
pub fn emit_results(r: &ExperimentResult, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();

    let curves = dir.join(CURVES_FILE);
    write_atomic(&curves, curves_csv(&r.points).as_bytes())?;
    written.push(curves);

    let provenance = dir.join(PROVENANCE_FILE);
    let json = serde_json::to_string_pretty(&r.provenance).map_err(|source| Error::Json {
        path: provenance.clone(),
        source,
    })?;
    write_atomic(&provenance, json.as_bytes())?;
    written.push(provenance);

    if r.provenance.config.emit_distributions {
        for (variant, pm) in &r.prepared.variants {
            let path = dir.join(format!("dist_{variant}_a.csv"));
            write_atomic(&path, coherence_distribution_of_a(&pm.sensing)?.to_csv().as_bytes())?;
            written.push(path);
            let path = dir.join(format!("dist_{variant}_reduced.csv"));
            write_atomic(&path, reduced_coherence_distribution(&pm.phi, &r.prepared.psi)?.to_csv().as_bytes())?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Reads back a `curves.csv`. The `nonconverged` count is not part of the
/// file and comes back as zero.
pub fn parse_curves_csv(text: &str) -> Result<Vec<CurvePoint>> {
    let path = PathBuf::from(CURVES_FILE);
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.clone(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CURVES_HEADER => {}
        _ => return Err(parse_err(1, "missing header".into())),
    }
    let mut points = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(parse_err(i + 1, format!("expected 7 fields, found {}", f.len())));
        }
        let num = |s: &str| s.parse::<usize>().map_err(|e| parse_err(i + 1, e.to_string()));
        let real = |s: &str| s.parse::<f64>().map_err(|e| parse_err(i + 1, e.to_string()));
        points.push(CurvePoint {
            variant: f[0].parse::<MatrixVariant>().map_err(|e| parse_err(i + 1, e))?,
            algorithm: f[1].parse::<Algorithm>().map_err(|e| parse_err(i + 1, e))?,
            sparsity: num(f[2])?,
            trials: num(f[3])?,
            successes: num(f[4])?,
            frequency: real(f[5])?,
            stderr: real(f[6])?,
            nonconverged: 0,
        });
    }
    Ok(points)
}
