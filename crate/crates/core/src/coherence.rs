//! Coherence criteria and pairwise-coherence distributions.
//!
//! Every pairwise value is computed as `|⟨u, v⟩| / (‖u‖₂ ‖v‖₂)` with the
//! inner product and both norms accumulated in index order, so the maxima
//! reported here agree bit-for-bit with a naive double loop.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{dot, DenseMatrix};

/// Default histogram bin width for CLI output.
pub const DEFAULT_BIN_WIDTH: f64 = 0.01;

/// Origin of the two vectors in a coherence pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairLabel {
    /// Two rows of `Φ` (columns of `Φᵀ`).
    PhiPhi,
    /// A row of `Φ` against an atom of `Ψ`.
    PhiPsi,
    /// Two atoms of `Ψ`.
    PsiPsi,
    /// Two columns of `A = ΦΨ`.
    ACol,
}

impl PairLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            PairLabel::PhiPhi => "phi_phi",
            PairLabel::PhiPsi => "phi_psi",
            PairLabel::PsiPsi => "psi_psi",
            PairLabel::ACol => "a_a",
        }
    }
}

impl fmt::Display for PairLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Multiset of absolute normalized inner products, each tagged with the
/// origin of its pair.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CoherenceDistribution {
    values: Vec<f64>,
    labels: Vec<PairLabel>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub center: f64,
    pub count: usize,
}

impl CoherenceDistribution {
    fn push(&mut self, value: f64, label: PairLabel) {
        self.values.push(value);
        self.labels.push(label);
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> &[PairLabel] {
        &self.labels
    }

    pub fn iter(&self) -> impl Iterator<Item = (PairLabel, f64)> + '_ {
        self.labels.iter().copied().zip(self.values.iter().copied())
    }

    pub fn count(&self, label: PairLabel) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    pub fn max(&self) -> Option<f64> {
        self.values.iter().copied().reduce(f64::max)
    }

    pub fn max_for(&self, label: PairLabel) -> Option<f64> {
        self.iter().filter(|&(l, _)| l == label).map(|(_, v)| v).reduce(f64::max)
    }

    pub fn mean(&self) -> Option<f64> {
        (!self.is_empty()).then(|| self.values.iter().sum::<f64>() / self.len() as f64)
    }

    /// Nearest-rank quantile, `q` in `[0, 1]`.
    pub fn quantile(&self, q: f64) -> Option<f64> {
        if self.is_empty() || !(0.0..=1.0).contains(&q) {
            return None;
        }
        let mut sorted = self.values.clone();
        sorted.sort_by(f64::total_cmp);
        let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
        Some(sorted[rank - 1])
    }

    /// Equal-width bins covering `[0, 1]`. A value `v` lands in bin
    /// `floor(v / bin_width)`; values at or slightly above 1 go to the last bin.
    pub fn histogram(&self, bin_width: f64) -> Result<Vec<HistogramBin>> {
        histogram(self, bin_width)
    }

    /// `pair_label,value` CSV with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("pair_label,value\n");
        for (label, value) in self.iter() {
            out.push_str(&format!("{label},{value:.16e}\n"));
        }
        out
    }
}

pub fn histogram(d: &CoherenceDistribution, bin_width: f64) -> Result<Vec<HistogramBin>> {
    if !(bin_width > 0.0 && bin_width <= 1.0) {
        return Err(Error::invalid(format!("bin width must be in (0, 1], got {bin_width}")));
    }
    let bins = ((1.0 / bin_width) - 1e-9).ceil().max(1.0) as usize;
    let mut counts = vec![0usize; bins];
    for &v in &d.values {
        let idx = ((v / bin_width).floor().max(0.0) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| HistogramBin {
            center: (i as f64 + 0.5) * bin_width,
            count,
        })
        .collect())
}

pub fn histogram_csv(bins: &[HistogramBin]) -> String {
    let mut out = String::from("bin_center,count\n");
    for b in bins {
        out.push_str(&format!("{:.6},{}\n", b.center, b.count));
    }
    out
}

fn vector_norms(vectors: &[Vec<f64>]) -> Vec<f64> {
    vectors.iter().map(|v| dot(v, v).sqrt()).collect()
}

fn pair_value(u: &[f64], v: &[f64], nu: f64, nv: f64) -> f64 {
    dot(u, v).abs() / (nu * nv)
}

fn nonzero_columns(a: &DenseMatrix, op: &'static str) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let cols = a.columns();
    let norms = vector_norms(&cols);
    if let Some(index) = norms.iter().position(|&n| n == 0.0) {
        return Err(Error::ZeroColumn { op, index });
    }
    Ok((cols, norms))
}

fn nonzero_rows(a: &DenseMatrix, op: &'static str) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let rows: Vec<Vec<f64>> = (0..a.rows()).map(|i| a.row(i).to_vec()).collect();
    let norms = vector_norms(&rows);
    if let Some(index) = norms.iter().position(|&n| n == 0.0) {
        return Err(Error::ZeroRow { op, index });
    }
    Ok((rows, norms))
}

/// `μ(A)`: the largest absolute normalized inner product between two
/// distinct columns.
pub fn mutual_coherence(a: &DenseMatrix) -> Result<f64> {
    if a.cols() < 2 {
        return Err(Error::invalid("mutual_coherence needs at least two columns"));
    }
    let (cols, norms) = nonzero_columns(a, "mutual_coherence")?;
    let mut best = 0.0f64;
    for i in 0..cols.len() {
        for j in i + 1..cols.len() {
            best = best.max(pair_value(&cols[i], &cols[j], norms[i], norms[j]));
        }
    }
    Ok(best)
}

/// `μ(Φ, Ψ)`: the largest absolute normalized inner product between a row
/// of `Φ` and a column of `Ψ`.
pub fn cross_coherence(phi: &DenseMatrix, psi: &DenseMatrix) -> Result<f64> {
    check_conformant(phi, psi, "cross_coherence")?;
    let (rows, row_norms) = nonzero_rows(phi, "cross_coherence")?;
    let (cols, col_norms) = nonzero_columns(psi, "cross_coherence")?;
    let mut best = 0.0f64;
    for (r, nr) in rows.iter().zip(&row_norms) {
        for (c, nc) in cols.iter().zip(&col_norms) {
            best = best.max(pair_value(r, c, *nr, *nc));
        }
    }
    Ok(best)
}

fn check_conformant(phi: &DenseMatrix, psi: &DenseMatrix, op: &'static str) -> Result<()> {
    if phi.cols() != psi.rows() {
        return Err(Error::DimensionMismatch {
            op,
            left_rows: phi.rows(),
            left_cols: phi.cols(),
            right_rows: psi.rows(),
            right_cols: psi.cols(),
        });
    }
    Ok(())
}

/// All `L(L−1)/2` off-diagonal normalized Gram magnitudes of `A`, labelled
/// [`PairLabel::ACol`].
pub fn coherence_distribution_of_a(a: &DenseMatrix) -> Result<CoherenceDistribution> {
    if a.cols() < 2 {
        return Err(Error::invalid("coherence distribution needs at least two columns"));
    }
    let (cols, norms) = nonzero_columns(a, "coherence_distribution_of_a")?;
    let mut d = CoherenceDistribution::default();
    for i in 0..cols.len() {
        for j in i + 1..cols.len() {
            d.push(pair_value(&cols[i], &cols[j], norms[i], norms[j]), PairLabel::ACol);
        }
    }
    Ok(d)
}

/// Pairwise coherence over the columns of `[Φᵀ | Ψ]`, leaving out the pairs
/// where both columns are atoms of `Ψ`. Produces `M(M−1)/2` Φ-row pairs
/// followed by `M·L` cross pairs.
pub fn reduced_coherence_distribution(phi: &DenseMatrix, psi: &DenseMatrix) -> Result<CoherenceDistribution> {
    check_conformant(phi, psi, "reduced_coherence_distribution")?;
    let (rows, row_norms) = nonzero_rows(phi, "reduced_coherence_distribution")?;
    let (cols, col_norms) = nonzero_columns(psi, "reduced_coherence_distribution")?;
    let mut d = CoherenceDistribution::default();
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            d.push(pair_value(&rows[i], &rows[j], row_norms[i], row_norms[j]), PairLabel::PhiPhi);
        }
    }
    for (r, nr) in rows.iter().zip(&row_norms) {
        for (c, nc) in cols.iter().zip(&col_norms) {
            d.push(pair_value(r, c, *nr, *nc), PairLabel::PhiPsi);
        }
    }
    Ok(d)
}

/// Welch lower bound `√((L − M) / (M (L − 1)))` on the mutual coherence of
/// `L` unit vectors in dimension `M`.
pub fn welch_bound(m: usize, l: usize) -> Result<f64> {
    if m == 0 || l <= m {
        return Err(Error::invalid(format!("welch_bound needs l > m >= 1, got m={m}, l={l}")));
    }
    let (m, l) = (m as f64, l as f64);
    Ok(((l - m) / (m * (l - 1.0))).sqrt())
}
