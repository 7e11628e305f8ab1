use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dictionary::DictionaryKind;
use crate::error::{Error, Result};
use crate::optimize::{CrossCoherenceConfig, GramShrinkConfig};
use crate::recovery::BpConfig;
use crate::rng::RngSeed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixVariant {
    /// Column-normalized Gaussian.
    Rand,
    /// Optimized for mutual column coherence of `ΦΨ`.
    #[serde(rename = "mua")]
    MuA,
    /// Optimized for cross coherence of `Φ` rows with `Ψ` atoms.
    Cross,
}

impl MatrixVariant {
    pub const ALL: [MatrixVariant; 3] = [MatrixVariant::Rand, MatrixVariant::MuA, MatrixVariant::Cross];

    pub fn as_str(self) -> &'static str {
        match self {
            MatrixVariant::Rand => "rand",
            MatrixVariant::MuA => "mua",
            MatrixVariant::Cross => "cross",
        }
    }

    pub(crate) fn seed_tag(self) -> u64 {
        match self {
            MatrixVariant::Rand => 0,
            MatrixVariant::MuA => 1,
            MatrixVariant::Cross => 2,
        }
    }
}

impl fmt::Display for MatrixVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for MatrixVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        MatrixVariant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| format!("unknown matrix variant {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Omp,
    Bp,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Omp => "omp",
            Algorithm::Bp => "bp",
        }
    }

    pub(crate) fn seed_tag(self) -> u64 {
        match self {
            Algorithm::Omp => 0,
            Algorithm::Bp => 1,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "omp" => Ok(Algorithm::Omp),
            "bp" => Ok(Algorithm::Bp),
            _ => Err(format!("unknown algorithm {s:?}")),
        }
    }
}

/// Full description of a recovery study. Serialized field-for-field as the
/// JSON config of the `experiment` subcommand; omitted fields take the
/// defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub m: usize,
    pub n: usize,
    pub l: usize,
    pub dictionary: DictionaryKind,
    pub matrix_variants: Vec<MatrixVariant>,
    pub algorithms: Vec<Algorithm>,
    pub sparsity_levels: Vec<usize>,
    pub trials_per_level: usize,
    pub master_seed: RngSeed,
    pub gram_shrink: GramShrinkConfig,
    pub cross_coherence: CrossCoherenceConfig,
    pub basis_pursuit: BpConfig,
    /// Secondary OMP stop; the primary stop is the planted sparsity.
    pub omp_residual_tol: f64,
    /// Also write per-variant coherence distributions.
    pub emit_distributions: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            m: 30,
            n: 200,
            l: 400,
            dictionary: DictionaryKind::IdentityDct,
            matrix_variants: MatrixVariant::ALL.to_vec(),
            algorithms: vec![Algorithm::Omp, Algorithm::Bp],
            sparsity_levels: vec![2, 4, 6, 8, 10, 12],
            trials_per_level: 2000,
            master_seed: RngSeed(0),
            gram_shrink: GramShrinkConfig::default(),
            cross_coherence: CrossCoherenceConfig::default(),
            basis_pursuit: BpConfig::default(),
            omp_residual_tol: 1e-7,
            emit_distributions: false,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: ExperimentConfig = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let (m, n, l) = (self.m, self.n, self.l);
        if m == 0 || n == 0 || l == 0 {
            return Err(Error::invalid(format!("dimensions must be positive, got m={m}, n={n}, l={l}")));
        }
        if self.dictionary == DictionaryKind::IdentityDct && l != 2 * n {
            return Err(Error::invalid(format!("identity_dct needs l = 2n, got n={n}, l={l}")));
        }
        if self.matrix_variants.is_empty() {
            return Err(Error::invalid("matrix_variants is empty"));
        }
        if self.algorithms.is_empty() {
            return Err(Error::invalid("algorithms is empty"));
        }
        if self.trials_per_level == 0 {
            return Err(Error::invalid("trials_per_level must be at least 1"));
        }
        if let Some(&k) = self.sparsity_levels.iter().find(|&&k| k > m || k > l) {
            return Err(Error::invalid(format!("sparsity level {k} exceeds m={m} or l={l}")));
        }
        if self.matrix_variants.contains(&MatrixVariant::MuA) {
            if !(m <= n && n <= l) {
                return Err(Error::invalid(format!("mua variant needs m <= n <= l, got m={m}, n={n}, l={l}")));
            }
            self.gram_shrink.validate()?;
        }
        if self.matrix_variants.contains(&MatrixVariant::Cross) {
            self.cross_coherence.validate()?;
        }
        if self.algorithms.contains(&Algorithm::Bp) {
            self.basis_pursuit.validate()?;
        }
        if !(self.omp_residual_tol >= 0.0) {
            return Err(Error::invalid("omp_residual_tol must be non-negative"));
        }
        Ok(())
    }

    /// Variants in canonical order without duplicates.
    pub fn variants(&self) -> Vec<MatrixVariant> {
        let mut v = self.matrix_variants.clone();
        v.sort();
        v.dedup();
        v
    }

    pub fn algorithm_list(&self) -> Vec<Algorithm> {
        let mut a = self.algorithms.clone();
        a.sort();
        a.dedup();
        a
    }
}
