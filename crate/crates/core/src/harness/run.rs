use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Algorithm, ExperimentConfig, MatrixVariant};
use crate::coherence::{cross_coherence, mutual_coherence, welch_bound};
use crate::dictionary::build_dictionary;
use crate::error::{Error, Result};
use crate::matrix::{gaussian_matrix, DenseMatrix};
use crate::optimize::{optimize_mu_a, optimize_mu_cross, OptimizerReport};
use crate::recovery::{omp, reconstruction_success, BasisPursuit, SparseVector};
use crate::rng::{RngSeed, SeededRng};

const DICTIONARY_TAG: u64 = 0x6469_6374;
const PHI_RAND_TAG: u64 = 0x7068_6930;
const TRIAL_TAG: u64 = 0x7472_6961;

/// Sparse coefficient vector with a uniformly random support of size `k`
/// and i.i.d. standard normal values on it.
pub fn generate_sparse_vector(l: usize, k: usize, seed: RngSeed) -> Result<SparseVector> {
    if k > l {
        return Err(Error::invalid(format!("sparsity {k} exceeds length {l}")));
    }
    let mut rng = SeededRng::new(seed);
    let support = rng.sample_without_replacement(l, k);
    let values = (0..k).map(|_| rng.standard_normal()).collect();
    SparseVector::new(l, support, values)
}

/// Seed of the dictionary drawn for master seed `master` (used by `gauss`).
pub fn dictionary_seed(master: RngSeed) -> RngSeed {
    master.derive(&[DICTIONARY_TAG])
}

/// Seed of the Gaussian `Φ_rand`, which is also the optimizers' start.
pub fn phi_rand_seed(master: RngSeed) -> RngSeed {
    master.derive(&[PHI_RAND_TAG])
}

/// Seed of one recovery trial, a function of its coordinates only.
pub fn trial_seed(master: RngSeed, variant: MatrixVariant, algorithm: Algorithm, k: usize, trial: usize) -> RngSeed {
    master.derive(&[TRIAL_TAG, variant.seed_tag(), algorithm.seed_tag(), k as u64, trial as u64])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceSummary {
    pub mu_a: f64,
    pub mu_cross: f64,
}

#[derive(Debug, Clone)]
pub struct PreparedMatrix {
    pub phi: DenseMatrix,
    /// `ΦΨ`.
    pub sensing: DenseMatrix,
    pub coherence: CoherenceSummary,
    pub report: Option<OptimizerReport>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub master: RngSeed,
    pub dictionary: RngSeed,
    pub phi_rand: RngSeed,
}

#[derive(Debug, Clone)]
pub struct PreparedMatrices {
    pub psi: DenseMatrix,
    pub seeds: SeedRecord,
    pub variants: BTreeMap<MatrixVariant, PreparedMatrix>,
}

fn summarize(phi: &DenseMatrix, psi: &DenseMatrix, report: Option<OptimizerReport>) -> Result<PreparedMatrix> {
    let sensing = phi.matmul(psi)?;
    let coherence = CoherenceSummary {
        mu_a: mutual_coherence(&sensing)?,
        mu_cross: cross_coherence(phi, psi)?,
    };
    Ok(PreparedMatrix {
        phi: phi.clone(),
        sensing,
        coherence,
        report,
    })
}

/// Builds the dictionary and every requested measurement matrix. A single
/// Gaussian draw serves both as the `rand` variant and as the starting point
/// of each optimizer.
pub fn prepare_matrices(cfg: &ExperimentConfig) -> Result<PreparedMatrices> {
    cfg.validate()?;
    let seeds = SeedRecord {
        master: cfg.master_seed,
        dictionary: dictionary_seed(cfg.master_seed),
        phi_rand: phi_rand_seed(cfg.master_seed),
    };
    let psi = build_dictionary(&cfg.dictionary, cfg.n, cfg.l, seeds.dictionary)?;
    let phi_rand = gaussian_matrix(cfg.m, cfg.n, seeds.phi_rand)?;

    let mut variants = BTreeMap::new();
    for variant in cfg.variants() {
        let prepared = match variant {
            MatrixVariant::Rand => summarize(&phi_rand, &psi, None),
            MatrixVariant::MuA => optimize_mu_a(&phi_rand, &psi, &cfg.gram_shrink)
                .and_then(|(phi, report)| summarize(&phi, &psi, Some(report))),
            MatrixVariant::Cross => optimize_mu_cross(&phi_rand, &psi, &cfg.cross_coherence)
                .and_then(|(phi, report)| summarize(&phi, &psi, Some(report))),
        }
        .map_err(|e| e.context(format!("preparing variant {variant}")))?;
        variants.insert(variant, prepared);
    }
    Ok(PreparedMatrices { psi, seeds, variants })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOutcome {
    pub success: bool,
    /// Always true for OMP.
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub variant: MatrixVariant,
    pub algorithm: Algorithm,
    pub sparsity: usize,
    pub trials: usize,
    pub successes: usize,
    pub frequency: f64,
    /// Binomial standard error `√(f(1 − f)/trials)`.
    pub stderr: f64,
    /// Basis Pursuit runs that hit the iteration cap.
    pub nonconverged: usize,
}

impl CurvePoint {
    fn new(variant: MatrixVariant, algorithm: Algorithm, sparsity: usize, trials: usize, successes: usize, nonconverged: usize) -> Self {
        let frequency = successes as f64 / trials as f64;
        CurvePoint {
            variant,
            algorithm,
            sparsity,
            trials,
            successes,
            frequency,
            stderr: (frequency * (1.0 - frequency) / trials as f64).sqrt(),
            nonconverged,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixSummary {
    pub variant: MatrixVariant,
    pub mu_a: f64,
    pub mu_cross: f64,
    pub welch_bound: Option<f64>,
    pub optimizer_initial: Option<f64>,
    pub optimizer_final: Option<f64>,
    pub optimizer_best_index: Option<usize>,
    pub optimizer_iterations: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config: ExperimentConfig,
    pub seeds: SeedRecord,
    pub matrices: Vec<MatrixSummary>,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub points: Vec<CurvePoint>,
    pub provenance: Provenance,
    pub prepared: PreparedMatrices,
}

impl ExperimentResult {
    pub fn point(&self, variant: MatrixVariant, algorithm: Algorithm, sparsity: usize) -> Option<&CurvePoint> {
        self.points
            .iter()
            .find(|p| p.variant == variant && p.algorithm == algorithm && p.sparsity == sparsity)
    }
}

enum Solver {
    Omp,
    Bp(BasisPursuit),
}

fn run_trial(
    cfg: &ExperimentConfig,
    psi: &DenseMatrix,
    sensing: &DenseMatrix,
    solver: &Solver,
    seed: RngSeed,
    k: usize,
) -> Result<TrialOutcome> {
    let alpha = generate_sparse_vector(cfg.l, k, seed)?;
    let y = sensing.matvec(&alpha.to_dense())?;
    let (estimate, converged) = match solver {
        Solver::Omp => (omp(sensing, &y, k, cfg.omp_residual_tol)?.estimate, true),
        Solver::Bp(bp) => {
            let sol = bp.solve(&y)?;
            (sol.estimate, sol.converged)
        }
    };
    Ok(TrialOutcome {
        success: reconstruction_success(psi, &alpha, &estimate)?,
        converged,
    })
}

/// Runs every trial of the study on the current rayon pool.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let prepared = prepare_matrices(cfg)?;
    let welch = welch_bound(cfg.m, cfg.l).ok();
    let mut points = Vec::new();

    for (&variant, matrix) in &prepared.variants {
        for algorithm in cfg.algorithm_list() {
            let solver = match algorithm {
                Algorithm::Omp => Solver::Omp,
                Algorithm::Bp => Solver::Bp(BasisPursuit::new(&matrix.sensing, cfg.basis_pursuit.clone())?),
            };
            for &k in &cfg.sparsity_levels {
                let (successes, nonconverged) = (0..cfg.trials_per_level)
                    .into_par_iter()
                    .map(|t| {
                        let seed = trial_seed(cfg.master_seed, variant, algorithm, k, t);
                        run_trial(cfg, &prepared.psi, &matrix.sensing, &solver, seed, k).map_err(|e| {
                            e.context(format!(
                                "trial variant={variant} algorithm={algorithm} sparsity={k} trial={t} seed={}",
                                seed.0
                            ))
                        })
                    })
                    .try_fold(
                        || (0usize, 0usize),
                        |(s, n), outcome| outcome.map(|o| (s + o.success as usize, n + (!o.converged) as usize)),
                    )
                    .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
                points.push(CurvePoint::new(variant, algorithm, k, cfg.trials_per_level, successes, nonconverged));
            }
        }
    }

    let matrices = prepared
        .variants
        .iter()
        .map(|(&variant, pm)| MatrixSummary {
            variant,
            mu_a: pm.coherence.mu_a,
            mu_cross: pm.coherence.mu_cross,
            welch_bound: welch,
            optimizer_initial: pm.report.as_ref().map(OptimizerReport::initial),
            optimizer_final: pm.report.as_ref().map(|r| r.final_coherence),
            optimizer_best_index: pm.report.as_ref().map(|r| r.best_index),
            optimizer_iterations: pm.report.as_ref().map(|r| r.objective.len() - 1),
        })
        .collect();

    Ok(ExperimentResult {
        points,
        provenance: Provenance {
            config: cfg.clone(),
            seeds: prepared.seeds,
            matrices,
        },
        prepared,
    })
}
