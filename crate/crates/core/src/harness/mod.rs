//! Monte Carlo recovery experiments.
//!
//! An experiment prepares one dictionary and one set of measurement
//! matrices, then runs independent recovery trials for every combination of
//! matrix variant, algorithm, sparsity level and trial index. Each trial
//! draws its signal from a seed derived from the master seed and the trial
//! coordinates, so results do not depend on scheduling or thread count.

mod config;
mod emit;
mod run;

pub use config::{Algorithm, ExperimentConfig, MatrixVariant};
pub use emit::{emit_results, parse_curves_csv, CURVES_FILE, PROVENANCE_FILE};
pub use run::{
    dictionary_seed, generate_sparse_vector, phi_rand_seed, prepare_matrices, run_experiment, trial_seed, CoherenceSummary, CurvePoint,
    ExperimentResult, MatrixSummary, PreparedMatrices, PreparedMatrix, Provenance, SeedRecord, TrialOutcome,
};
