//! Measurement-matrix adaptation for sparse recovery.
//!
//! Given a fixed dictionary `Ψ` (N×L), this crate designs measurement
//! matrices `Φ` (M×N) that lower either the mutual column coherence of the
//! sensing matrix `A = ΦΨ` or the cross coherence between the rows of `Φ`
//! and the atoms of `Ψ`, and measures how each choice affects exact sparse
//! recovery with Orthogonal Matching Pursuit and Basis Pursuit.

pub mod cli;
pub mod coherence;
pub mod dictionary;
pub mod error;
mod fsutil;
pub mod harness;
pub mod matrix;
pub mod optimize;
pub mod recovery;
pub mod rng;

pub use error::{Error, Result};
pub use matrix::DenseMatrix;
pub use rng::RngSeed;
