//! Measurement-matrix optimizers.
//!
//! [`optimize_mu_a`] lowers the mutual column coherence of `A = ΦΨ` by
//! Gram-matrix shrinkage; [`optimize_mu_cross`] lowers the cross coherence
//! between the rows of `Φ` and the atoms of `Ψ` by projected descent on a
//! smoothed maximum. Both return the best iterate seen, never the last one.

mod cross;
mod gram_shrink;

pub use cross::{cross_objective, cross_objective_gradient, optimize_mu_cross, CrossCoherenceConfig};
pub use gram_shrink::{optimize_mu_a, shrink_gram, EigenSolver, GramShrinkConfig, ShrinkThreshold};

use serde::{Deserialize, Serialize};

/// Convergence telemetry shared by both optimizers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerReport {
    /// Objective after each iteration; entry 0 is the starting matrix.
    pub objective: Vec<f64>,
    /// Index into `objective` of the returned iterate.
    pub best_index: usize,
    /// Objective value of the returned iterate.
    pub final_coherence: f64,
    /// Set when the dictionary had to be column-normalized internally.
    #[serde(default)]
    pub psi_renormalized: bool,
}

impl OptimizerReport {
    pub fn initial(&self) -> f64 {
        self.objective[0]
    }
}

/// Tracks the best iterate of a minimization.
struct BestTracker<T> {
    objective: Vec<f64>,
    best_index: usize,
    best: T,
}

impl<T: Clone> BestTracker<T> {
    fn new(start: T, value: f64) -> Self {
        BestTracker {
            objective: vec![value],
            best_index: 0,
            best: start,
        }
    }

    fn record(&mut self, candidate: &T, value: f64) {
        self.objective.push(value);
        if value < self.objective[self.best_index] {
            self.best_index = self.objective.len() - 1;
            self.best = candidate.clone();
        }
    }

    fn finish(self, psi_renormalized: bool) -> (T, OptimizerReport) {
        let final_coherence = self.objective[self.best_index];
        (
            self.best,
            OptimizerReport {
                objective: self.objective,
                best_index: self.best_index,
                final_coherence,
                psi_renormalized,
            },
        )
    }
}
