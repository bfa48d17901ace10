use serde::{Deserialize, Serialize};

/// Which solution path the driver should take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathChoice {
    /// Commuting eigenproblems when `m = n+1` and a nonsingular combination exists,
    /// simultaneous pencils otherwise.
    Auto,
    /// Always use the simultaneous deflated pencils.
    SimultaneousPencils,
}

/// Tolerances, seeds and budgets shared by every solver layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Relative singular-value threshold for rank decisions.
    pub rank_tol: f64,
    /// Threshold for residual verification of emitted solutions.
    pub residual_tol: f64,
    /// Relative error allowed when certifying `z = x ⊗ x`.
    pub decomposable_tol: f64,
    /// Projective sine distance under which two eigenvalues are the same.
    pub dedup_tol: f64,
    pub seed: u64,
    /// Random trials in the nonsingular-combination search (after the canonical basis).
    pub trials: usize,
    /// Largest acceptable condition number of the combined Γ.
    pub cond_threshold: f64,
    /// Starts for the decomposable-vector search in spans of dimension ≥ 2.
    pub search_starts: usize,
    pub path: PathChoice,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            rank_tol: 1e-8,
            residual_tol: 1e-8,
            decomposable_tol: 1e-6,
            dedup_tol: 1e-6,
            seed: 0x5eed,
            trials: 64,
            cond_threshold: 1e10,
            search_starts: 48,
            path: PathChoice::Auto,
        }
    }
}
