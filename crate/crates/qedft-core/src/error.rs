//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum CoreError {
    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: &'static str, message: String },

    #[error("mode {mode} is aliased on a grid with {points} points (need |n| < N_g/2)")]
    AliasedMode { mode: i32, points: usize },

    #[error("mode coefficients break conjugation symmetry at mode {mode} (defect {defect:.3e})")]
    ConjugationSymmetry { mode: i32, defect: f64 },

    #[error("composite dimension {dim} exceeds the configured budget {budget}")]
    DimensionBudget { dim: usize, budget: usize },

    #[error("eigensolver did not converge: best residual {residual:.3e} after {iterations} iterations")]
    EigensolveFailed { residual: f64, iterations: usize },

    #[error("ground state is degenerate (gap {gap:.3e}); result is inconclusive")]
    DegenerateGroundState { gap: f64 },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("injectivity scan aborted: sample {sample} failed to solve ({message})")]
    ScanAborted { sample: usize, message: String },
}

pub type Result<T> = std::result::Result<T, CoreError>;
