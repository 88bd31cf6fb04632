use thiserror::Error;

use crate::solver::BetaSolution;

/// Errors produced by the inference engines and diversity measures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("observed data has zero probability under every parameter value")]
    ZeroEvidence,

    #[error("outcome {outcome} is not in the model (it has {n_outcomes} outcomes)")]
    InvalidOutcome { outcome: usize, n_outcomes: usize },

    #[error("target {target} is outside the attainable interval ({lo}, {hi})")]
    UnattainableTarget { target: f64, lo: f64, hi: f64 },

    #[error("constraint function is constant ({value}) on the support but target is {target}")]
    DegenerateConstraint { value: f64, target: f64 },

    #[error("solver stalled: constraint has zero variance across the bracket")]
    StalledAtDegenerate,

    #[error("solver did not converge in {} iterations (residual {})", .best.iterations, .best.residual)]
    MaxIterations { best: BetaSolution },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("log-domain overflow evaluating the tilted partition function")]
    NumericalOverflow,

    #[error("grid quadrature supports 2 or 3 species, got {0}")]
    UnsupportedDimension(usize),

    #[error("sample is empty (total count is zero)")]
    EmptySample,

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
