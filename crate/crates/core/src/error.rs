use thiserror::Error;

/// Errors surfaced by oracles, solvers, and drivers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The budgeted oracle tally reached its limit; no further calls are issued.
    #[error("oracle budget of {budget} calls exhausted")]
    BudgetExhausted { budget: u64 },

    /// The objective (or its gradient) returned NaN or an infinity. The
    /// smoothness assumption makes this a caller bug, so the run aborts with a
    /// diagnostic instead of treating the value as +inf.
    #[error("oracle returned a non-finite value")]
    NonfiniteValue,

    #[error("problem exposes no gradient oracle")]
    NoGradientOracle,

    #[error("problem exposes no Hessian oracle")]
    NoHessianOracle,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The inexact subproblem solver hit its iteration cap before certifying
    /// the acceptance conditions. Callers treat this like a halt and enlarge
    /// the regularization parameter.
    #[error("subproblem solver stalled after {iters} iterations")]
    SubproblemStalled { iters: usize },

    #[error("composite term has no prox operator")]
    ProxUnavailable,

    #[error("starting point lies outside the composite domain")]
    InfeasibleStart,

    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}
