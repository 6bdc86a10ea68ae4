use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid channel instance: {0}")]
    InvalidInstance(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("transformed vector is not invertible (vᵗv = {norm_sq} ≥ 1)")]
    NonInvertible { norm_sq: f64 },

    #[error("invalid constraint set: {0}")]
    InvalidConstraints(String),

    #[error("objective is unbounded over the constraint set")]
    Unbounded,

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("invalid bracket [{lo}, {hi}]")]
    InvalidBracket { lo: f64, hi: f64 },

    #[error("polynomial coefficients do not have the required sign pattern")]
    BadSignPattern,

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("invalid η = {0}; must be positive and finite")]
    InvalidEta(f64),

    #[error("eavesdropper channel is not degraded at relay {relay}")]
    DegradednessViolated { relay: usize },

    #[error("invalid scaling coefficient α = {0}; must lie in (0, 1)")]
    InvalidAlpha(f64),

    #[error("instance is not a scaled eavesdropper channel")]
    NotScaled,

    #[error("instance is not a symmetric network")]
    NotSymmetric,

    #[error("grid of {evaluations} points exceeds the evaluation cap {cap}")]
    BudgetExceeded { evaluations: u128, cap: u128 },

    #[error("bound ordering violated for instance {index} at P_s = {p_s}: {detail}")]
    SandwichViolation {
        index: u64,
        p_s: f64,
        detail: String,
    },

    #[error("instance {index} failed at P_s = {p_s}: {source}\ninstance: {instance}")]
    InstanceFailed {
        index: u64,
        p_s: f64,
        /// JSON dump of the failing instance.
        instance: String,
        source: Box<Error>,
    },

    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
}

impl Error {
    /// Input is valid but the requested method does not apply to it.
    pub fn is_method_mismatch(&self) -> bool {
        matches!(
            self,
            Error::NotScaled
                | Error::NotSymmetric
                | Error::DegradednessViolated { .. }
                | Error::InvalidAlpha(_)
        )
    }
}
