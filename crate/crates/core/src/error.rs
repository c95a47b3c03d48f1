use thiserror::Error;

/// Errors produced by the simulator core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("assignment covers {got} nodes, network has {expected}")]
    AssignmentSize { expected: usize, got: usize },

    #[error("exhaustive search over {states} states exceeds bound {bound}")]
    SearchBound { states: u128, bound: u128 },

    #[error("space error: {0}")]
    Space(String),

    #[error("operator is not Hermitian (deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("operator does not commute with the triplet projectors (deviation {deviation:e})")]
    NotSymmetric { deviation: f64 },

    #[error("dimension {dim} exceeds bound {bound}")]
    DimensionBound { dim: usize, bound: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("time {t} lies outside the field grid [{start}, {end}]")]
    OutsideGrid { t: f64, start: f64, end: f64 },

    #[error("step guard violated: |H| dt = {value:.4} >= 0.1")]
    StepGuard { value: f64 },

    #[error("invalid state: {0}")]
    State(String),

    #[error("projection annihilated the state{}", slice.map(|s| format!(" at slice {s}")).unwrap_or_default())]
    Annihilated { slice: Option<usize> },

    #[error("rate estimation needs strictly positive values (found {value:e} at index {index})")]
    NonPositive { index: usize, value: f64 },

    #[error("invariant `{check}` violated: {detail}")]
    Invariant { check: &'static str, detail: String },

    #[error("empty kernel")]
    EmptyKernel,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
