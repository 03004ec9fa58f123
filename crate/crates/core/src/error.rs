use thiserror::Error;

pub type Result<T> = std::result::Result<T, StafError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StafError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("at least one center is required")]
    NoCenters,

    #[error("Gram matrix is ill-conditioned (condition number {condition:e} exceeds cap {cap:e})")]
    IllConditioned { condition: f64, cap: f64 },

    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("leading principal minor D_{order} = {value:e} is not above tolerance")]
    DegenerateMinor { order: usize, value: f64 },

    #[error("weights ~ m^|alpha| overflow: |alpha| ln m = {log_magnitude:.1} exceeds budget {budget:.1}")]
    WeightOverflow { log_magnitude: f64, budget: f64 },

    #[error("integer overflow computing binomial coefficient C({n}, {k})")]
    BinomialOverflow { n: u64, k: u64 },

    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },

    #[error("run diverged at step {step}: {what} norm {norm:e} exceeds cap {cap:e}")]
    Diverged {
        step: usize,
        what: &'static str,
        norm: f64,
        cap: f64,
    },

    #[error("aborted at step {step}: {source}")]
    Aborted {
        step: usize,
        #[source]
        source: Box<StafError>,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(StafError::DimensionMismatch { expected, found })
    }
}
