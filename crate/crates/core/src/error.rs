use thiserror::Error;

/// Errors raised by divkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("indeterminate extended-real operation: {0}")]
    Indeterminate(&'static str),

    #[error("{context} produced -inf, which the superlinear bound rules out")]
    UnboundedBelow { context: &'static str },

    #[error("invalid alpha parameter {0}: must be finite and not 0 or 1")]
    InvalidAlpha(f64),

    #[error("unknown generator name `{0}` (expected kl, hellinger, total_variation, pearson_chi2 or alpha:<value>)")]
    UnknownGenerator(String),

    #[error("finiteness domain of `{0}` is empty")]
    EmptyDomain(String),

    #[error("{what} did not converge after {iterations} iterations (last change {last_delta:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        last_delta: f64,
        best: Option<f64>,
    },

    #[error("atom space must contain at least one atom")]
    EmptySpace,

    #[error("duplicate atom label `{0}`")]
    DuplicateLabel(String),

    #[error("space mismatch: expected {expected} atoms, found {found}")]
    SpaceMismatch { expected: usize, found: usize },

    #[error("atom spaces have the same size but different labels")]
    DifferentLabels,

    #[error("weight {value} at atom {index} is not finite")]
    NonFinite { index: usize, value: f64 },

    #[error("weight {value} at atom {index} is negative")]
    NegativeWeight { index: usize, value: f64 },

    #[error("measure charges atom {index} where the reference measure vanishes")]
    NotAbsolutelyContinuous { index: usize },

    #[error("invalid partition of unity: {0}")]
    InvalidPartition(String),

    #[error("Kullback-Leibler divergence requires a nonnegative second measure (atom {index} has weight {value})")]
    SignedKl { index: usize, value: f64 },

    #[error("map entry {value} at atom {index} is outside 0..{size}")]
    MapOutOfRange { index: usize, value: usize, size: usize },

    #[error("measure is not invariant: max residual {residual:e} exceeds {tol:e}")]
    NotInvariant { residual: f64, tol: f64 },

    #[error("measure must have total mass 1, found {0}")]
    NotProbability(f64),

    #[error("homological identity violated: residual {0:e}")]
    HomologicalIdentity(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
