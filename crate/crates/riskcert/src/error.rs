//! Crate-wide error type.
//!
//! Every fallible operation in the library returns [`Result`]. Variants are
//! deliberately specific — callers (the CLI, the FFI layer, selection over
//! many policies) route on them: an infeasible guarantee is a different
//! outcome than a malformed input, and both are different from an I/O
//! failure.

use thiserror::Error;

/// Errors produced by the certification library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument failed validation (out-of-range probability, empty batch,
    /// non-finite value, malformed config, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The requested guarantee cannot be produced from `n` samples; at least
    /// `required` are needed.
    #[error("insufficient samples: n = {n} but the requested guarantee needs n >= {required}")]
    InsufficientSamples { n: usize, required: usize },

    /// The operation needs a per-sample upper bound (e.g. the clipped-cost
    /// ceiling) but the batch does not carry one.
    #[error("sample batch carries no upper bound, which {context} requires")]
    MissingUpperBound { context: &'static str },

    /// A shift tolerance exceeds the largest value for which the requested
    /// degradation formula is valid.
    #[error("shift tolerance alpha = {alpha} exceeds the largest admissible value {max_alpha}")]
    AlphaTooLarge { alpha: f64, max_alpha: f64 },

    /// Robustifying a quantile bound pushed the quantile level to 1 or above.
    #[error("quantile level {tau} plus shift tolerance {alpha} reaches or exceeds 1")]
    InvalidQuantile { tau: f64, alpha: f64 },

    /// A per-policy certificate failed while selecting over a policy set.
    #[error("policy {index}: {source}")]
    PolicyBound {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    /// A per-policy certificate degenerated to the trivial upper bound during
    /// selection and the caller did not opt into that.
    #[error(
        "policy {index} produced a defaulted (trivial upper-bound) certificate; \
         enable allow_defaulted to permit degenerate selection"
    )]
    DefaultedBound { index: usize },

    /// A policy supplies a different number of steps than the environment runs.
    #[error("horizon mismatch: policy provides {policy} control steps, environment runs {environment}")]
    HorizonMismatch { policy: usize, environment: usize },

    /// A rollout produced a non-finite state, cost, or constraint value.
    #[error("non-finite {what} at step {step} of rollout seeded {seed}")]
    NonFiniteRollout { seed: u64, step: usize, what: &'static str },

    /// A persisted record could not be decoded. `line` is 1-based.
    #[error("line {line}: {message}")]
    MalformedRecord { line: usize, message: String },

    /// A configuration file was syntactically valid but semantically wrong.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Shorthand used by argument validators.
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Stable machine-readable code, used by the CLI's JSON error reports and
    /// mirrored by the FFI status enum.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid_argument",
            Error::InsufficientSamples { .. } => "insufficient_samples",
            Error::MissingUpperBound { .. } => "missing_upper_bound",
            Error::AlphaTooLarge { .. } => "alpha_too_large",
            Error::InvalidQuantile { .. } => "invalid_quantile",
            Error::PolicyBound { source, .. } => source.code(),
            Error::DefaultedBound { .. } => "defaulted_bound",
            Error::HorizonMismatch { .. } => "horizon_mismatch",
            Error::NonFiniteRollout { .. } => "non_finite_rollout",
            Error::MalformedRecord { .. } => "malformed_record",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }
}
