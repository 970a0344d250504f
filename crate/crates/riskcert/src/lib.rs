//! Finite-sample certification of closed-loop policy risk from Monte Carlo
//! rollouts.
//!
//! The crate turns a batch of i.i.d. rollout costs into one-sided,
//! distribution-free confidence certificates: upper bounds on the
//! value-at-risk, expectation, and CVaR of the cost, and on the probability
//! of constraint violation. On top of the raw bounds it provides
//! statistical hypothesis tests against thresholds, multi-policy selection
//! with family-wise error control, sensitivity reporting and robustified
//! bounds under bounded test-time distribution shift, a deterministic
//! rollout simulator with a small catalog of benchmark environments, and a
//! cross-entropy policy synthesizer — all wired together behind the
//! `riskcert` command-line tool.
//!
//! Module map:
//!
//! * [`stats`] — binomial CDF, its inverse in the success probability, the
//!   one-sided empirical-CDF band width, and the sorted sample batch type.
//! * [`bounds`] — the four certificates plus two naive baselines.
//! * [`verify`] — threshold tests, multiple-testing corrections, and
//!   lowest-bound policy selection.
//! * [`shift`] — certificate degradation under distribution shift:
//!   sensitivity of the effective confidence, robustified bounds, and a
//!   one-sided empirical-CDF distance between batches.
//! * [`sim`] — seeded rollout execution, benchmark environments, and
//!   rollout persistence.
//! * [`synth`] — cross-entropy search over open-loop plans.
//! * [`cli`] — the command-line surface.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod shift;
pub mod sim;
pub mod stats;
pub mod synth;
pub mod verify;

pub use bounds::{BoundResult, Measure, RiskSpec};
pub use error::{Error, Result};
pub use stats::SampleBatch;
