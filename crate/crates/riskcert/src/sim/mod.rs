//! Stochastic rollout harness: seeded, reproducible trajectory simulation
//! against a small catalog of benchmark environments.
//!
//! An [`Environment`] is an immutable configuration describing a
//! finite-horizon stochastic control problem: an initial-state
//! distribution, a stochastic transition, per-stage and terminal costs,
//! and a scalar trajectory constraint (positive means violated). The
//! harness executes policies against it, producing [`rollout::RolloutRecord`]s
//! whose total cost and constraint value feed the certification machinery.
//!
//! Reproducibility is the central contract. Every rollout derives its
//! randomness from `(base seed, purpose, rollout index)` through a fixed
//! mixing function, so a record is a pure function of the environment
//! configuration, the policy, and its seed — independent of thread count,
//! scheduling, and platform. Distinct purposes (parameter draw, initial
//! state, transitions, policy noise) get distinct streams, and distinct
//! rollout indices are statistically independent, which is what the
//! i.i.d. assumption behind every bound requires.

pub mod distributions;
pub mod env;
pub mod persist;
pub mod policy;
pub mod rollout;
pub(crate) mod rng;

pub use distributions::{MixtureComponent, NamedDistribution};
pub use env::{
    builtin, builtin_environments, load_env_file, parse_env_file, BernoulliTask, CatalogEntry,
    CliffWalk1D, DirectDistribution, EnvFile, EnvSpec, LinearGaussian,
};
pub use persist::{load_rollouts, persist_rollouts};
pub use policy::{load_plan, save_plan, ControlLaw, LinearFeedback, Policy};
pub use rollout::{
    records_to_batch, rollout, run_rollouts, sample_batch, RecordKind, RolloutRecord,
};

use rand_chacha::ChaCha8Rng;

/// A finite-horizon stochastic control problem with scalar cost and
/// constraint. Implementations are immutable configurations: all
/// randomness flows in through the provided generators, never from hidden
/// state, so equal configurations and seeds give equal trajectories.
///
/// Control bounds are metadata for plan samplers (random search, the
/// cross-entropy optimizer); environments receive controls exactly as the
/// policy produced them.
pub trait Environment: Send + Sync {
    /// Stable identifier used in catalogs, configs, and reports.
    fn name(&self) -> &'static str;

    /// Number of control steps `T`; a trajectory has `T + 1` states.
    fn horizon(&self) -> usize;

    /// Length of the control vector consumed per step.
    fn control_dim(&self) -> usize;

    /// Per-dimension `(low, high)` range plan samplers draw controls from.
    fn control_bounds(&self) -> (f64, f64);

    /// Draws the rollout's environment parameters (randomized plant gain
    /// and the like). Called once per rollout from a dedicated stream;
    /// return an empty vector when nothing is randomized.
    fn draw_params(&self, rng: &mut ChaCha8Rng) -> Vec<f64>;

    fn sample_initial_state(&self, params: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64>;

    fn step(
        &self,
        params: &[f64],
        state: &[f64],
        control: &[f64],
        rng: &mut ChaCha8Rng,
    ) -> Vec<f64>;

    fn stage_cost(&self, params: &[f64], t: usize, state: &[f64], control: &[f64]) -> f64;

    fn terminal_cost(&self, params: &[f64], state: &[f64]) -> f64;

    /// Scalar constraint value of the completed trajectory; positive means
    /// violated. Evaluated after the rollout finishes — trajectories are
    /// never truncated or rejected on violation, so constraint statistics
    /// stay unbiased.
    fn constraint(&self, params: &[f64], states: &[Vec<f64>], controls: &[Vec<f64>]) -> f64;

    /// Clip range applied to every stage and terminal cost before
    /// summation, giving the total cost bounded support.
    fn cost_clip(&self) -> Option<(f64, f64)> {
        None
    }

    /// Almost-sure upper bound on the total cost when one is known. The
    /// default is what clipping implies: `T + 1` cost terms, each at most
    /// the clip ceiling.
    fn cost_upper_bound(&self) -> Option<f64> {
        self.cost_clip().map(|(_, hi)| (self.horizon() as f64 + 1.0) * hi)
    }

    /// Almost-sure upper bound on the constraint value when one is known.
    fn constraint_upper_bound(&self) -> Option<f64> {
        None
    }
}
