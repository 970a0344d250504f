//! Policies: fixed open-loop plans and seeded closed-loop control laws.

use crate::error::{Error, Result};
use rand_chacha::ChaCha8Rng;
use std::path::Path;
use std::sync::Arc;

/// A state-feedback control law. Implementations must be deterministic
/// functions of `(t, state)` and the provided generator — any exploration
/// noise comes from `rng`, never from hidden state.
pub trait ControlLaw: Send + Sync {
    fn control(&self, t: usize, state: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64>;
}

/// How controls are produced during a rollout.
#[derive(Clone)]
pub enum Policy {
    /// A fixed plan: one control vector per step, length equal to the
    /// environment horizon.
    OpenLoop(Vec<Vec<f64>>),
    /// A feedback law queried at every step.
    ClosedLoop(Arc<dyn ControlLaw>),
}

impl Policy {
    /// Open-loop plan from per-step control vectors.
    pub fn open_loop(plan: Vec<Vec<f64>>) -> Self {
        Policy::OpenLoop(plan)
    }

    /// The all-zeros plan.
    pub fn zero(horizon: usize, control_dim: usize) -> Self {
        Policy::OpenLoop(vec![vec![0.0; control_dim]; horizon])
    }

    /// The plan length for open-loop policies; closed-loop laws adapt to
    /// any horizon.
    pub fn horizon(&self) -> Option<usize> {
        match self {
            Policy::OpenLoop(plan) => Some(plan.len()),
            Policy::ClosedLoop(_) => None,
        }
    }

    pub(crate) fn control(&self, t: usize, state: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
        match self {
            Policy::OpenLoop(plan) => plan[t].clone(),
            Policy::ClosedLoop(law) => law.control(t, state, rng),
        }
    }
}

impl std::fmt::Debug for Policy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Policy::OpenLoop(plan) => write!(f, "Policy::OpenLoop({} steps)", plan.len()),
            Policy::ClosedLoop(_) => write!(f, "Policy::ClosedLoop"),
        }
    }
}

/// Linear state feedback `u = -gain . state`, the simplest useful
/// closed-loop law (and the shape LQ-optimal controllers take on the
/// linear benchmark).
#[derive(Debug, Clone)]
pub struct LinearFeedback {
    pub gain: Vec<f64>,
}

impl ControlLaw for LinearFeedback {
    fn control(&self, _t: usize, state: &[f64], _rng: &mut ChaCha8Rng) -> Vec<f64> {
        let u = -self.gain.iter().zip(state).map(|(k, x)| k * x).sum::<f64>();
        vec![u]
    }
}

/// Writes an open-loop plan as a JSON array of per-step control vectors.
pub fn save_plan(path: &Path, plan: &[Vec<f64>]) -> Result<()> {
    let json = serde_json::to_string_pretty(plan)
        .map_err(|e| Error::invalid(format!("plan not serializable: {e}")))?;
    std::fs::write(path, json + "\n")?;
    Ok(())
}

/// Reads a plan written by [`save_plan`], validating shape and finiteness.
pub fn load_plan(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path)?;
    let plan: Vec<Vec<f64>> = serde_json::from_str(&text).map_err(|e| {
        Error::invalid(format!("plan file {} is not a JSON control array: {e}", path.display()))
    })?;
    if plan.is_empty() {
        return Err(Error::invalid(format!("plan file {} holds an empty plan", path.display())));
    }
    let dim = plan[0].len();
    for (t, step) in plan.iter().enumerate() {
        if step.len() != dim {
            return Err(Error::invalid(format!(
                "plan step {t} has {} controls, expected {dim}",
                step.len()
            )));
        }
        if step.iter().any(|u| !u.is_finite()) {
            return Err(Error::invalid(format!("plan step {t} holds a non-finite control")));
        }
    }
    Ok(plan)
}
