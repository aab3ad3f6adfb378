//! ε-greedy selection and the Sarsa(λ) update.

use rand::Rng;
use thiserror::Error;

use super::table::{QTable, StateId, TraceTable};
use crate::memory::{ComposedAction, EstimatedState};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid learner parameter {name} = {value}: {reason}")]
pub struct ParamError {
    pub name: &'static str,
    pub value: f64,
    pub reason: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnerParams {
    pub alpha: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    pub beta: f64,
    pub capacity: usize,
}

impl Default for LearnerParams {
    fn default() -> Self {
        LearnerParams {
            alpha: 0.01,
            lambda: 0.9,
            gamma: 0.9,
            epsilon_start: 0.2,
            epsilon_end: 0.001,
            beta: 1.0,
            capacity: 1,
        }
    }
}

impl LearnerParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        let err = |name, value, reason| {
            Err(ParamError {
                name,
                value,
                reason,
            })
        };
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return err("alpha", self.alpha, "must be positive");
        }
        for (name, value) in [
            ("lambda", self.lambda),
            ("gamma", self.gamma),
            ("epsilon_start", self.epsilon_start),
            ("epsilon_end", self.epsilon_end),
            ("beta", self.beta),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return err(name, value, "must lie in [0, 1]");
            }
        }
        Ok(())
    }

    /// Exploration rate for an episode: linear from `epsilon_start` at the
    /// first episode to `epsilon_end` at the last, fixed within an episode.
    pub fn epsilon(&self, episode: usize, n_episodes: usize) -> f64 {
        if n_episodes <= 1 {
            return self.epsilon_start;
        }
        let frac = episode.min(n_episodes - 1) as f64 / (n_episodes - 1) as f64;
        self.epsilon_start + (self.epsilon_end - self.epsilon_start) * frac
    }
}

/// Index of an ε-greedy choice over `row`, ties broken uniformly. A missing
/// row counts as all zeros.
///
/// Always draws one uniform for the exploration test, then one index draw
/// when exploring or when more than one action ties for the maximum.
pub fn select_index<R: Rng + ?Sized>(
    row: Option<&[f64]>,
    n_actions: usize,
    epsilon: f64,
    rng: &mut R,
) -> usize {
    assert!(n_actions > 0, "cannot select from an empty action set");
    if rng.gen::<f64>() < epsilon {
        return rng.gen_range(0..n_actions);
    }
    let Some(row) = row else {
        return rng.gen_range(0..n_actions);
    };
    let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ties = row.iter().filter(|&&v| v == best).count();
    if ties == 1 {
        return row.iter().position(|&v| v == best).unwrap();
    }
    let pick = rng.gen_range(0..ties);
    row.iter()
        .enumerate()
        .filter(|(_, &v)| v == best)
        .nth(pick)
        .map(|(i, _)| i)
        .unwrap()
}

/// ε-greedy choice among the table's actions at estimated state `x`.
pub fn select_action<R: Rng + ?Sized>(
    q: &QTable,
    x: &EstimatedState,
    epsilon: f64,
    rng: &mut R,
) -> ComposedAction {
    let row = q.lookup(x).map(|id| q.row(id));
    q.actions()[select_index(row, q.n_actions(), epsilon, rng)]
}

/// One experienced transition in estimated-state space.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionSample {
    pub x: EstimatedState,
    pub action: ComposedAction,
    /// Extrinsic plus intrinsic reward.
    pub reward: f64,
    pub x_next: EstimatedState,
    pub next_action: ComposedAction,
    pub terminal: bool,
}

/// Applies one Sarsa(λ) step with replacing traces and returns the TD error.
///
/// The visited pair's trace is set to one and every other trace decays by
/// `gamma * lambda`; then every traced pair moves by `alpha * trace * delta`.
/// Terminal transitions bootstrap from zero.
pub fn sarsa_update(
    q: &mut QTable,
    traces: &mut TraceTable,
    sample: &TransitionSample,
    params: &LearnerParams,
) -> f64 {
    let action = q
        .action_index(&sample.action)
        .expect("action belongs to the table");
    let next_action = q
        .action_index(&sample.next_action)
        .expect("action belongs to the table");
    let state = q.intern(&sample.x);
    let next = (!sample.terminal).then(|| (q.intern(&sample.x_next), next_action));
    update(q, traces, state, action, sample.reward, next, params)
}

pub(crate) fn update(
    q: &mut QTable,
    traces: &mut TraceTable,
    state: StateId,
    action: usize,
    reward: f64,
    next: Option<(StateId, usize)>,
    params: &LearnerParams,
) -> f64 {
    let bootstrap = next.map_or(0.0, |(s, a)| q.value(s, a));
    let delta = reward + params.gamma * bootstrap - q.value(state, action);
    traces.visit(state, action, params.gamma * params.lambda);
    if delta != 0.0 {
        let step = params.alpha * delta;
        for t in traces.iter() {
            q.add(t.state, t.action, step * t.value);
        }
    }
    delta
}
