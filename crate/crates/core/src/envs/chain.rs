//! Small fully observable chain: move left or right, reward 1 for stepping
//! off the right end into the terminal state.

use super::{Audit, EnvError, EnvSpec, Environment, EpisodeClock, StepOutcome, STEP_LIMIT};
use crate::memory::Observation;

pub const LEFT: usize = 0;
pub const RIGHT: usize = 1;

#[derive(Debug, Clone)]
pub struct Chain {
    n_states: usize,
    clock: EpisodeClock,
    state: usize,
}

impl Chain {
    /// Chain of `n_states` states; the last one is terminal. Panics if
    /// fewer than two states are requested.
    pub fn new(n_states: usize) -> Self {
        assert!(n_states >= 2, "chain needs a start and a terminal state");
        Chain {
            n_states,
            clock: EpisodeClock::new(STEP_LIMIT),
            state: 0,
        }
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    /// Next state and reward for an action; used by planners as the model.
    pub fn model(&self, state: usize, action: usize) -> (usize, f64) {
        let next = match action {
            LEFT => state.saturating_sub(1),
            _ => state + 1,
        };
        let reward = if next == self.n_states - 1 { 1.0 } else { 0.0 };
        (next, reward)
    }

    pub fn is_terminal(&self, state: usize) -> bool {
        state == self.n_states - 1
    }
}

impl Environment for Chain {
    fn name(&self) -> &'static str {
        "chain"
    }

    fn spec(&self) -> EnvSpec {
        EnvSpec {
            n_states: self.n_states,
            n_actions: 2,
            n_observations: self.n_states,
            step_limit: self.clock.limit(),
        }
    }

    fn reset(&mut self, _seed: u64) -> Observation {
        self.clock.start();
        self.state = 0;
        Observation(0)
    }

    fn step(&mut self, action: usize) -> Result<StepOutcome, EnvError> {
        self.clock.check(action, 2)?;
        let (next, reward) = self.model(self.state, action);
        self.state = next;
        Ok(self
            .clock
            .finish(Observation(next as u16), reward, self.is_terminal(next)))
    }

    fn audit(&self) -> Audit {
        Audit {
            states: self.n_states,
            observations: self.n_states,
        }
    }
}
