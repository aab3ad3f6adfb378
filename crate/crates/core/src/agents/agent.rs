use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::learn::{select_index, update, LearnerParams, ParamError, TransitionSample};
use super::table::{QTable, StateId, TraceTable};
use crate::envs::{EnvError, Environment, StepOutcome};
use crate::memory::{
    compose_action_space, ComposedAction, EstimatedState, Memory, MemoryAction, Observation,
};
use crate::motivation::{intrinsic_reward, FrequencyModel, IntrinsicParams};

/// How the agent's memory is driven.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AgentKind {
    /// The agent picks a push or skip with every move and is paid an
    /// intrinsic reward for what it holds.
    Smm,
    /// Every observation is pushed; the memory is a sliding window.
    FixedWindow,
    /// No memory at all.
    Memoryless,
}

impl AgentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AgentKind::Smm => "smm",
            AgentKind::FixedWindow => "fw",
            AgentKind::Memoryless => "memoryless",
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AgentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "smm" => Ok(AgentKind::Smm),
            "fw" | "fixed_window" => Ok(AgentKind::FixedWindow),
            "memoryless" | "none" => Ok(AgentKind::Memoryless),
            other => Err(format!(
                "unknown agent kind {other:?} (expected smm, fw or memoryless)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EpisodeStats {
    pub steps: usize,
    pub extrinsic_return: f64,
    pub intrinsic_return: f64,
    pub memory_changes: usize,
}

/// Everything that happened in one agent-environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub outcome: StepOutcome,
    pub sample: TransitionSample,
    pub intrinsic: f64,
    pub memory_changed: bool,
}

/// Per-episode agent state: memory, current observation and the action
/// already chosen for it.
#[derive(Debug, Clone)]
pub struct Episode {
    memory: Memory,
    x: EstimatedState,
    state: StateId,
    action: usize,
    done: bool,
}

impl Episode {
    pub fn memory(&self) -> &Memory {
        &self.memory
    }

    pub fn estimated_state(&self) -> &EstimatedState {
        &self.x
    }

    pub fn is_done(&self) -> bool {
        self.done
    }
}

/// Tabular Sarsa(λ) learner over estimated states.
#[derive(Debug, Clone)]
pub struct Agent {
    kind: AgentKind,
    params: LearnerParams,
    capacity: usize,
    intrinsic: IntrinsicParams,
    q: QTable,
    traces: TraceTable,
    freq: FrequencyModel,
    rng: ChaCha8Rng,
}

impl Agent {
    pub fn new(
        kind: AgentKind,
        params: LearnerParams,
        n_env_actions: usize,
        seed: u64,
    ) -> Result<Self, ParamError> {
        params.validate()?;
        if n_env_actions == 0 {
            return Err(ParamError {
                name: "n_env_actions",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        let capacity = match kind {
            AgentKind::Memoryless => 0,
            _ => params.capacity,
        };
        let beta = match kind {
            AgentKind::Smm => params.beta,
            _ => 0.0,
        };
        let single = |m| {
            (0..n_env_actions)
                .map(|a| ComposedAction::new(a, m))
                .collect()
        };
        let actions = match kind {
            AgentKind::Smm if capacity > 0 => {
                compose_action_space(n_env_actions).expect("nonzero action count")
            }
            // with no room in memory both memory actions do the same thing,
            // so they share one table entry
            AgentKind::Smm | AgentKind::FixedWindow => single(MemoryAction::Push),
            AgentKind::Memoryless => single(MemoryAction::Skip),
        };
        let intrinsic = IntrinsicParams::new(beta, capacity).map_err(|_| ParamError {
            name: "beta",
            value: beta,
            reason: "must lie in [0, 1]",
        })?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(0);
        Ok(Agent {
            kind,
            params,
            capacity,
            intrinsic,
            q: QTable::new(actions),
            traces: TraceTable::default(),
            freq: FrequencyModel::new(),
            rng,
        })
    }

    pub fn kind(&self) -> AgentKind {
        self.kind
    }

    pub fn params(&self) -> &LearnerParams {
        &self.params
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn q_table(&self) -> &QTable {
        &self.q
    }

    pub fn traces(&self) -> &TraceTable {
        &self.traces
    }

    pub fn frequencies(&self) -> &FrequencyModel {
        &self.freq
    }

    pub fn actions(&self) -> &[ComposedAction] {
        self.q.actions()
    }

    fn choose(&mut self, state: StateId, epsilon: f64) -> usize {
        select_index(
            Some(self.q.row(state)),
            self.q.n_actions(),
            epsilon,
            &mut self.rng,
        )
    }

    /// Starts an episode from the environment's first observation: clears
    /// traces, empties the memory and picks the first action.
    pub fn begin(&mut self, first: Observation, epsilon: f64) -> Episode {
        self.traces.clear();
        self.freq.record(first);
        let memory = Memory::empty(self.capacity);
        let x = memory.estimate(first);
        let state = self.q.intern(&x);
        let action = self.choose(state, epsilon);
        Episode {
            memory,
            x,
            state,
            action,
            done: false,
        }
    }

    /// Executes the chosen action, updates memory and values, and picks the
    /// next action with `epsilon`.
    pub fn step(
        &mut self,
        env: &mut dyn Environment,
        ep: &mut Episode,
        epsilon: f64,
    ) -> Result<StepReport, EnvError> {
        if ep.done {
            return Err(EnvError::EpisodeOver);
        }
        let composed = self.q.actions()[ep.action];
        let outcome = env.step(composed.env_action)?;

        let current = ep.x.current();
        let next_memory = ep.memory.transition(current, composed.mem_action);
        let memory_changed = next_memory != ep.memory;
        self.freq.record(outcome.observation);
        let x_next = next_memory.estimate(outcome.observation);

        let intrinsic = if self.intrinsic.beta() == 0.0 {
            0.0
        } else {
            intrinsic_reward(&next_memory, &self.freq, &self.intrinsic)
                .expect("model holds at least one observation")
        };
        let reward = outcome.reward + intrinsic;

        let next_state = self.q.intern(&x_next);
        let next_action = self.choose(next_state, epsilon);
        let bootstrap = (!outcome.terminal).then_some((next_state, next_action));
        update(
            &mut self.q,
            &mut self.traces,
            ep.state,
            ep.action,
            reward,
            bootstrap,
            &self.params,
        );

        let sample = TransitionSample {
            x: std::mem::replace(&mut ep.x, x_next.clone()),
            action: composed,
            reward,
            x_next,
            next_action: self.q.actions()[next_action],
            terminal: outcome.terminal,
        };
        ep.memory = next_memory;
        ep.state = next_state;
        ep.action = next_action;
        ep.done = outcome.done();

        Ok(StepReport {
            outcome,
            sample,
            intrinsic,
            memory_changed,
        })
    }

    /// Plays one full episode with a fixed exploration rate.
    pub fn run_episode(
        &mut self,
        env: &mut dyn Environment,
        env_seed: u64,
        epsilon: f64,
    ) -> Result<EpisodeStats, EnvError> {
        let first = env.reset(env_seed);
        let mut ep = self.begin(first, epsilon);
        let mut stats = EpisodeStats::default();
        while !ep.done {
            let report = self.step(env, &mut ep, epsilon)?;
            stats.steps += 1;
            stats.extrinsic_return += report.outcome.reward;
            stats.intrinsic_return += report.intrinsic;
            stats.memory_changes += usize::from(report.memory_changed);
        }
        Ok(stats)
    }
}
