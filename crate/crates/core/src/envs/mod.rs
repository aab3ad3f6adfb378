//! Partially observable environments driven as generative simulators.

use std::collections::{HashMap, HashSet, VecDeque};
use std::hash::Hash;

use thiserror::Error;

use crate::memory::Observation;

pub mod chain;
pub mod load_unload;
pub mod map;
pub mod meuleau;
pub mod tree_maze;

pub use chain::Chain;
pub use load_unload::LoadUnload;
pub use map::{Cell, Direction, GridMap, MapError, MapErrorKind, Pos};
pub use meuleau::{Meuleau, MeuleauRewards, SlipMode};
pub use tree_maze::{TreeMaze, TreeMazeRewards, TreeObservation};

/// Episodes are cut off after this many steps.
pub const STEP_LIMIT: usize = 500;

/// Declared sizes of an environment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnvSpec {
    pub n_states: usize,
    pub n_actions: usize,
    pub n_observations: usize,
    pub step_limit: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub observation: Observation,
    pub reward: f64,
    pub terminal: bool,
    /// The step limit ended the episode.
    pub truncated: bool,
}

impl StepOutcome {
    pub fn done(&self) -> bool {
        self.terminal || self.truncated
    }
}

/// Failure to build an environment from its map or parameters.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BuildError {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("map needs exactly one {0:?} cell")]
    Marker(char),
    #[error("{0}")]
    Param(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnvError {
    #[error("step called before reset")]
    NotReset,
    #[error("step called after the episode ended")]
    EpisodeOver,
    #[error("action {action} out of range for {n_actions} actions")]
    InvalidAction { action: usize, n_actions: usize },
}

/// Result of exhaustively enumerating an environment's reachable states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Audit {
    pub states: usize,
    pub observations: usize,
}

impl Audit {
    pub fn matches(&self, spec: &EnvSpec) -> bool {
        self.states == spec.n_states && self.observations == spec.n_observations
    }
}

pub trait Environment: Send {
    fn name(&self) -> &'static str;

    fn spec(&self) -> EnvSpec;

    /// Puts the environment in its start state. All randomness of the
    /// following episode derives from `seed`.
    fn reset(&mut self, seed: u64) -> Observation;

    fn step(&mut self, action: usize) -> Result<StepOutcome, EnvError>;

    /// Enumerates reachable states and the observations they emit.
    fn audit(&self) -> Audit;
}

/// Tracks the step count and end of the current episode.
#[derive(Debug, Clone, Default)]
pub(crate) struct EpisodeClock {
    steps: usize,
    limit: usize,
    started: bool,
    over: bool,
}

impl EpisodeClock {
    pub(crate) fn new(limit: usize) -> Self {
        EpisodeClock {
            limit,
            ..Default::default()
        }
    }

    pub(crate) fn start(&mut self) {
        self.steps = 0;
        self.started = true;
        self.over = false;
    }

    pub(crate) fn steps(&self) -> usize {
        self.steps
    }

    pub(crate) fn limit(&self) -> usize {
        self.limit
    }

    pub(crate) fn check(&self, action: usize, n_actions: usize) -> Result<(), EnvError> {
        if !self.started {
            return Err(EnvError::NotReset);
        }
        if self.over {
            return Err(EnvError::EpisodeOver);
        }
        if action >= n_actions {
            return Err(EnvError::InvalidAction { action, n_actions });
        }
        Ok(())
    }

    /// Counts one step and builds the outcome, flagging truncation at the
    /// limit unless the step was terminal.
    pub(crate) fn finish(
        &mut self,
        observation: Observation,
        reward: f64,
        terminal: bool,
    ) -> StepOutcome {
        self.steps += 1;
        let truncated = !terminal && self.steps >= self.limit;
        self.over = terminal || truncated;
        StepOutcome {
            observation,
            reward,
            terminal,
            truncated,
        }
    }
}

/// Breadth-first closure of `starts` under `successors`, in discovery order.
pub(crate) fn reachable<S, F, I>(starts: impl IntoIterator<Item = S>, mut successors: F) -> Vec<S>
where
    S: Clone + Eq + Hash,
    F: FnMut(&S) -> I,
    I: IntoIterator<Item = S>,
{
    let mut seen = HashSet::new();
    let mut order = Vec::new();
    let mut queue = VecDeque::new();
    for s in starts {
        if seen.insert(s.clone()) {
            queue.push_back(s);
        }
    }
    while let Some(s) = queue.pop_front() {
        for n in successors(&s) {
            if seen.insert(n.clone()) {
                queue.push_back(n);
            }
        }
        order.push(s);
    }
    order
}

/// Dense observation ids for an ordered set of observation keys.
#[derive(Debug, Clone)]
pub(crate) struct Alphabet<K: Hash + Eq> {
    ids: HashMap<K, Observation>,
}

impl<K: Hash + Eq + Ord + Clone> Alphabet<K> {
    pub(crate) fn new(keys: impl IntoIterator<Item = K>) -> Self {
        let mut keys: Vec<K> = keys.into_iter().collect();
        keys.sort();
        keys.dedup();
        let ids = keys
            .into_iter()
            .enumerate()
            .map(|(i, k)| (k, Observation(i as u16)))
            .collect();
        Alphabet { ids }
    }

    pub(crate) fn len(&self) -> usize {
        self.ids.len()
    }

    /// Panics on a key outside the alphabet; environments only emit keys
    /// they enumerated at construction.
    pub(crate) fn id(&self, key: &K) -> Observation {
        self.ids[key]
    }
}
