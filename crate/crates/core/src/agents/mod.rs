//! Tabular Sarsa(λ) over estimated states with three memory regimes.

mod agent;
mod learn;
mod table;

pub use agent::{Agent, AgentKind, Episode, EpisodeStats, StepReport};
pub use learn::{
    sarsa_update, select_action, select_index, LearnerParams, ParamError, TransitionSample,
};
pub use table::{QTable, StateId, Trace, TraceTable};
