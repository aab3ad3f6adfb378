//! Tabular Sarsa(λ) agents that manage a bounded external memory of past
//! observations, with an intrinsic reward for keeping rare observations.

pub mod agents;
pub mod cli;
pub mod envs;
pub mod harness;
pub mod memory;
pub mod motivation;

pub use memory::{
    compose_action_space, ComposedAction, EstimatedState, Memory, MemoryAction, Observation,
};
