//! Observations, the bounded agent-controlled memory, composed actions and
//! estimated states.

use std::fmt;

use thiserror::Error;

/// Index into an environment's observation alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Observation(pub u16);

impl Observation {
    pub fn id(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Observation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Operation the agent applies to its memory each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MemoryAction {
    Push,
    Skip,
}

impl MemoryAction {
    pub const ALL: [MemoryAction; 2] = [MemoryAction::Push, MemoryAction::Skip];

    pub fn as_str(self) -> &'static str {
        match self {
            MemoryAction::Push => "push",
            MemoryAction::Skip => "skip",
        }
    }
}

impl fmt::Display for MemoryAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Ordered sequence of past observations, oldest first, holding at most
/// `capacity` entries.
///
/// Memories are values: [`Memory::transition`] returns a new memory and
/// leaves the receiver untouched.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Memory {
    entries: Vec<Observation>,
    capacity: usize,
}

impl Memory {
    pub fn empty(capacity: usize) -> Self {
        Memory {
            entries: Vec::with_capacity(capacity),
            capacity,
        }
    }

    /// Builds a memory from explicit entries. Returns `None` if there are
    /// more entries than the capacity allows.
    pub fn from_entries(entries: Vec<Observation>, capacity: usize) -> Option<Self> {
        (entries.len() <= capacity).then_some(Memory { entries, capacity })
    }

    pub fn entries(&self) -> &[Observation] {
        &self.entries
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.entries.len() == self.capacity
    }

    /// Memory after applying `action` with current observation `obs`.
    ///
    /// `Skip` leaves the memory as it is. `Push` appends `obs`, evicting the
    /// oldest entry first when the memory is full. With zero capacity a push
    /// is a no-op.
    pub fn transition(&self, obs: Observation, action: MemoryAction) -> Memory {
        match action {
            MemoryAction::Skip => self.clone(),
            MemoryAction::Push if self.capacity == 0 => self.clone(),
            MemoryAction::Push => {
                let skip = usize::from(self.is_full());
                let mut entries = Vec::with_capacity(self.capacity);
                entries.extend_from_slice(&self.entries[skip..]);
                entries.push(obs);
                Memory {
                    entries,
                    capacity: self.capacity,
                }
            }
        }
    }

    /// Estimated state formed by this memory followed by `current`.
    pub fn estimate(&self, current: Observation) -> EstimatedState {
        EstimatedState {
            memory: self.entries.clone(),
            current,
        }
    }
}

/// Memory contents concatenated with the current observation. This is the
/// key the value table is indexed by.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EstimatedState {
    memory: Vec<Observation>,
    current: Observation,
}

impl EstimatedState {
    pub fn new(memory: Vec<Observation>, current: Observation) -> Self {
        EstimatedState { memory, current }
    }

    pub fn memory_part(&self) -> &[Observation] {
        &self.memory
    }

    pub fn current(&self) -> Observation {
        self.current
    }

    /// Flat sequence of observation ids, memory first.
    pub fn sequence(&self) -> Vec<Observation> {
        let mut seq = self.memory.clone();
        seq.push(self.current);
        seq
    }
}

/// Canonical text form `[i,j|k]`.
impl fmt::Display for EstimatedState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, o) in self.memory.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{o}")?;
        }
        write!(f, "|{}]", self.current)
    }
}

/// An environment action paired with a memory action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ComposedAction {
    pub env_action: usize,
    pub mem_action: MemoryAction,
}

impl ComposedAction {
    pub fn new(env_action: usize, mem_action: MemoryAction) -> Self {
        ComposedAction {
            env_action,
            mem_action,
        }
    }
}

impl fmt::Display for ComposedAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.env_action, self.mem_action)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("action space needs at least one environment action")]
pub struct EmptyActionSpace;

/// All (environment action, memory action) pairs, ordered by environment
/// action and then `Push` before `Skip`.
pub fn compose_action_space(n_env_actions: usize) -> Result<Vec<ComposedAction>, EmptyActionSpace> {
    if n_env_actions == 0 {
        return Err(EmptyActionSpace);
    }
    Ok((0..n_env_actions)
        .flat_map(|a| MemoryAction::ALL.map(|m| ComposedAction::new(a, m)))
        .collect())
}
