//! Action-value and eligibility-trace tables keyed by estimated state.

use std::collections::HashMap;
use std::io::{self, Write};

use crate::memory::{ComposedAction, EstimatedState};

/// Dense handle for an estimated state interned in a [`QTable`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId(u32);

/// Q values for every (estimated state, action) pair, zero until written.
///
/// Rows are materialised when a state is first interned; reading a state
/// that was never interned yields zeros.
#[derive(Debug, Clone)]
pub struct QTable {
    actions: Vec<ComposedAction>,
    index: HashMap<EstimatedState, StateId>,
    states: Vec<EstimatedState>,
    values: Vec<f64>,
}

impl QTable {
    pub fn new(actions: Vec<ComposedAction>) -> Self {
        QTable {
            actions,
            index: HashMap::new(),
            states: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn actions(&self) -> &[ComposedAction] {
        &self.actions
    }

    pub fn n_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn action_index(&self, action: &ComposedAction) -> Option<usize> {
        self.actions.iter().position(|a| a == action)
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn lookup(&self, x: &EstimatedState) -> Option<StateId> {
        self.index.get(x).copied()
    }

    pub fn intern(&mut self, x: &EstimatedState) -> StateId {
        if let Some(&id) = self.index.get(x) {
            return id;
        }
        let id = StateId(self.states.len() as u32);
        self.index.insert(x.clone(), id);
        self.states.push(x.clone());
        self.values
            .extend(std::iter::repeat_n(0.0, self.actions.len()));
        id
    }

    pub fn state(&self, id: StateId) -> &EstimatedState {
        &self.states[id.0 as usize]
    }

    pub fn row(&self, id: StateId) -> &[f64] {
        let n = self.actions.len();
        let start = id.0 as usize * n;
        &self.values[start..start + n]
    }

    pub fn value(&self, id: StateId, action: usize) -> f64 {
        self.values[id.0 as usize * self.actions.len() + action]
    }

    pub(crate) fn add(&mut self, id: StateId, action: usize, delta: f64) {
        self.values[id.0 as usize * self.actions.len() + action] += delta;
    }

    /// Q(x, a) by value; absent entries read as zero.
    pub fn get(&self, x: &EstimatedState, action: &ComposedAction) -> f64 {
        match (self.lookup(x), self.action_index(action)) {
            (Some(id), Some(a)) => self.value(id, a),
            _ => 0.0,
        }
    }

    /// One CSV row per materialised pair:
    /// `estimated_state,env_action,mem_action,q_value`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "estimated_state,env_action,mem_action,q_value")?;
        for (i, x) in self.states.iter().enumerate() {
            for (a, action) in self.actions.iter().enumerate() {
                let q = self.values[i * self.actions.len() + a];
                writeln!(
                    out,
                    "\"{x}\",{},{},{q}",
                    action.env_action, action.mem_action
                )?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trace {
    pub state: StateId,
    pub action: usize,
    pub value: f64,
}

/// Replacing eligibility traces. Entries that decay below the floor are
/// dropped.
#[derive(Debug, Clone)]
pub struct TraceTable {
    entries: Vec<Trace>,
    floor: f64,
}

impl Default for TraceTable {
    fn default() -> Self {
        TraceTable::new(TraceTable::DEFAULT_FLOOR)
    }
}

impl TraceTable {
    pub const DEFAULT_FLOOR: f64 = 1e-8;

    pub fn new(floor: f64) -> Self {
        TraceTable {
            entries: Vec::new(),
            floor,
        }
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, state: StateId, action: usize) -> f64 {
        self.entries
            .iter()
            .find(|t| t.state == state && t.action == action)
            .map_or(0.0, |t| t.value)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Trace> {
        self.entries.iter()
    }

    /// Sets the visited pair to one and scales every other trace by `decay`.
    pub fn visit(&mut self, state: StateId, action: usize, decay: f64) {
        let floor = self.floor;
        let mut found = false;
        self.entries.retain_mut(|t| {
            if t.state == state && t.action == action {
                t.value = 1.0;
                found = true;
            } else {
                t.value *= decay;
            }
            t.value >= floor
        });
        if !found {
            self.entries.push(Trace {
                state,
                action,
                value: 1.0,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::memory::{compose_action_space, Memory, Observation};

    fn x(id: u16) -> EstimatedState {
        Memory::empty(1).estimate(Observation(id))
    }

    #[test]
    fn absent_entries_read_zero() {
        let q = QTable::new(compose_action_space(2).unwrap());
        assert_eq!(q.get(&x(3), &q.actions()[1]), 0.0);
        assert_eq!(q.n_states(), 0);
    }

    #[test]
    fn intern_is_stable() {
        let mut q = QTable::new(compose_action_space(2).unwrap());
        let a = q.intern(&x(1));
        let b = q.intern(&x(2));
        assert_ne!(a, b);
        assert_eq!(q.intern(&x(1)), a);
        assert_eq!(q.row(b), &[0.0; 4]);
        q.add(b, 3, 0.5);
        assert_eq!(q.get(&x(2), &q.actions()[3].clone()), 0.5);
    }

    #[test]
    fn replacing_traces() {
        let mut q = QTable::new(compose_action_space(1).unwrap());
        let s = q.intern(&x(0));
        let mut tr = TraceTable::default();
        tr.visit(s, 0, 0.5);
        tr.visit(s, 1, 0.5);
        tr.visit(s, 0, 0.5);
        assert_eq!(tr.get(s, 0), 1.0);
        assert_eq!(tr.get(s, 1), 0.5);
        assert_eq!(tr.len(), 2);
    }

    #[test]
    fn zero_decay_prunes_everything_else() {
        let mut q = QTable::new(compose_action_space(1).unwrap());
        let s = q.intern(&x(0));
        let t = q.intern(&x(1));
        let mut tr = TraceTable::default();
        tr.visit(s, 0, 0.0);
        tr.visit(t, 1, 0.0);
        assert_eq!(tr.len(), 1);
        assert_eq!(tr.get(t, 1), 1.0);
    }

    #[test]
    fn csv_dump() {
        let mut q = QTable::new(compose_action_space(1).unwrap());
        let s = q.intern(
            &Memory::from_entries(vec![Observation(2)], 1)
                .unwrap()
                .estimate(Observation(0)),
        );
        q.add(s, 1, -0.25);
        let mut buf = Vec::new();
        q.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "estimated_state,env_action,mem_action,q_value\n\"[2|0]\",0,push,0\n\"[2|0]\",0,skip,-0.25\n"
        );
    }
}
