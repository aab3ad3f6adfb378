//! Corridor with an unload station `U` (start) and a load station `L`.
//!
//! The agent picks up its load on the step it takes while standing on `L`,
//! and the episode ends with reward 1 when it then arrives back on `U`. The
//! load flag is hidden; observations are the wall signature of the cell.

use super::{
    reachable, Alphabet, Audit, BuildError, Cell, Direction, EnvError, EnvSpec, Environment,
    EpisodeClock, GridMap, Pos, StepOutcome, STEP_LIMIT,
};
use crate::memory::Observation;

pub const WEST: usize = 0;
pub const EAST: usize = 1;

const ACTIONS: [Direction; 2] = [Direction::West, Direction::East];

#[derive(Debug, Clone)]
pub struct LoadUnload {
    map: GridMap,
    unload: Pos,
    load: Pos,
    obs: Vec<Option<Observation>>,
    n_observations: usize,
    reward: f64,
    clock: EpisodeClock,
    pos: Pos,
    loaded: bool,
}

impl LoadUnload {
    pub const DEFAULT_MAP: &'static str = include_str!("../../maps/load_unload.map");

    pub fn new(map: GridMap) -> Result<Self, BuildError> {
        let single = |c: char| match map.find(Cell::Marker(c)).as_slice() {
            [p] => Ok(*p),
            _ => Err(BuildError::Marker(c)),
        };
        let unload = single('U')?;
        let load = single('L')?;
        let alphabet = Alphabet::new(map.open_cells().map(|p| map.wall_signature(p)));
        let obs = map
            .positions()
            .map(|p| {
                map.cell(p)
                    .is_open()
                    .then(|| alphabet.id(&map.wall_signature(p)))
            })
            .collect();
        Ok(LoadUnload {
            unload,
            load,
            obs,
            n_observations: alphabet.len(),
            reward: 1.0,
            clock: EpisodeClock::new(STEP_LIMIT),
            pos: map.start(),
            loaded: false,
            map,
        })
    }

    pub fn with_default_map() -> Self {
        let map = GridMap::parse(Self::DEFAULT_MAP).expect("shipped map parses");
        Self::new(map).expect("shipped map has both stations")
    }

    pub fn with_step_limit(mut self, limit: usize) -> Self {
        self.clock = EpisodeClock::new(limit);
        self
    }

    pub fn position(&self) -> Pos {
        self.pos
    }

    pub fn is_loaded(&self) -> bool {
        self.loaded
    }

    fn observe(&self, pos: Pos) -> Observation {
        self.obs[self.map.index(pos)].expect("agent stands on an open cell")
    }

    /// Next `(position, loaded)` and whether the step ends the episode.
    fn transition(&self, pos: Pos, loaded: bool, action: usize) -> (Pos, bool, bool) {
        let loaded = loaded || pos == self.load;
        let next = self.map.moved(pos, ACTIONS[action]);
        (next, loaded, loaded && next == self.unload)
    }
}

impl Environment for LoadUnload {
    fn name(&self) -> &'static str {
        "load_unload"
    }

    fn spec(&self) -> EnvSpec {
        EnvSpec {
            n_states: 8,
            n_actions: 2,
            n_observations: 3,
            step_limit: self.clock.limit(),
        }
    }

    fn reset(&mut self, _seed: u64) -> Observation {
        self.clock.start();
        self.pos = self.unload;
        self.loaded = false;
        self.observe(self.pos)
    }

    fn step(&mut self, action: usize) -> Result<StepOutcome, EnvError> {
        self.clock.check(action, ACTIONS.len())?;
        let (pos, loaded, terminal) = self.transition(self.pos, self.loaded, action);
        self.pos = pos;
        self.loaded = loaded;
        let reward = if terminal { self.reward } else { 0.0 };
        Ok(self.clock.finish(self.observe(pos), reward, terminal))
    }

    fn audit(&self) -> Audit {
        let states = reachable([(self.unload, false, false)], |&(pos, loaded, done)| {
            if done {
                return Vec::new();
            }
            (0..ACTIONS.len())
                .map(|a| self.transition(pos, loaded, a))
                .collect()
        });
        let mut observed: Vec<Observation> =
            states.iter().map(|&(p, _, _)| self.observe(p)).collect();
        observed.sort();
        observed.dedup();
        debug_assert!(observed.len() <= self.n_observations);
        Audit {
            states: states.len(),
            observations: observed.len(),
        }
    }
}
