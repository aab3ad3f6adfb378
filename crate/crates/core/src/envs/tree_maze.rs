//! Binary tree of corridors with two T-junctions and four leaves.
//!
//! The agent starts at the west end of the root corridor and moves east.
//! At the east end of the root and of each depth-one corridor it turns north
//! or south into a child corridor. The east end of a depth-two corridor is a
//! leaf, which ends the episode. One leaf, drawn uniformly on reset, is the
//! goal.
//!
//! The agent sees where it is inside the current corridor (west end, middle,
//! east end), how many turns it has taken, and a hint: on the first
//! observation of an episode the hint is the turn required at the first
//! junction, on the second observation the turn required at the second
//! junction, and afterwards it is blank. Arriving at a leaf shows whether it
//! was the goal.
//!
//! With the default corridor length of 5 there are 7 corridors of 5 cells
//! and 4 possible goals, giving 140 states, and 14 distinct observations:
//!
//! | observation                      | ids |
//! |----------------------------------|-----|
//! | west end, 0 turns, hint N / S / - | 3   |
//! | middle, 0 turns, hint N / S / -   | 3   |
//! | east end, 0 turns                | 1   |
//! | west end / middle / east end, 1 turn | 3 |
//! | west end / middle, 2 turns       | 2   |
//! | leaf, goal / not goal            | 2   |

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    reachable, Alphabet, Audit, BuildError, EnvError, EnvSpec, Environment, EpisodeClock,
    StepOutcome, STEP_LIMIT,
};
use crate::memory::Observation;

pub const NORTH: usize = 0;
pub const EAST: usize = 1;
pub const SOUTH: usize = 2;

const DEPTH: u8 = 2;
const N_LEAVES: u8 = 1 << DEPTH;
/// Observations carrying a hint, counted from the first one.
const HINTED_OBSERVATIONS: usize = DEPTH as usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Turn {
    North,
    South,
}

impl Turn {
    fn from_bit(bit: u8) -> Turn {
        if bit == 0 {
            Turn::North
        } else {
            Turn::South
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    WestEnd,
    Middle,
    EastEnd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TreeObservation {
    Corridor {
        place: Place,
        turns: u8,
        hint: Option<Turn>,
    },
    Leaf {
        goal: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeMazeRewards {
    pub goal: f64,
    pub wrong_leaf: f64,
    pub step: f64,
}

impl Default for TreeMazeRewards {
    fn default() -> Self {
        TreeMazeRewards {
            goal: 10.0,
            wrong_leaf: -0.1,
            step: -0.01,
        }
    }
}

/// Cell of the maze: corridor depth, branch index at that depth (bits of the
/// turns taken, first turn most significant) and position along the corridor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Cell {
    depth: u8,
    branch: u8,
    pos: u8,
}

impl Cell {
    const START: Cell = Cell {
        depth: 0,
        branch: 0,
        pos: 0,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Config {
    cell: Cell,
    goal: u8,
    /// Observations emitted so far, saturating once hints stop.
    phase: u8,
}

#[derive(Debug, Clone)]
pub struct TreeMaze {
    corridor_len: u8,
    rewards: TreeMazeRewards,
    alphabet: Alphabet<TreeObservation>,
    clock: EpisodeClock,
    cell: Cell,
    goal: u8,
}

impl TreeMaze {
    pub const DEFAULT_CORRIDOR_LEN: u8 = 5;

    pub fn new(corridor_len: u8, rewards: TreeMazeRewards) -> Result<Self, BuildError> {
        if corridor_len < 3 {
            return Err(BuildError::Param(format!(
                "corridor length must be at least 3, got {corridor_len}"
            )));
        }
        let mut maze = TreeMaze {
            corridor_len,
            rewards,
            alphabet: Alphabet::new([]),
            clock: EpisodeClock::new(STEP_LIMIT),
            cell: Cell::START,
            goal: 0,
        };
        let keys: Vec<TreeObservation> = maze.configs().iter().map(|c| maze.key(c)).collect();
        maze.alphabet = Alphabet::new(keys);
        Ok(maze)
    }

    pub fn with_step_limit(mut self, limit: usize) -> Self {
        self.clock = EpisodeClock::new(limit);
        self
    }

    pub fn goal_leaf(&self) -> u8 {
        self.goal
    }

    /// Turns leading to the goal leaf, first junction first.
    pub fn goal_turns(&self) -> [Turn; 2] {
        [
            Turn::from_bit(self.goal >> 1),
            Turn::from_bit(self.goal & 1),
        ]
    }

    pub fn encode(&self, key: &TreeObservation) -> Observation {
        self.alphabet.id(key)
    }

    fn is_leaf(&self, cell: Cell) -> bool {
        cell.depth == DEPTH && cell.pos == self.corridor_len - 1
    }

    fn key(&self, c: &Config) -> TreeObservation {
        if self.is_leaf(c.cell) {
            return TreeObservation::Leaf {
                goal: c.cell.branch == c.goal,
            };
        }
        let place = match c.cell.pos {
            0 => Place::WestEnd,
            p if p == self.corridor_len - 1 => Place::EastEnd,
            _ => Place::Middle,
        };
        let hint = (usize::from(c.phase) < HINTED_OBSERVATIONS).then(|| {
            let shift = DEPTH - 1 - c.phase;
            Turn::from_bit((c.goal >> shift) & 1)
        });
        TreeObservation::Corridor {
            place,
            turns: c.cell.depth,
            hint,
        }
    }

    fn moved(&self, cell: Cell, action: usize) -> Cell {
        let at_east_end = cell.pos == self.corridor_len - 1;
        match action {
            EAST if !at_east_end => Cell {
                pos: cell.pos + 1,
                ..cell
            },
            NORTH | SOUTH if at_east_end && cell.depth < DEPTH => Cell {
                depth: cell.depth + 1,
                branch: cell.branch * 2 + u8::from(action == SOUTH),
                pos: 0,
            },
            _ => cell,
        }
    }

    fn successor(&self, c: &Config, action: usize) -> Config {
        Config {
            cell: self.moved(c.cell, action),
            goal: c.goal,
            phase: (c.phase + 1).min(HINTED_OBSERVATIONS as u8),
        }
    }

    fn configs(&self) -> Vec<Config> {
        let starts = (0..N_LEAVES).map(|goal| Config {
            cell: Cell::START,
            goal,
            phase: 0,
        });
        reachable(starts, |c| {
            if self.is_leaf(c.cell) {
                Vec::new()
            } else {
                (0..3).map(|a| self.successor(c, a)).collect()
            }
        })
    }

    fn current(&self) -> Config {
        Config {
            cell: self.cell,
            goal: self.goal,
            phase: self.clock.steps().min(HINTED_OBSERVATIONS) as u8,
        }
    }
}

impl Default for TreeMaze {
    fn default() -> Self {
        TreeMaze::new(Self::DEFAULT_CORRIDOR_LEN, TreeMazeRewards::default())
            .expect("default parameters are valid")
    }
}

impl Environment for TreeMaze {
    fn name(&self) -> &'static str {
        "tree_maze"
    }

    fn spec(&self) -> EnvSpec {
        EnvSpec {
            n_states: ((2usize << DEPTH) - 1)
                * usize::from(self.corridor_len)
                * usize::from(N_LEAVES),
            n_actions: 3,
            n_observations: 14,
            step_limit: self.clock.limit(),
        }
    }

    fn reset(&mut self, seed: u64) -> Observation {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.goal = rng.gen_range(0..N_LEAVES);
        self.cell = Cell::START;
        self.clock.start();
        self.encode(&self.key(&self.current()))
    }

    fn step(&mut self, action: usize) -> Result<StepOutcome, EnvError> {
        self.clock.check(action, 3)?;
        self.cell = self.moved(self.cell, action);
        let (reward, terminal) = if self.is_leaf(self.cell) {
            let r = if self.cell.branch == self.goal {
                self.rewards.goal
            } else {
                self.rewards.wrong_leaf
            };
            (r, true)
        } else {
            (self.rewards.step, false)
        };
        // the clock advances inside `finish`; the observation belongs to the
        // post-step phase
        let mut next = self.current();
        next.phase = (self.clock.steps() + 1).min(HINTED_OBSERVATIONS) as u8;
        let obs = self.encode(&self.key(&next));
        Ok(self.clock.finish(obs, reward, terminal))
    }

    fn audit(&self) -> Audit {
        let configs = self.configs();
        let mut states: Vec<(Cell, u8)> = configs.iter().map(|c| (c.cell, c.goal)).collect();
        states.sort_by_key(|(c, g)| (c.depth, c.branch, c.pos, *g));
        states.dedup();
        let mut observed: Vec<TreeObservation> = configs.iter().map(|c| self.key(c)).collect();
        observed.sort();
        observed.dedup();
        Audit {
            states: states.len(),
            observations: observed.len(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn turn_action(t: Turn) -> usize {
        match t {
            Turn::North => NORTH,
            Turn::South => SOUTH,
        }
    }

    fn optimal_path(maze: &TreeMaze) -> Vec<usize> {
        let [first, second] = maze.goal_turns();
        let run = usize::from(maze.corridor_len - 1);
        let mut path = vec![EAST; run];
        path.push(turn_action(first));
        path.extend(std::iter::repeat_n(EAST, run));
        path.push(turn_action(second));
        path.extend(std::iter::repeat_n(EAST, run));
        path
    }

    #[test]
    fn audit_matches_declared_sizes() {
        let maze = TreeMaze::default();
        assert_eq!(
            maze.audit(),
            Audit {
                states: 140,
                observations: 14
            }
        );
        assert_eq!(maze.alphabet.len(), 14);
    }

    #[test]
    fn first_two_observations_carry_hints() {
        for seed in 0..20 {
            let mut maze = TreeMaze::default();
            let first = maze.reset(seed);
            let [t1, t2] = maze.goal_turns();
            assert_eq!(
                first,
                maze.encode(&TreeObservation::Corridor {
                    place: Place::WestEnd,
                    turns: 0,
                    hint: Some(t1)
                })
            );
            let second = maze.step(EAST).unwrap().observation;
            assert_eq!(
                second,
                maze.encode(&TreeObservation::Corridor {
                    place: Place::Middle,
                    turns: 0,
                    hint: Some(t2)
                })
            );
            let third = maze.step(EAST).unwrap().observation;
            assert_eq!(
                third,
                maze.encode(&TreeObservation::Corridor {
                    place: Place::Middle,
                    turns: 0,
                    hint: None
                })
            );
        }
    }

    #[test]
    fn goal_leaf_pays_ten() {
        let mut maze = TreeMaze::default();
        maze.reset(4);
        let path = optimal_path(&maze);
        assert_eq!(path.len(), 14);
        let outcomes: Vec<StepOutcome> = path.iter().map(|&a| maze.step(a).unwrap()).collect();
        let (last, rest) = outcomes.split_last().unwrap();
        assert!(rest.iter().all(|o| o.reward == -0.01 && !o.done()));
        assert_eq!(last.reward, 10.0);
        assert!(last.terminal);
        assert_eq!(
            last.observation,
            maze.encode(&TreeObservation::Leaf { goal: true })
        );
        let ret: f64 = outcomes.iter().map(|o| o.reward).sum();
        assert!((ret - 9.87).abs() < 1e-9);
    }

    #[test]
    fn wrong_leaf_ends_episode() {
        let rewards = TreeMazeRewards {
            step: -0.1,
            ..TreeMazeRewards::default()
        };
        let mut maze = TreeMaze::new(5, rewards).unwrap();
        maze.reset(9);
        let mut path = optimal_path(&maze);
        // flip the second turn
        path[9] = if path[9] == NORTH { SOUTH } else { NORTH };
        let outcomes: Vec<StepOutcome> = path.iter().map(|&a| maze.step(a).unwrap()).collect();
        assert_eq!(outcomes[0].reward, -0.1);
        let last = outcomes.last().unwrap();
        assert_eq!(last.reward, -0.1);
        assert!(last.terminal);
        assert_eq!(maze.step(EAST), Err(EnvError::EpisodeOver));
    }

    #[test]
    fn turning_inside_a_corridor_is_a_bump() {
        let mut maze = TreeMaze::default();
        maze.reset(0);
        maze.step(NORTH).unwrap();
        maze.step(SOUTH).unwrap();
        assert_eq!(maze.cell, Cell::START);
        // hints are tied to time, not place
        let o = maze.step(EAST).unwrap().observation;
        assert_eq!(
            o,
            maze.encode(&TreeObservation::Corridor {
                place: Place::Middle,
                turns: 0,
                hint: None
            })
        );
    }

    #[test]
    fn goals_are_uniform() {
        let mut counts = [0usize; 4];
        let mut maze = TreeMaze::default();
        for seed in 0..40_000 {
            maze.reset(seed);
            counts[maze.goal_leaf() as usize] += 1;
        }
        for c in counts {
            assert!((c as f64 / 40_000.0 - 0.25).abs() < 0.01);
        }
    }

    #[test]
    fn short_corridors_are_rejected() {
        assert!(TreeMaze::new(2, TreeMazeRewards::default()).is_err());
    }
}
