//! Stochastic grid maze observed only through the walls around the agent.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    reachable, Alphabet, Audit, BuildError, Cell, Direction, EnvError, EnvSpec, Environment,
    EpisodeClock, GridMap, Pos, StepOutcome, STEP_LIMIT,
};
use crate::memory::Observation;

/// How a slipped move picks its direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SlipMode {
    /// Uniform over all four directions, so the intended one can still come up.
    #[default]
    UniformAll,
    /// Uniform over the three other directions.
    UniformOthers,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeuleauRewards {
    pub goal: f64,
    pub step: f64,
}

impl Default for MeuleauRewards {
    fn default() -> Self {
        MeuleauRewards {
            goal: 5.0,
            step: -0.01,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Meuleau {
    map: GridMap,
    goal: Pos,
    obs: Vec<Option<Observation>>,
    n_observations: usize,
    intended: f64,
    slip: SlipMode,
    rewards: MeuleauRewards,
    clock: EpisodeClock,
    rng: ChaCha8Rng,
    pos: Pos,
}

impl Meuleau {
    pub const DEFAULT_MAP: &'static str = include_str!("../../maps/meuleau.map");

    pub fn new(map: GridMap) -> Result<Self, BuildError> {
        let goal = match map.find(Cell::Goal).as_slice() {
            [g] => *g,
            _ => return Err(BuildError::Marker('G')),
        };
        if map.find(Cell::Start).len() != 1 {
            return Err(BuildError::Marker('S'));
        }
        let alphabet = Alphabet::new(map.open_cells().map(|p| map.wall_signature(p)));
        let obs = map
            .positions()
            .map(|p| {
                map.cell(p)
                    .is_open()
                    .then(|| alphabet.id(&map.wall_signature(p)))
            })
            .collect();
        Ok(Meuleau {
            goal,
            obs,
            n_observations: alphabet.len(),
            intended: 0.8,
            slip: SlipMode::default(),
            rewards: MeuleauRewards::default(),
            clock: EpisodeClock::new(STEP_LIMIT),
            rng: ChaCha8Rng::seed_from_u64(0),
            pos: map.start(),
            map,
        })
    }

    pub fn with_default_map() -> Self {
        let map = GridMap::parse(Self::DEFAULT_MAP).expect("shipped map parses");
        Self::new(map).expect("shipped map has start and goal")
    }

    pub fn with_slip(mut self, intended: f64, slip: SlipMode) -> Result<Self, BuildError> {
        if !(0.0..=1.0).contains(&intended) {
            return Err(BuildError::Param(format!(
                "intended-direction probability must be in [0, 1], got {intended}"
            )));
        }
        self.intended = intended;
        self.slip = slip;
        Ok(self)
    }

    pub fn with_rewards(mut self, rewards: MeuleauRewards) -> Self {
        self.rewards = rewards;
        self
    }

    pub fn with_step_limit(mut self, limit: usize) -> Self {
        self.clock = EpisodeClock::new(limit);
        self
    }

    pub fn position(&self) -> Pos {
        self.pos
    }

    pub fn map(&self) -> &GridMap {
        &self.map
    }

    fn observe(&self, pos: Pos) -> Observation {
        self.obs[self.map.index(pos)].expect("agent stands on an open cell")
    }

    /// Direction actually executed for an intended move.
    pub fn sample_direction<R: Rng>(
        intended_dir: Direction,
        intended: f64,
        slip: SlipMode,
        rng: &mut R,
    ) -> Direction {
        if rng.gen::<f64>() < intended {
            return intended_dir;
        }
        match slip {
            SlipMode::UniformAll => Direction::ALL[rng.gen_range(0..4)],
            SlipMode::UniformOthers => {
                let others: Vec<Direction> = Direction::ALL
                    .into_iter()
                    .filter(|&d| d != intended_dir)
                    .collect();
                others[rng.gen_range(0..3)]
            }
        }
    }
}

impl Environment for Meuleau {
    fn name(&self) -> &'static str {
        "meuleau"
    }

    fn spec(&self) -> EnvSpec {
        EnvSpec {
            n_states: 65,
            n_actions: 4,
            n_observations: 8,
            step_limit: self.clock.limit(),
        }
    }

    fn reset(&mut self, seed: u64) -> Observation {
        self.clock.start();
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self.pos = self.map.start();
        self.observe(self.pos)
    }

    fn step(&mut self, action: usize) -> Result<StepOutcome, EnvError> {
        self.clock.check(action, Direction::ALL.len())?;
        let dir = Self::sample_direction(
            Direction::ALL[action],
            self.intended,
            self.slip,
            &mut self.rng,
        );
        self.pos = self.map.moved(self.pos, dir);
        let terminal = self.pos == self.goal;
        let reward = if terminal {
            self.rewards.goal
        } else {
            self.rewards.step
        };
        Ok(self.clock.finish(self.observe(self.pos), reward, terminal))
    }

    fn audit(&self) -> Audit {
        let states = reachable([self.map.start()], |&p| {
            if p == self.goal {
                return Vec::new();
            }
            Direction::ALL
                .iter()
                .map(|&d| self.map.moved(p, d))
                .collect()
        });
        let mut observed: Vec<Observation> = states.iter().map(|&p| self.observe(p)).collect();
        observed.sort();
        observed.dedup();
        debug_assert!(observed.len() <= self.n_observations);
        Audit {
            states: states.len(),
            observations: observed.len(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn audit_matches_declared_sizes() {
        let env = Meuleau::with_default_map();
        assert_eq!(
            env.audit(),
            Audit {
                states: 65,
                observations: 8
            }
        );
    }

    #[test]
    fn effective_intended_frequency() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let hits = (0..n)
            .filter(|_| {
                Meuleau::sample_direction(Direction::North, 0.8, SlipMode::UniformAll, &mut rng)
                    == Direction::North
            })
            .count();
        let freq = hits as f64 / n as f64;
        assert!((freq - 0.85).abs() < 0.01, "{freq}");

        let hits = (0..n)
            .filter(|_| {
                Meuleau::sample_direction(Direction::North, 0.8, SlipMode::UniformOthers, &mut rng)
                    == Direction::North
            })
            .count();
        let freq = hits as f64 / n as f64;
        assert!((freq - 0.8).abs() < 0.01, "{freq}");
    }

    #[test]
    fn rewards_and_goal() {
        let text = "#####\n#S.G#\n#####\n";
        let mut env = Meuleau::new(GridMap::parse(text).unwrap())
            .unwrap()
            .with_slip(1.0, SlipMode::UniformAll)
            .unwrap();
        env.reset(0);
        let first = env.step(1).unwrap();
        assert_eq!(first.reward, -0.01);
        assert!(!first.terminal);
        let second = env.step(1).unwrap();
        assert_eq!(second.reward, 5.0);
        assert!(second.terminal);
    }

    #[test]
    fn wall_bump_is_noop() {
        let mut env = Meuleau::with_default_map()
            .with_slip(1.0, SlipMode::UniformAll)
            .unwrap();
        env.reset(0);
        let start = env.position();
        // west of the start is a wall
        let out = env.step(3).unwrap();
        assert_eq!(env.position(), start);
        assert_eq!(out.reward, -0.01);
    }

    #[test]
    fn seeded_episodes_repeat() {
        let actions: Vec<usize> = (0..200).map(|i| (i * 7 + i / 3) % 4).collect();
        let play = |seed| {
            let mut env = Meuleau::with_default_map();
            let mut trace = vec![env.reset(seed)];
            for &a in &actions {
                let out = env.step(a).unwrap();
                trace.push(out.observation);
                if out.done() {
                    break;
                }
            }
            trace
        };
        assert_eq!(play(5), play(5));
        assert_ne!(play(5), play(6));
    }

    #[test]
    fn missing_goal_is_rejected() {
        let map = GridMap::parse("S..").unwrap();
        assert!(matches!(Meuleau::new(map), Err(BuildError::Marker('G'))));
    }
}
