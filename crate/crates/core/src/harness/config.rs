//! Experiment configuration and its flat text format.
//!
//! # Grammar
//!
//! ```text
//! file    := { line '\n' }
//! line    := blank | comment | section | entry
//! comment := '#' any*
//! section := '[' 'env' ']'
//! entry   := key '=' value
//! ```
//!
//! Whitespace around keys and values is ignored and keys are case
//! sensitive. Each key may appear once. Entries before any section header
//! describe the experiment; entries after `[env]` describe the environment.
//!
//! | top-level key   | value                                   | default     |
//! |-----------------|-----------------------------------------|-------------|
//! | `env`           | `load_unload`, `meuleau`, `tree_maze`, `chain` | required |
//! | `agent`         | `smm`, `fw`, `memoryless`               | `smm`       |
//! | `capacity`      | memory size c                           | 1           |
//! | `alpha`, `lambda`, `gamma`, `beta` | learner parameters   | 0.01, 0.9, 0.9, 1.0 |
//! | `epsilon_start`, `epsilon_end` | exploration schedule      | 0.2, 0.001  |
//! | `runs`          | independent runs                        | 50          |
//! | `episodes`      | episodes per run                        | 10000 for `load_unload` and `chain`, 20000 for the mazes |
//! | `seed`          | base seed, run i uses `seed + i`        | 0           |
//! | `output`        | path prefix for the CSV files           | config path without extension |
//! | `resamples`     | bootstrap resamples                     | 1000        |
//! | `confidence`    | confidence level of the intervals      | 0.95        |
//!
//! | `[env]` key         | applies to               | default |
//! |---------------------|--------------------------|---------|
//! | `map`               | `load_unload`, `meuleau` | built-in layout |
//! | `slip`              | `meuleau`: probability of the intended move | 0.8 |
//! | `slip_mode`         | `meuleau`: `uniform_all` or `uniform_others` | `uniform_all` |
//! | `goal_reward`       | `meuleau`, `tree_maze`   | 5.0, 10.0 |
//! | `step_reward`       | `meuleau`, `tree_maze`   | -0.01 |
//! | `wrong_leaf_reward` | `tree_maze`              | -0.1 |
//! | `corridor_length`   | `tree_maze`              | 5 |
//! | `chain_length`      | `chain`                  | 3 |
//!
//! Relative paths are resolved against the directory holding the config
//! file.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::agents::{AgentKind, LearnerParams, ParamError};
use crate::envs::{
    Audit, BuildError, Chain, EnvSpec, Environment, GridMap, LoadUnload, Meuleau, MeuleauRewards,
    SlipMode, TreeMaze, TreeMazeRewards,
};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key {key:?}")]
    Duplicate { line: usize, key: String },
    #[error("invalid value {value:?} for {key}: {reason}")]
    Value {
        key: String,
        value: String,
        reason: String,
    },
    #[error("missing required key {0:?}")]
    Missing(&'static str),
    #[error("{}: {source}", path.display())]
    Map {
        path: PathBuf,
        #[source]
        source: BuildError,
    },
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("{0}")]
    Invalid(String),
    #[error("audit of {env} found {} states and {} observations, spec declares {} and {}",
        audit.states, audit.observations, spec.n_states, spec.n_observations)]
    AuditMismatch {
        env: EnvKind,
        audit: Audit,
        spec: EnvSpec,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvKind {
    LoadUnload,
    Meuleau,
    TreeMaze,
    Chain,
}

impl EnvKind {
    pub const ALL: [EnvKind; 4] = [
        EnvKind::LoadUnload,
        EnvKind::Meuleau,
        EnvKind::TreeMaze,
        EnvKind::Chain,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EnvKind::LoadUnload => "load_unload",
            EnvKind::Meuleau => "meuleau",
            EnvKind::TreeMaze => "tree_maze",
            EnvKind::Chain => "chain",
        }
    }

    pub fn default_episodes(self) -> usize {
        match self {
            EnvKind::LoadUnload | EnvKind::Chain => 10_000,
            EnvKind::Meuleau | EnvKind::TreeMaze => 20_000,
        }
    }
}

impl fmt::Display for EnvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EnvKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EnvKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                format!(
                    "unknown environment {s:?} (expected load_unload, meuleau, tree_maze or chain)"
                )
            })
    }
}

/// Environment choice plus its sidecar parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvConfig {
    pub kind: EnvKind,
    pub map: Option<PathBuf>,
    pub slip: f64,
    pub slip_mode: SlipMode,
    pub goal_reward: Option<f64>,
    pub step_reward: Option<f64>,
    pub wrong_leaf_reward: Option<f64>,
    pub corridor_length: u8,
    pub chain_length: usize,
}

impl EnvConfig {
    pub fn new(kind: EnvKind) -> Self {
        EnvConfig {
            kind,
            map: None,
            slip: 0.8,
            slip_mode: SlipMode::UniformAll,
            goal_reward: None,
            step_reward: None,
            wrong_leaf_reward: None,
            corridor_length: TreeMaze::DEFAULT_CORRIDOR_LEN,
            chain_length: 3,
        }
    }

    /// Reads and parses the map file, if one is configured.
    pub fn load_map(&self) -> Result<Option<GridMap>, ConfigError> {
        let Some(path) = &self.map else {
            return Ok(None);
        };
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.clone(),
            source,
        })?;
        GridMap::parse(&text)
            .map(Some)
            .map_err(|e| ConfigError::Map {
                path: path.clone(),
                source: e.into(),
            })
    }

    /// Builds the environment from an already loaded map.
    pub fn build_with(&self, map: Option<GridMap>) -> Result<Box<dyn Environment>, ConfigError> {
        let with_path = |e: BuildError| match &self.map {
            Some(path) => ConfigError::Map {
                path: path.clone(),
                source: e,
            },
            None => ConfigError::Build(e),
        };
        Ok(match self.kind {
            EnvKind::LoadUnload => match map {
                Some(m) => Box::new(LoadUnload::new(m).map_err(with_path)?),
                None => Box::new(LoadUnload::with_default_map()),
            },
            EnvKind::Meuleau => {
                let env = match map {
                    Some(m) => Meuleau::new(m).map_err(with_path)?,
                    None => Meuleau::with_default_map(),
                };
                let defaults = MeuleauRewards::default();
                let rewards = MeuleauRewards {
                    goal: self.goal_reward.unwrap_or(defaults.goal),
                    step: self.step_reward.unwrap_or(defaults.step),
                };
                Box::new(
                    env.with_slip(self.slip, self.slip_mode)?
                        .with_rewards(rewards),
                )
            }
            EnvKind::TreeMaze => {
                let defaults = TreeMazeRewards::default();
                let rewards = TreeMazeRewards {
                    goal: self.goal_reward.unwrap_or(defaults.goal),
                    wrong_leaf: self.wrong_leaf_reward.unwrap_or(defaults.wrong_leaf),
                    step: self.step_reward.unwrap_or(defaults.step),
                };
                Box::new(TreeMaze::new(self.corridor_length, rewards)?)
            }
            EnvKind::Chain => {
                if self.chain_length < 2 {
                    return Err(ConfigError::Invalid(format!(
                        "chain_length must be at least 2, got {}",
                        self.chain_length
                    )));
                }
                Box::new(Chain::new(self.chain_length))
            }
        })
    }

    pub fn build(&self) -> Result<Box<dyn Environment>, ConfigError> {
        self.build_with(self.load_map()?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub env: EnvConfig,
    pub agent: AgentKind,
    /// Learner parameters, including the memory capacity.
    pub params: LearnerParams,
    pub n_runs: usize,
    pub n_episodes: usize,
    pub base_seed: u64,
    /// Prefix of the output files.
    pub output: PathBuf,
    pub resamples: usize,
    pub confidence: f64,
}

/// Keys a sweep may vary.
pub const SWEEP_KEYS: [&str; 5] = ["lambda", "beta", "capacity", "alpha", "gamma"];

const TOP_KEYS: [&str; 15] = [
    "env",
    "agent",
    "capacity",
    "alpha",
    "lambda",
    "gamma",
    "beta",
    "epsilon_start",
    "epsilon_end",
    "runs",
    "episodes",
    "seed",
    "output",
    "resamples",
    "confidence",
];

const ENV_KEYS: [&str; 8] = [
    "map",
    "slip",
    "slip_mode",
    "goal_reward",
    "step_reward",
    "wrong_leaf_reward",
    "corridor_length",
    "chain_length",
];

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value.parse().map_err(|e: T::Err| ConfigError::Value {
        key: key.to_string(),
        value: value.to_string(),
        reason: e.to_string(),
    })
}

fn resolve(base: &Path, value: &str) -> PathBuf {
    let p = Path::new(value);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl ExperimentConfig {
    /// Configuration with defaults for `env`, writing to `output`.
    pub fn new(env: EnvKind, output: impl Into<PathBuf>) -> Self {
        ExperimentConfig {
            env: EnvConfig::new(env),
            agent: AgentKind::Smm,
            params: LearnerParams::default(),
            n_runs: 50,
            n_episodes: env.default_episodes(),
            base_seed: 0,
            output: output.into(),
            resamples: 1000,
            confidence: 0.95,
        }
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::parse(&text, base, path.with_extension(""))
    }

    /// Parses config text; relative paths resolve against `base` and the
    /// output prefix defaults to `default_output`.
    pub fn parse(text: &str, base: &Path, default_output: PathBuf) -> Result<Self, ConfigError> {
        let mut top: Vec<(usize, &str, &str)> = Vec::new();
        let mut env: Vec<(usize, &str, &str)> = Vec::new();
        let mut in_env = false;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line.starts_with('[') {
                if line == "[env]" {
                    if in_env {
                        return Err(ConfigError::Syntax {
                            line: line_no,
                            message: "duplicate [env] section".into(),
                        });
                    }
                    in_env = true;
                    continue;
                }
                return Err(ConfigError::Syntax {
                    line: line_no,
                    message: format!("unknown section {line}"),
                });
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line: line_no,
                    message: format!("expected key = value, found {line:?}"),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            let (known, seen): (&[&str], &mut Vec<_>) = if in_env {
                (&ENV_KEYS, &mut env)
            } else {
                (&TOP_KEYS, &mut top)
            };
            if !known.contains(&key) {
                return Err(ConfigError::UnknownKey {
                    line: line_no,
                    key: key.to_string(),
                });
            }
            if seen.iter().any(|(_, k, _)| *k == key) {
                return Err(ConfigError::Duplicate {
                    line: line_no,
                    key: key.to_string(),
                });
            }
            seen.push((line_no, key, value));
        }

        let kind: EnvKind = match top.iter().find(|(_, k, _)| *k == "env") {
            Some((_, k, v)) => parse_value(k, v)?,
            None => return Err(ConfigError::Missing("env")),
        };
        let mut cfg = ExperimentConfig::new(kind, default_output);
        for (_, key, value) in top.iter().filter(|(_, k, _)| *k != "env") {
            if *key == "output" {
                cfg.output = resolve(base, value);
            } else {
                cfg.set(key, value)?;
            }
        }
        for (_, key, value) in env {
            if key == "map" {
                cfg.env.map = Some(resolve(base, value));
            } else {
                cfg.set_env(key, value)?;
            }
        }
        Ok(cfg)
    }

    /// Sets one top-level key from its text value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "env" => self.env.kind = parse_value(key, value)?,
            "agent" => self.agent = parse_value(key, value)?,
            "capacity" => self.params.capacity = parse_value(key, value)?,
            "alpha" => self.params.alpha = parse_value(key, value)?,
            "lambda" => self.params.lambda = parse_value(key, value)?,
            "gamma" => self.params.gamma = parse_value(key, value)?,
            "beta" => self.params.beta = parse_value(key, value)?,
            "epsilon_start" => self.params.epsilon_start = parse_value(key, value)?,
            "epsilon_end" => self.params.epsilon_end = parse_value(key, value)?,
            "runs" => self.n_runs = parse_value(key, value)?,
            "episodes" => self.n_episodes = parse_value(key, value)?,
            "seed" => self.base_seed = parse_value(key, value)?,
            "output" => self.output = PathBuf::from(value),
            "resamples" => self.resamples = parse_value(key, value)?,
            "confidence" => self.confidence = parse_value(key, value)?,
            _ => return Err(ConfigError::Invalid(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Sets one `[env]` key from its text value.
    pub fn set_env(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let env = &mut self.env;
        match key {
            "map" => env.map = Some(PathBuf::from(value)),
            "slip" => env.slip = parse_value(key, value)?,
            "slip_mode" => {
                env.slip_mode = match value {
                    "uniform_all" => SlipMode::UniformAll,
                    "uniform_others" => SlipMode::UniformOthers,
                    _ => {
                        return Err(ConfigError::Value {
                            key: key.into(),
                            value: value.into(),
                            reason: "expected uniform_all or uniform_others".into(),
                        })
                    }
                }
            }
            "goal_reward" => env.goal_reward = Some(parse_value(key, value)?),
            "step_reward" => env.step_reward = Some(parse_value(key, value)?),
            "wrong_leaf_reward" => env.wrong_leaf_reward = Some(parse_value(key, value)?),
            "corridor_length" => env.corridor_length = parse_value(key, value)?,
            "chain_length" => env.chain_length = parse_value(key, value)?,
            _ => return Err(ConfigError::Invalid(format!("unknown [env] key {key:?}"))),
        }
        Ok(())
    }

    /// Checks every parameter, loads the map and audits the environment
    /// against its declared sizes. Returns the loaded map.
    pub fn validate(&self) -> Result<Option<GridMap>, ConfigError> {
        self.params.validate()?;
        if self.n_runs == 0 {
            return Err(ConfigError::Invalid("runs must be at least 1".into()));
        }
        if self.n_episodes == 0 {
            return Err(ConfigError::Invalid("episodes must be at least 1".into()));
        }
        if self.resamples == 0 {
            return Err(ConfigError::Invalid("resamples must be at least 1".into()));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(ConfigError::Invalid(format!(
                "confidence must lie in (0, 1), got {}",
                self.confidence
            )));
        }
        let map = self.env.load_map()?;
        let env = self.env.build_with(map.clone())?;
        let (audit, spec) = (env.audit(), env.spec());
        if !audit.matches(&spec) {
            return Err(ConfigError::AuditMismatch {
                env: self.env.kind,
                audit,
                spec,
            });
        }
        Ok(map)
    }

    pub fn runs_path(&self) -> PathBuf {
        suffixed(&self.output, ".runs.csv")
    }

    pub fn aggregate_path(&self) -> PathBuf {
        suffixed(&self.output, ".aggregate.csv")
    }
}

pub(crate) fn suffixed(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}
