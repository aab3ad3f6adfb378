//! Seeded experiments: configuration, parallel runs, CSV output and
//! bootstrapped learning curves.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::agents::ParamError;
use crate::envs::EnvError;

mod config;
mod run;
mod stats;

pub use config::{ConfigError, EnvConfig, EnvKind, ExperimentConfig, SWEEP_KEYS};
pub use run::{
    read_runs_csv, run_experiment, run_seed, run_single, write_runs_csv, EpisodeRow, RunRecord,
    RUNS_HEADER,
};
pub use stats::{aggregate, AggregateCurve, Bootstrap, CurvePoint, Metric};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("{0}")]
    Data(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("i/o: {0}")]
    Stream(#[from] std::io::Error),
    #[error("thread pool: {0}")]
    Pool(String),
}

pub fn create(path: &Path) -> Result<BufWriter<File>, HarnessError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| HarnessError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })
}

/// Files written by [`execute`].
#[derive(Debug, Clone, PartialEq)]
pub struct Outputs {
    pub runs: PathBuf,
    pub aggregate: PathBuf,
}

/// Runs the experiment and writes the per-episode and aggregate CSVs next
/// to the configured output prefix.
pub fn execute(cfg: &ExperimentConfig, jobs: Option<usize>) -> Result<Outputs, HarnessError> {
    let records = run_experiment(cfg, jobs)?;
    let outputs = Outputs {
        runs: cfg.runs_path(),
        aggregate: cfg.aggregate_path(),
    };
    write_runs_csv(&records, create(&outputs.runs)?)?;
    let opts = Bootstrap {
        resamples: cfg.resamples,
        confidence: cfg.confidence,
        seed: cfg.base_seed,
    };
    aggregate(&records, &opts)?.write_csv(create(&outputs.aggregate)?)?;
    Ok(outputs)
}
