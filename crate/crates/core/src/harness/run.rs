//! Seeded multi-run execution and the per-episode CSV.

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::HarnessError;
use crate::agents::Agent;
use crate::envs::GridMap;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EpisodeRow {
    pub episode: usize,
    pub steps: usize,
    pub extrinsic_return: f64,
    pub intrinsic_return: f64,
    pub memory_changes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub run: usize,
    pub rows: Vec<EpisodeRow>,
}

impl RunRecord {
    /// Mean of `metric` over the last `window` episodes.
    pub fn tail_mean(&self, window: usize, metric: impl Fn(&EpisodeRow) -> f64) -> f64 {
        let tail = &self.rows[self.rows.len().saturating_sub(window)..];
        tail.iter().map(metric).sum::<f64>() / tail.len().max(1) as f64
    }
}

/// Seed of run `run`.
pub fn run_seed(cfg: &ExperimentConfig, run: usize) -> u64 {
    cfg.base_seed.wrapping_add(run as u64)
}

/// Executes a single run and hands back the trained agent.
pub fn run_single(
    cfg: &ExperimentConfig,
    map: Option<GridMap>,
    run: usize,
) -> Result<(RunRecord, Agent), HarnessError> {
    let seed = run_seed(cfg, run);
    let mut env = cfg.env.build_with(map)?;
    let mut agent = Agent::new(cfg.agent, cfg.params, env.spec().n_actions, seed)?;
    let mut env_seeds = ChaCha8Rng::seed_from_u64(seed);
    env_seeds.set_stream(1);
    let mut rows = Vec::with_capacity(cfg.n_episodes);
    for episode in 0..cfg.n_episodes {
        let epsilon = cfg.params.epsilon(episode, cfg.n_episodes);
        let stats = agent.run_episode(env.as_mut(), env_seeds.gen(), epsilon)?;
        rows.push(EpisodeRow {
            episode,
            steps: stats.steps,
            extrinsic_return: stats.extrinsic_return,
            intrinsic_return: stats.intrinsic_return,
            memory_changes: stats.memory_changes,
        });
    }
    Ok((RunRecord { run, rows }, agent))
}

/// Validates the configuration, then executes every run. Runs execute in
/// parallel on `jobs` threads (all cores when `None`) and come back in run
/// order.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    jobs: Option<usize>,
) -> Result<Vec<RunRecord>, HarnessError> {
    let map = cfg.validate()?;
    let work = || {
        (0..cfg.n_runs)
            .into_par_iter()
            .map(|run| run_single(cfg, map.clone(), run).map(|(record, _)| record))
            .collect::<Result<Vec<_>, _>>()
    };
    match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| HarnessError::Pool(e.to_string()))?
            .install(work),
        None => work(),
    }
}

pub const RUNS_HEADER: [&str; 6] = [
    "run",
    "episode",
    "steps",
    "extrinsic_return",
    "intrinsic_return",
    "memory_changes",
];

pub fn write_runs_csv<W: Write>(records: &[RunRecord], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RUNS_HEADER)?;
    for record in records {
        for row in &record.rows {
            w.write_record([
                record.run.to_string(),
                row.episode.to_string(),
                row.steps.to_string(),
                row.extrinsic_return.to_string(),
                row.intrinsic_return.to_string(),
                row.memory_changes.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a per-episode CSV back into run records, ordered by run index.
pub fn read_runs_csv<R: Read>(input: R) -> Result<Vec<RunRecord>, HarnessError> {
    let mut reader = csv::Reader::from_reader(input);
    let header = reader.headers()?.clone();
    if header.iter().ne(RUNS_HEADER) {
        return Err(HarnessError::Data(format!(
            "unexpected header {:?}, expected {}",
            header.iter().collect::<Vec<_>>().join(","),
            RUNS_HEADER.join(",")
        )));
    }
    let mut records: Vec<RunRecord> = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let field = |j: usize| {
            row[j].parse::<f64>().map_err(|_| {
                HarnessError::Data(format!(
                    "line {}: bad {} value {:?}",
                    i + 2,
                    RUNS_HEADER[j],
                    &row[j]
                ))
            })
        };
        let count = |j: usize| {
            row[j].parse::<usize>().map_err(|_| {
                HarnessError::Data(format!(
                    "line {}: bad {} value {:?}",
                    i + 2,
                    RUNS_HEADER[j],
                    &row[j]
                ))
            })
        };
        let run = count(0)?;
        let entry = EpisodeRow {
            episode: count(1)?,
            steps: count(2)?,
            extrinsic_return: field(3)?,
            intrinsic_return: field(4)?,
            memory_changes: count(5)?,
        };
        match records.iter_mut().find(|r| r.run == run) {
            Some(r) => r.rows.push(entry),
            None => records.push(RunRecord {
                run,
                rows: vec![entry],
            }),
        }
    }
    records.sort_by_key(|r| r.run);
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::AgentKind;
    use crate::harness::config::EnvKind;

    fn cfg(kind: EnvKind, agent: AgentKind, runs: usize, episodes: usize) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(kind, "unused");
        c.agent = agent;
        c.n_runs = runs;
        c.n_episodes = episodes;
        c
    }

    #[test]
    fn single_memoryless_episode() {
        let records = run_experiment(
            &cfg(EnvKind::LoadUnload, AgentKind::Memoryless, 1, 1),
            Some(1),
        )
        .unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].rows.len(), 1);
        let row = records[0].rows[0];
        assert!((6..=500).contains(&row.steps), "{}", row.steps);
        assert_eq!(row.memory_changes, 0);
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let c = cfg(EnvKind::TreeMaze, AgentKind::Smm, 4, 30);
        let a = run_experiment(&c, Some(1)).unwrap();
        let b = run_experiment(&c, Some(3)).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            a.iter().map(|r| r.run).collect::<Vec<_>>(),
            vec![0, 1, 2, 3]
        );
        assert_ne!(a[0].rows, a[1].rows);
    }

    #[test]
    fn row_invariants() {
        let records = run_experiment(
            &cfg(EnvKind::Meuleau, AgentKind::FixedWindow, 2, 5),
            Some(2),
        )
        .unwrap();
        for row in records.iter().flat_map(|r| &r.rows) {
            assert!(row.steps <= 500);
            assert!(row.memory_changes <= row.steps);
        }
    }

    #[test]
    fn csv_round_trip() {
        let records =
            run_experiment(&cfg(EnvKind::LoadUnload, AgentKind::Smm, 2, 3), None).unwrap();
        let mut buf = Vec::new();
        write_runs_csv(&records, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(
            "run,episode,steps,extrinsic_return,intrinsic_return,memory_changes\n0,0,"
        ));
        assert_eq!(read_runs_csv(buf.as_slice()).unwrap(), records);
    }

    #[test]
    fn bad_csv_is_rejected() {
        assert!(matches!(
            read_runs_csv("a,b\n1,2\n".as_bytes()),
            Err(HarnessError::Data(_))
        ));
        let text =
            "run,episode,steps,extrinsic_return,intrinsic_return,memory_changes\n0,0,x,0,0,0\n";
        assert!(matches!(
            read_runs_csv(text.as_bytes()),
            Err(HarnessError::Data(_))
        ));
    }
}
