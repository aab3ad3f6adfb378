//! Percentile-bootstrap confidence intervals over runs.

use std::fmt;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::run::{EpisodeRow, RunRecord};
use super::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Steps,
    ExtrinsicReturn,
    IntrinsicReturn,
    MemoryChanges,
}

impl Metric {
    pub const ALL: [Metric; 4] = [
        Metric::Steps,
        Metric::ExtrinsicReturn,
        Metric::IntrinsicReturn,
        Metric::MemoryChanges,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Steps => "steps",
            Metric::ExtrinsicReturn => "extrinsic_return",
            Metric::IntrinsicReturn => "intrinsic_return",
            Metric::MemoryChanges => "memory_changes",
        }
    }

    pub fn of(self, row: &EpisodeRow) -> f64 {
        match self {
            Metric::Steps => row.steps as f64,
            Metric::ExtrinsicReturn => row.extrinsic_return,
            Metric::IntrinsicReturn => row.intrinsic_return,
            Metric::MemoryChanges => row.memory_changes as f64,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bootstrap {
    pub resamples: usize,
    pub confidence: f64,
    pub seed: u64,
}

impl Default for Bootstrap {
    fn default() -> Self {
        Bootstrap {
            resamples: 1000,
            confidence: 0.95,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub episode: usize,
    pub metric: Metric,
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Mean and interval per episode and metric, episode-major.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateCurve {
    pub points: Vec<CurvePoint>,
}

impl AggregateCurve {
    pub fn series(&self, metric: Metric) -> impl Iterator<Item = &CurvePoint> {
        self.points.iter().filter(move |p| p.metric == metric)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), HarnessError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["episode", "metric", "mean", "ci_low", "ci_high"])?;
        for p in &self.points {
            w.write_record([
                p.episode.to_string(),
                p.metric.to_string(),
                p.mean.to_string(),
                p.ci_low.to_string(),
                p.ci_high.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Linear interpolation between order statistics of a sorted slice.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Per-episode mean over runs with a percentile-bootstrap interval.
///
/// One set of resampled run indices is drawn from `opts.seed` and shared by
/// every episode and metric. Every run must cover the same episodes.
pub fn aggregate(records: &[RunRecord], opts: &Bootstrap) -> Result<AggregateCurve, HarnessError> {
    let Some(first) = records.first() else {
        return Err(HarnessError::Data("no runs to aggregate".into()));
    };
    if first.rows.is_empty() {
        return Err(HarnessError::Data("runs hold no episodes".into()));
    }
    if opts.resamples == 0 || !(opts.confidence > 0.0 && opts.confidence < 1.0) {
        return Err(HarnessError::Data(format!(
            "bad bootstrap settings: {} resamples at confidence {}",
            opts.resamples, opts.confidence
        )));
    }
    for r in records {
        let same = r.rows.len() == first.rows.len()
            && r.rows
                .iter()
                .zip(&first.rows)
                .all(|(a, b)| a.episode == b.episode);
        if !same {
            return Err(HarnessError::Data(format!(
                "run {} covers different episodes than run {}",
                r.run, first.run
            )));
        }
    }

    let n = records.len();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(2);
    let draws: Vec<usize> = (0..opts.resamples * n)
        .map(|_| rng.gen_range(0..n))
        .collect();
    let tail = (1.0 - opts.confidence) / 2.0;

    let points = (0..first.rows.len())
        .into_par_iter()
        .flat_map_iter(|e| {
            let draws = &draws;
            Metric::ALL.into_iter().map(move |metric| {
                let values: Vec<f64> = records.iter().map(|r| metric.of(&r.rows[e])).collect();
                let mean = values.iter().sum::<f64>() / n as f64;
                let mut means: Vec<f64> = draws
                    .chunks(n)
                    .map(|idx| idx.iter().map(|&i| values[i]).sum::<f64>() / n as f64)
                    .collect();
                means.sort_by(f64::total_cmp);
                CurvePoint {
                    episode: first.rows[e].episode,
                    metric,
                    mean,
                    ci_low: quantile(&means, tail).min(mean),
                    ci_high: quantile(&means, 1.0 - tail).max(mean),
                }
            })
        })
        .collect();
    Ok(AggregateCurve { points })
}
