//! Lifetime observation frequencies and the intrinsic reward for holding rare
//! observations in memory.

use std::io::{self, Write};

use thiserror::Error;

use crate::memory::{Memory, Observation};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MotivationError {
    #[error("frequency model is empty; record an observation before asking for a reward")]
    Unprimed,
    #[error("beta must lie in [0, 1], got {0}")]
    InvalidBeta(f64),
}

/// Visit counts per observation. Never reset during a run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrequencyModel {
    counts: Vec<u64>,
    total: u64,
}

impl FrequencyModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, obs: Observation) {
        let id = obs.id();
        if id >= self.counts.len() {
            self.counts.resize(id + 1, 0);
        }
        self.counts[id] += 1;
        self.total += 1;
    }

    pub fn count(&self, obs: Observation) -> u64 {
        self.counts.get(obs.id()).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Empirical probability of `obs`; zero for unseen observations and for
    /// an empty model.
    pub fn probability(&self, obs: Observation) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.count(obs) as f64 / self.total as f64
    }

    /// `(observation, count, probability)` for every observation seen so far.
    pub fn snapshot(&self) -> Vec<(Observation, u64, f64)> {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(id, &c)| {
                let o = Observation(id as u16);
                (o, c, self.probability(o))
            })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "observation_id,count,probability")?;
        for (o, c, p) in self.snapshot() {
            writeln!(out, "{o},{c},{p}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntrinsicParams {
    beta: f64,
    capacity: usize,
}

impl IntrinsicParams {
    pub fn new(beta: f64, capacity: usize) -> Result<Self, MotivationError> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(MotivationError::InvalidBeta(beta));
        }
        Ok(IntrinsicParams { beta, capacity })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }
}

/// `beta * (sum over memory positions of (1 - P(o)) - capacity)`.
///
/// Lies in `[-beta * capacity, 0]`. Repeated observations contribute once
/// per position.
pub fn intrinsic_reward(
    memory: &Memory,
    freq: &FrequencyModel,
    params: &IntrinsicParams,
) -> Result<f64, MotivationError> {
    if freq.total() == 0 {
        return Err(MotivationError::Unprimed);
    }
    let rarity: f64 = memory
        .entries()
        .iter()
        .map(|&o| 1.0 - freq.probability(o))
        .sum();
    Ok(params.beta * (rarity - params.capacity as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn model(counts: &[(u16, u64)]) -> FrequencyModel {
        let mut f = FrequencyModel::new();
        for &(o, n) in counts {
            for _ in 0..n {
                f.record(Observation(o));
            }
        }
        f
    }

    fn mem(ids: &[u16], capacity: usize) -> Memory {
        Memory::from_entries(ids.iter().copied().map(Observation).collect(), capacity).unwrap()
    }

    #[test]
    fn record_counts() {
        let mut f = FrequencyModel::new();
        f.record(Observation(1));
        assert_eq!(f.count(Observation(1)), 1);
        assert_eq!(f.total(), 1);

        let mut f = model(&[(1, 3), (2, 1)]);
        f.record(Observation(2));
        assert_eq!(f.count(Observation(1)), 3);
        assert_eq!(f.count(Observation(2)), 2);
        assert_eq!(f.total(), 5);
    }

    #[test]
    fn probability_is_relative_frequency() {
        let f = model(&[(1, 3), (2, 1)]);
        assert_eq!(f.probability(Observation(1)), 0.75);
        assert_eq!(f.probability(Observation(7)), 0.0);
    }

    #[test]
    fn reward_examples() {
        let p = IntrinsicParams::new(1.0, 1).unwrap();
        let f = model(&[(0, 1)]);
        assert_eq!(intrinsic_reward(&mem(&[], 1), &f, &p).unwrap(), -1.0);
        // P(o) = 1
        assert_eq!(intrinsic_reward(&mem(&[0], 1), &f, &p).unwrap(), -1.0);
        // P(o) = 0.1
        let f = model(&[(0, 1), (1, 9)]);
        let r = intrinsic_reward(&mem(&[0], 1), &f, &p).unwrap();
        assert!((r - (-0.1)).abs() < 1e-12);
        let p0 = IntrinsicParams::new(0.0, 3).unwrap();
        assert_eq!(intrinsic_reward(&mem(&[0, 1], 3), &f, &p0).unwrap(), 0.0);
    }

    #[test]
    fn unprimed_model_is_an_error() {
        let p = IntrinsicParams::new(1.0, 1).unwrap();
        assert_eq!(
            intrinsic_reward(&mem(&[], 1), &FrequencyModel::new(), &p),
            Err(MotivationError::Unprimed)
        );
    }

    #[test]
    fn beta_out_of_range() {
        assert!(IntrinsicParams::new(1.5, 1).is_err());
        assert!(IntrinsicParams::new(-0.1, 1).is_err());
    }

    #[test]
    fn duplicates_each_contribute() {
        let f = model(&[(0, 1), (1, 3)]);
        let p = IntrinsicParams::new(1.0, 2).unwrap();
        let r = intrinsic_reward(&mem(&[0, 0], 2), &f, &p).unwrap();
        assert!((r - (2.0 * 0.75 - 2.0)).abs() < 1e-12);
    }

    #[test]
    fn snapshot_csv() {
        let f = model(&[(0, 1), (2, 3)]);
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "observation_id,count,probability\n0,1,0.25\n2,3,0.75\n"
        );
    }

    fn arb_counts() -> impl Strategy<Value = Vec<u64>> {
        proptest::collection::vec(0u64..50, 1..8)
            .prop_filter("nonempty", |v| v.iter().sum::<u64>() > 0)
    }

    proptest! {
        #[test]
        fn probabilities_sum_to_one(counts in arb_counts(), extra in 0u16..10) {
            let mut f = FrequencyModel::new();
            for (o, &n) in counts.iter().enumerate() {
                for _ in 0..n { f.record(Observation(o as u16)); }
            }
            f.record(Observation(extra));
            let sum: f64 = f.snapshot().iter().map(|(_, _, p)| p).sum();
            prop_assert!((sum - 1.0).abs() < 1e-9);
            prop_assert_eq!(f.snapshot().iter().map(|(_, c, _)| c).sum::<u64>(), f.total());
        }

        #[test]
        fn reward_is_bounded(
            counts in arb_counts(),
            cap in 0usize..5,
            beta in 0.0f64..=1.0,
            ids in proptest::collection::vec(0u16..8, 0..5),
        ) {
            let f = model(&counts.iter().enumerate().map(|(o, &n)| (o as u16, n)).collect::<Vec<_>>());
            let ids: Vec<u16> = ids.into_iter().take(cap).collect();
            let p = IntrinsicParams::new(beta, cap).unwrap();
            let r = intrinsic_reward(&mem(&ids, cap), &f, &p).unwrap();
            prop_assert!(r <= 1e-12);
            prop_assert!(r >= -beta * cap as f64 - 1e-12);
        }

        #[test]
        fn rarer_entry_increases_reward(
            common in 2u64..40,
            rare in 1u64..40,
            cap in 1usize..4,
            beta in 0.01f64..=1.0,
        ) {
            prop_assume!(rare < common);
            let f = model(&[(0, common), (1, rare)]);
            let p = IntrinsicParams::new(beta, cap).unwrap();
            let filler = vec![0u16; cap - 1];
            let mut with_common = filler.clone();
            with_common.push(0);
            let mut with_rare = filler;
            with_rare.push(1);
            let a = intrinsic_reward(&mem(&with_common, cap), &f, &p).unwrap();
            let b = intrinsic_reward(&mem(&with_rare, cap), &f, &p).unwrap();
            prop_assert!(b > a);
        }

        #[test]
        fn filling_memory_helps(common in 1u64..40, other in 1u64..40, cap in 1usize..4) {
            let f = model(&[(0, common), (1, other)]);
            let p = IntrinsicParams::new(1.0, cap).unwrap();
            let empty = intrinsic_reward(&mem(&[], cap), &f, &p).unwrap();
            let one = intrinsic_reward(&mem(&[0], cap), &f, &p).unwrap();
            prop_assert!(one > empty);
        }
    }
}
