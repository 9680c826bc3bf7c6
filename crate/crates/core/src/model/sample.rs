use rand::Rng;

use super::{Instance, Mode};
use crate::stats::stream_rng;

const DURATION_STREAM: u64 = 1 << 62;
const ARRIVAL_STREAM: u64 = 2 << 62;

/// Per-arrival uniforms. `selection` drives the rounding draw; assortment runs
/// additionally use `offer` (which sub-assortment) and `choice` (what the customer buys).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrivalDraws {
    pub selection: f64,
    pub offer: f64,
    pub choice: f64,
}

/// Pre-drawn randomness for one run: for each unit of each resource a list of
/// `T` i.i.d. durations, consumed strictly in order, plus per-arrival uniforms.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    pub seed: u64,
    durations: Vec<Vec<Vec<f64>>>,
    draws: Vec<ArrivalDraws>,
}

impl SamplePath {
    /// Assemble a path from explicit lists (tests and replays).
    pub fn from_parts(seed: u64, durations: Vec<Vec<Vec<f64>>>, draws: Vec<ArrivalDraws>) -> Self {
        SamplePath { seed, durations, draws }
    }

    /// The `n`-th duration of unit `k` of resource `i`.
    pub fn duration(&self, i: usize, k: usize, n: usize) -> f64 {
        self.durations[i][k][n]
    }

    pub fn durations(&self, i: usize, k: usize) -> &[f64] {
        &self.durations[i][k]
    }

    pub fn draws(&self, t: usize) -> ArrivalDraws {
        self.draws[t]
    }

    pub fn num_arrivals(&self) -> usize {
        self.draws.len()
    }

    pub fn fits(&self, instance: &Instance) -> bool {
        self.draws.len() == instance.num_arrivals()
            && self.durations.len() == instance.resources().len()
            && self
                .durations
                .iter()
                .zip(instance.resources())
                .all(|(units, r)| units.len() == r.capacity as usize)
    }
}

/// Deterministic in `(instance, seed)`. Every `(resource, unit)` and every arrival
/// reads its own ChaCha stream, so adding a resource leaves the other lists intact.
pub fn draw_sample_path(instance: &Instance, seed: u64) -> SamplePath {
    let horizon = instance.num_arrivals();
    let durations = instance
        .resources()
        .iter()
        .enumerate()
        .map(|(i, r)| {
            (0..r.capacity as u64)
                .map(|k| {
                    let mut rng = stream_rng(seed, DURATION_STREAM | (i as u64) << 24 | k);
                    (0..horizon).map(|_| r.usage.sample(&mut rng)).collect()
                })
                .collect()
        })
        .collect();
    let draws = (0..horizon as u64)
        .map(|t| {
            let mut rng = stream_rng(seed, ARRIVAL_STREAM | t);
            let selection = rng.random();
            let (offer, choice) = match instance.mode() {
                Mode::Assortment => (rng.random(), rng.random()),
                Mode::Matching => (0.0, 0.0),
            };
            ArrivalDraws {
                selection,
                offer,
                choice,
            }
        })
        .collect();
    SamplePath { seed, durations, draws }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Arrival, Resource, UsageDistribution};

    fn instance(usage: UsageDistribution, arrivals: usize, capacity: u32) -> Instance {
        Instance::new(
            Mode::Matching,
            vec![Resource {
                id: "a".into(),
                capacity,
                reward: 1.0,
                usage,
            }],
            (0..arrivals).map(|t| Arrival::matching(t as f64, vec![0])).collect(),
        )
        .unwrap()
    }

    #[test]
    fn same_seed_same_path() {
        let inst = instance(UsageDistribution::Exponential { rate: 2.0 }, 20, 3);
        assert_eq!(draw_sample_path(&inst, 42), draw_sample_path(&inst, 42));
        assert_ne!(draw_sample_path(&inst, 42), draw_sample_path(&inst, 43));
    }

    #[test]
    fn lists_have_horizon_length() {
        let inst = instance(UsageDistribution::Deterministic { duration: 1.0 }, 7, 2);
        let path = draw_sample_path(&inst, 1);
        assert!(path.fits(&inst));
        for k in 0..2 {
            assert_eq!(path.durations(0, k), &[1.0; 7]);
        }
    }

    #[test]
    fn exponential_mean_by_law_of_large_numbers() {
        let inst = instance(UsageDistribution::Exponential { rate: 1.0 }, 100_000, 1);
        let path = draw_sample_path(&inst, 5);
        let mean = path.durations(0, 0).iter().sum::<f64>() / 100_000.0;
        assert!((mean - 1.0).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn adding_a_resource_keeps_existing_streams() {
        let one = instance(UsageDistribution::Exponential { rate: 1.0 }, 10, 2);
        let mut resources = one.resources().to_vec();
        resources.push(Resource {
            id: "b".into(),
            capacity: 1,
            reward: 1.0,
            usage: UsageDistribution::Exponential { rate: 3.0 },
        });
        let two = Instance::new(Mode::Matching, resources, one.arrivals().to_vec()).unwrap();
        let p1 = draw_sample_path(&one, 9);
        let p2 = draw_sample_path(&two, 9);
        assert_eq!(p1.durations(0, 1), p2.durations(0, 1));
        assert_eq!(p1.draws(3), p2.draws(3));
    }
}
