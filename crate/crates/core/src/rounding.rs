//! Non-adaptive rounding of the guide with true stochastic inventory.
//!
//! At arrival `t` the guide's fractions, each scaled by `1/(1+delta_i)`, are laid
//! end to end on `[0,1]` in ascending resource order. One uniform draw picks at
//! most one interval; the arrival is matched to that resource iff it has a free
//! unit. The proposal never looks at the realized inventory.

use crate::error::{Error, Result};
use crate::guide::FractionalMatch;
use crate::model::{draw_sample_path, Decision, Instance, InventoryState, Mode, RejectReason, RunRecord, SamplePath};
use crate::stats::{derive_seed, replicate, Summary};

pub const DEFAULT_DELTA_CONSTANT: f64 = 100.0;

/// `delta = sqrt(constant * ln(c) / c)`.
pub fn delta_for_capacity(capacity: u32, constant: f64) -> f64 {
    let c = capacity as f64;
    (constant * c.ln() / c).sqrt()
}

/// Per-resource down-scaling `delta_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaSchedule {
    deltas: Vec<f64>,
}

impl DeltaSchedule {
    pub fn standard(instance: &Instance) -> Self {
        Self::with_constant(instance, DEFAULT_DELTA_CONSTANT)
    }

    pub fn with_constant(instance: &Instance, constant: f64) -> Self {
        DeltaSchedule {
            deltas: instance
                .resources()
                .iter()
                .map(|r| delta_for_capacity(r.capacity, constant))
                .collect(),
        }
    }

    /// No down-scaling. Ablation only: the availability guarantee needs `delta > 0`.
    pub fn zero(instance: &Instance) -> Self {
        Self::uniform(instance, 0.0)
    }

    pub fn uniform(instance: &Instance, delta: f64) -> Self {
        DeltaSchedule {
            deltas: vec![delta; instance.resources().len()],
        }
    }

    pub fn from_values(deltas: Vec<f64>) -> Result<Self> {
        if deltas.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(Error::Argument("deltas must be finite and >= 0".into()));
        }
        Ok(DeltaSchedule { deltas })
    }

    pub fn delta(&self, i: usize) -> f64 {
        self.deltas[i]
    }

    pub fn scale(&self, i: usize) -> f64 {
        1.0 / (1.0 + self.deltas[i])
    }

    pub fn len(&self) -> usize {
        self.deltas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deltas.is_empty()
    }
}

/// Resource whose interval contains `u`, intervals `(lo, hi]` of length
/// `x_i / (1 + delta_i)` in ascending resource order.
pub fn propose(x: &[(usize, f64)], deltas: &DeltaSchedule, u: f64) -> Option<usize> {
    let mut lo = 0.0;
    for &(i, xi) in x {
        let hi = lo + xi * deltas.scale(i);
        if u > lo && u <= hi {
            return Some(i);
        }
        lo = hi;
    }
    None
}

fn check_inputs(instance: &Instance, guide_rows: usize, deltas: &DeltaSchedule, path: &SamplePath) -> Result<()> {
    if guide_rows != instance.num_arrivals() {
        return Err(Error::Argument(format!(
            "guide has {guide_rows} rows for {} arrivals",
            instance.num_arrivals()
        )));
    }
    if deltas.len() != instance.resources().len() {
        return Err(Error::Argument("delta schedule does not match the resources".into()));
    }
    if !path.fits(instance) {
        return Err(Error::Argument("sample path was drawn for a different instance".into()));
    }
    Ok(())
}

pub fn run_alg(
    instance: &Instance,
    guide: &FractionalMatch,
    deltas: &DeltaSchedule,
    path: &SamplePath,
) -> Result<RunRecord> {
    instance.require_mode(Mode::Matching)?;
    check_inputs(instance, guide.rows.len(), deltas, path)?;
    let mut inventory = InventoryState::new(instance);
    let mut record = RunRecord::new("alg", path.seed, instance.num_arrivals());
    for (t, arrival) in instance.arrivals().iter().enumerate() {
        let now = arrival.time;
        let row = &guide.rows[t];
        if row.matched_mass() > 1.0 + 1e-9 {
            return Err(Error::Argument(format!(
                "guide row {t} matches mass {} > 1",
                row.matched_mass()
            )));
        }
        let snapshot = inventory.snapshot(now);
        let (decision, reward) = match propose(&row.x, deltas, path.draws(t).selection) {
            None => (Decision::Reject(RejectReason::NotSelected), 0.0),
            Some(i) => match inventory.lowest_free(i, now) {
                None => (Decision::Reject(RejectReason::Unavailable { resource: i }), 0.0),
                Some(k) => {
                    inventory.commit(i, k, now, path);
                    (Decision::Match { resource: i, unit: k }, instance.resources()[i].reward)
                }
            },
        };
        record.push(snapshot, decision, reward);
    }
    Ok(record)
}

/// Expected outstanding scaled mass `sum_{tau<t} x_{i tau} (1 - F_i(a_t - a_tau)) / (1 + delta_i)`
/// for every `(i, t)` edge, paired with its bound `c_i / (1 + delta_i)`.
pub fn chernoff_premise(
    instance: &Instance,
    guide: &FractionalMatch,
    deltas: &DeltaSchedule,
) -> Vec<(usize, usize, f64, f64)> {
    let arrivals = instance.arrivals();
    let mut out = Vec::new();
    for (t, a) in arrivals.iter().enumerate() {
        for &i in a.edges() {
            let r = &instance.resources()[i];
            let mu: f64 = (0..t)
                .map(|tau| guide.x(i, tau) * (1.0 - r.usage.cdf(a.time - arrivals[tau].time)))
                .sum::<f64>()
                * deltas.scale(i);
            out.push((i, t, mu, r.capacity as f64 * deltas.scale(i)));
        }
    }
    out
}

/// Monte Carlo statistics of `run_alg` over independent sample paths.
#[derive(Debug, Clone)]
pub struct AlgMonteCarlo {
    pub replications: usize,
    pub total: Summary,
    pub per_resource: Vec<Summary>,
    /// `availability[t][i]`: how many replications had a free unit of `i` at `t`.
    pub availability_hits: Vec<Vec<usize>>,
}

impl AlgMonteCarlo {
    pub fn availability(&self, i: usize, t: usize) -> Summary {
        Summary::frequency(self.availability_hits[t][i], self.replications)
    }
}

/// Replication `r` uses the sample path seeded with `derive_seed(seed, r)`.
pub fn alg_monte_carlo(
    instance: &Instance,
    guide: &FractionalMatch,
    deltas: &DeltaSchedule,
    replications: usize,
    seed: u64,
) -> Result<AlgMonteCarlo> {
    if replications == 0 {
        return Err(Error::Argument("replications must be >= 1".into()));
    }
    let runs = replicate(replications, |r| {
        let path = draw_sample_path(instance, derive_seed(seed, r as u64));
        run_alg(instance, guide, deltas, &path)
    });
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let n_res = instance.resources().len();
    let mut hits = vec![vec![0usize; n_res]; instance.num_arrivals()];
    let mut by_resource = vec![Vec::with_capacity(replications); n_res];
    for run in &runs {
        for (t, inv) in run.inventory.iter().enumerate() {
            for (i, &free) in inv.iter().enumerate() {
                hits[t][i] += (free > 0) as usize;
            }
        }
        for (i, r) in run.reward_by_resource(instance).into_iter().enumerate() {
            by_resource[i].push(r);
        }
    }
    Ok(AlgMonteCarlo {
        replications,
        total: Summary::of(runs.iter().map(|r| r.total_reward)),
        per_resource: by_resource.into_iter().map(Summary::of).collect(),
        availability_hits: hits,
    })
}

/// Frequency with which some unit of `resource` is free when `arrival` comes.
#[allow(clippy::too_many_arguments)]
pub fn availability_estimate(
    instance: &Instance,
    guide: &FractionalMatch,
    deltas: &DeltaSchedule,
    resource: usize,
    arrival: usize,
    replications: usize,
    seed: u64,
) -> Result<Summary> {
    if !instance
        .arrivals()
        .get(arrival)
        .is_some_and(|a| a.edges().contains(&resource))
    {
        return Err(Error::Argument(format!(
            "no edge between resource {resource} and arrival {arrival}"
        )));
    }
    let mc = alg_monte_carlo(instance, guide, deltas, replications, seed)?;
    Ok(mc.availability(resource, arrival))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::guide::{run_galg, MatchRow};
    use crate::model::{Arrival, Resource, UsageDistribution};

    fn single(capacity: u32, usage: UsageDistribution, arrivals: usize) -> Instance {
        Instance::new(
            Mode::Matching,
            vec![Resource {
                id: "a".into(),
                capacity,
                reward: 3.0,
                usage,
            }],
            (0..arrivals).map(|t| Arrival::matching(t as f64, vec![0])).collect(),
        )
        .unwrap()
    }

    #[test]
    fn delta_at_capacity_100() {
        let d = delta_for_capacity(100, 100.0);
        assert!((d - 100f64.ln().sqrt()).abs() < 1e-12);
        assert!((d - 2.145_966).abs() < 1e-6);
        assert!((1.0 / (1.0 + d) - 0.317_868).abs() < 1e-6);
        assert_eq!(delta_for_capacity(1, 100.0), 0.0);
    }

    #[test]
    fn zero_guide_rejects_everything() {
        let inst = single(2, UsageDistribution::Infinite, 5);
        let guide = FractionalMatch {
            rows: vec![MatchRow::default(); 5],
        };
        let path = draw_sample_path(&inst, 1);
        let rec = run_alg(&inst, &guide, &DeltaSchedule::standard(&inst), &path).unwrap();
        assert_eq!(rec.total_reward, 0.0);
        assert_eq!(rec.rejections(), 5);
    }

    #[test]
    fn degenerate_interval_rule() {
        let inst = single(1, UsageDistribution::Infinite, 2);
        let full = MatchRow::from_units(vec![crate::guide::UnitShare {
            resource: 0,
            unit: 0,
            amount: 1.0,
        }]);
        let guide = FractionalMatch {
            rows: vec![full.clone(), full],
        };
        for seed in 0..20 {
            let path = draw_sample_path(&inst, seed);
            let rec = run_alg(&inst, &guide, &DeltaSchedule::zero(&inst), &path).unwrap();
            assert_eq!(rec.total_reward, 3.0);
            assert_eq!(
                rec.decisions[1],
                Decision::Reject(RejectReason::Unavailable { resource: 0 })
            );
        }
    }

    #[test]
    fn first_arrival_always_sees_full_inventory() {
        let inst = single(4, UsageDistribution::Exponential { rate: 0.5 }, 6);
        let (guide, _) = run_galg(&inst).unwrap();
        let f = availability_estimate(&inst, &guide, &DeltaSchedule::standard(&inst), 0, 0, 200, 3).unwrap();
        assert_eq!(f.mean, 1.0);
        let huge = DeltaSchedule::uniform(&inst, 1e12);
        let f = availability_estimate(&inst, &guide, &huge, 0, 5, 200, 3).unwrap();
        assert_eq!(f.mean, 1.0);
    }

    #[test]
    fn mismatched_guide_is_an_argument_error() {
        let inst = single(1, UsageDistribution::Infinite, 3);
        let guide = FractionalMatch { rows: vec![] };
        let path = draw_sample_path(&inst, 0);
        assert!(matches!(
            run_alg(&inst, &guide, &DeltaSchedule::zero(&inst), &path),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn selection_probability_is_scaled_fraction() {
        let inst = single(100, UsageDistribution::Infinite, 1);
        let (guide, _) = run_galg(&inst).unwrap();
        let deltas = DeltaSchedule::standard(&inst);
        let mc = alg_monte_carlo(&inst, &guide, &deltas, 20_000, 8).unwrap();
        let expected = 3.0 * deltas.scale(0);
        assert!(
            (mc.total.mean - expected).abs() < 3.0 * mc.total.std_err + 1e-12,
            "{:?}",
            mc.total
        );
    }
}
