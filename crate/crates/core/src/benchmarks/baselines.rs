//! Integral online baselines driven by the same sample paths as the rounding.

use crate::error::Result;
use crate::guide::exp_tradeoff;
use crate::model::{Decision, Instance, InventoryState, Mode, RejectReason, RunRecord, SamplePath};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Rule {
    Greedy,
    Ib,
    Rba,
}

/// Greedy picks by reward. IB discounts by the free fraction of the inventory,
/// RBA by the rank of the highest free unit and then commits that unit.
fn run_rule(instance: &Instance, path: &SamplePath, rule: Rule) -> Result<RunRecord> {
    instance.require_mode(Mode::Matching)?;
    let name = match rule {
        Rule::Greedy => "greedy",
        Rule::Ib => "ib",
        Rule::Rba => "rba",
    };
    let mut inventory = InventoryState::new(instance);
    let mut record = RunRecord::new(name, path.seed, instance.num_arrivals());
    for arrival in instance.arrivals() {
        let now = arrival.time;
        let snapshot = inventory.snapshot(now);
        let mut best: Option<(usize, usize, f64)> = None;
        for &i in arrival.edges() {
            let r = &instance.resources()[i];
            let c = r.capacity as f64;
            let (unit, score) = match rule {
                Rule::Greedy => (inventory.lowest_free(i, now), r.reward),
                Rule::Ib => (
                    inventory.lowest_free(i, now),
                    r.reward * (1.0 - exp_tradeoff(snapshot[i] as f64 / c)),
                ),
                Rule::Rba => {
                    let k = inventory.highest_free(i, now);
                    (
                        k,
                        k.map_or(0.0, |k| r.reward * (1.0 - exp_tradeoff((k + 1) as f64 / c))),
                    )
                }
            };
            let Some(k) = unit else { continue };
            if score > 0.0 && best.is_none_or(|(_, _, s)| score > s) {
                best = Some((i, k, score));
            }
        }
        match best {
            Some((i, k, _)) => {
                inventory.commit(i, k, now, path);
                record.push(
                    snapshot,
                    Decision::Match { resource: i, unit: k },
                    instance.resources()[i].reward,
                );
            }
            None => record.push(snapshot, Decision::Reject(RejectReason::NotSelected), 0.0),
        }
    }
    Ok(record)
}

/// Highest reward among resources with a free unit; ties to the lowest index.
pub fn run_greedy(instance: &Instance, path: &SamplePath) -> Result<RunRecord> {
    run_rule(instance, path, Rule::Greedy)
}

/// Inventory balancing: price `r_i (1 - g(free_i / c_i))`.
pub fn run_ib(instance: &Instance, path: &SamplePath) -> Result<RunRecord> {
    run_rule(instance, path, Rule::Ib)
}

/// Ranking-based allocation: price `r_i (1 - g(z / c_i))` with `z` the rank of
/// the highest free unit, which is the one committed.
pub fn run_rba(instance: &Instance, path: &SamplePath) -> Result<RunRecord> {
    run_rule(instance, path, Rule::Rba)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{draw_sample_path, Arrival, Resource, UsageDistribution};

    fn inst(rewards: &[f64], capacity: u32, usage: UsageDistribution, arrivals: Vec<Arrival>) -> Instance {
        let resources = rewards
            .iter()
            .enumerate()
            .map(|(i, &r)| Resource {
                id: format!("r{i}"),
                capacity,
                reward: r,
                usage: usage.clone(),
            })
            .collect();
        Instance::new(Mode::Matching, resources, arrivals).unwrap()
    }

    #[test]
    fn greedy_takes_the_only_option_then_rejects() {
        let i = inst(
            &[1.0],
            1,
            UsageDistribution::Infinite,
            vec![Arrival::matching(0.0, vec![0]), Arrival::matching(1.0, vec![0])],
        );
        let rec = run_greedy(&i, &draw_sample_path(&i, 0)).unwrap();
        assert_eq!(rec.decisions[0], Decision::Match { resource: 0, unit: 0 });
        assert_eq!(rec.decisions[1], Decision::Reject(RejectReason::NotSelected));
    }

    #[test]
    fn ib_prefers_fuller_inventory() {
        // resource 1 loses 4 of 5 units first, leaving fractions (1.0, 0.2)
        let mut arrivals: Vec<Arrival> = (0..4).map(|t| Arrival::matching(t as f64, vec![1])).collect();
        arrivals.push(Arrival::matching(4.0, vec![0, 1]));
        let i = inst(&[1.0, 1.0], 5, UsageDistribution::Infinite, arrivals);
        let rec = run_ib(&i, &draw_sample_path(&i, 0)).unwrap();
        assert_eq!(rec.inventory[4], vec![5, 1]);
        assert_eq!(rec.decisions[4].served_by(), Some(0));
        let full = inst(
            &[2.0, 1.0],
            3,
            UsageDistribution::Infinite,
            vec![Arrival::matching(0.0, vec![0, 1])],
        );
        assert_eq!(
            run_ib(&full, &draw_sample_path(&full, 0)).unwrap().decisions[0].served_by(),
            Some(0)
        );
    }

    #[test]
    fn rba_equals_ib_at_unit_capacity() {
        let arrivals = (0..12)
            .map(|t| Arrival::matching(t as f64 * 0.7, vec![t % 3, (t + 1) % 3]))
            .collect();
        let i = inst(
            &[1.0, 1.5, 0.8],
            1,
            UsageDistribution::Exponential { rate: 1.0 },
            arrivals,
        );
        for seed in 0..50 {
            let path = draw_sample_path(&i, seed);
            assert_eq!(
                run_rba(&i, &path).unwrap().decisions,
                run_ib(&i, &path).unwrap().decisions
            );
        }
    }

    #[test]
    fn rba_commits_highest_free_unit() {
        let i = inst(
            &[1.0],
            2,
            UsageDistribution::Infinite,
            vec![Arrival::matching(0.0, vec![0]), Arrival::matching(1.0, vec![0])],
        );
        let rec = run_rba(&i, &draw_sample_path(&i, 0)).unwrap();
        assert_eq!(rec.decisions[0], Decision::Match { resource: 0, unit: 1 });
        assert_eq!(rec.decisions[1], Decision::Match { resource: 0, unit: 0 });
    }
}
