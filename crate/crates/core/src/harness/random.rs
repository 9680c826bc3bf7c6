//! Random inputs for the property suites.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::assortment::{ChoiceContext, ChoiceModel, FeasibleFamily};
use crate::error::Result;
use crate::fluid::PointProcessSpec;
use crate::model::{Arrival, Instance, Mode, Resource, UsageDistribution};

/// A usage law of any kind, with parameters on the scale of unit gaps.
pub fn random_usage<R: Rng>(rng: &mut R) -> UsageDistribution {
    match rng.random_range(0..6) {
        0 => UsageDistribution::Deterministic {
            duration: round3(rng.random_range(0.1..4.0)),
        },
        1 => UsageDistribution::Exponential {
            rate: round3(rng.random_range(0.2..3.0)),
        },
        2 => {
            let low = round3(rng.random_range(0.1..2.0));
            UsageDistribution::TwoPoint {
                low,
                high: low + round3(rng.random_range(0.1..3.0)),
                p_low: round3(rng.random_range(0.05..0.95)),
            }
        }
        3 => UsageDistribution::Geometric {
            p: round3(rng.random_range(0.1..0.9)),
            step: round3(rng.random_range(0.2..1.5)),
        },
        4 => random_discrete(rng, 4),
        _ => UsageDistribution::Infinite,
    }
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

/// Empirical law on 1..=`max_atoms` atoms at multiples of 0.5.
pub fn random_discrete<R: Rng>(rng: &mut R, max_atoms: usize) -> UsageDistribution {
    let atoms = rng.random_range(1..=max_atoms);
    let mut values: Vec<f64> = (1..=8).map(|k| 0.5 * k as f64).collect();
    values.shuffle(rng);
    values.truncate(atoms);
    values.sort_by(f64::total_cmp);
    let mut probs: Vec<f64> = (0..atoms).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    // make the sum exactly one
    let head: f64 = probs[..atoms - 1].iter().sum();
    probs[atoms - 1] = 1.0 - head;
    UsageDistribution::EmpiricalDiscrete { values, probs }
}

/// Probability with extra mass at exactly 0 and 1.
fn random_prob<R: Rng>(rng: &mut R) -> f64 {
    match rng.random_range(0..10) {
        0 => 0.0,
        1 => 1.0,
        _ => rng.random(),
    }
}

/// Random `(F, sigma, p)` with `1..=max_points` points.
pub fn random_point_spec<R: Rng>(rng: &mut R, max_points: usize) -> PointProcessSpec {
    let n = rng.random_range(1..=max_points);
    let mut sigma = rng.random_range(0.1..1.0);
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        points.push(sigma);
        // gaps sometimes land on lattice values so atoms are hit exactly
        sigma += if rng.random_bool(0.3) {
            0.5 * rng.random_range(1..4) as f64
        } else {
            rng.random_range(0.05..2.0)
        };
    }
    let probs = (0..n).map(|_| random_prob(rng)).collect();
    PointProcessSpec::new(random_usage(rng), points, probs).expect("valid by construction")
}

/// Two specs on the same `(F, sigma)` with `lo <= hi` pointwise.
pub fn random_monotone_pair<R: Rng>(rng: &mut R, max_points: usize) -> (PointProcessSpec, PointProcessSpec) {
    let hi = random_point_spec(rng, max_points);
    let lo_probs = hi
        .probs()
        .iter()
        .map(|&p| match rng.random_range(0..4) {
            0 => p,
            1 => 0.0,
            _ => p * rng.random::<f64>(),
        })
        .collect();
    let lo = hi.with_probs(lo_probs).expect("valid");
    (lo, hi)
}

/// Mixture of MNL models over `items`: regular, hence substitutable.
pub fn random_mixture_table<R: Rng>(rng: &mut R, items: &[usize]) -> Result<ChoiceModel> {
    let classes = rng.random_range(1..=3);
    let mix: Vec<f64> = {
        let raw: Vec<f64> = (0..classes).map(|_| rng.random_range(0.1..1.0)).collect();
        let total: f64 = raw.iter().sum();
        raw.iter().map(|x| x / total).collect()
    };
    let weights: Vec<Vec<f64>> = (0..classes)
        .map(|_| items.iter().map(|_| rng.random_range(0.05..3.0)).collect())
        .collect();
    table_from(items, |set_pos| {
        set_pos
            .iter()
            .map(|&a| {
                (0..classes)
                    .map(|c| {
                        let den = 1.0 + set_pos.iter().map(|&b| weights[c][b]).sum::<f64>();
                        mix[c] * weights[c][a] / den
                    })
                    .sum()
            })
            .collect()
    })
}

/// Customers with random preference lists who buy their first offered item,
/// if it comes before their outside option.
pub fn random_ranking_table<R: Rng>(rng: &mut R, items: &[usize]) -> Result<ChoiceModel> {
    let types = rng.random_range(1..=4);
    let mut lists = Vec::with_capacity(types);
    for _ in 0..types {
        let mut order: Vec<usize> = (0..items.len()).collect();
        order.shuffle(rng);
        order.truncate(rng.random_range(0..=items.len()));
        lists.push((rng.random_range(0.1..1.0), order));
    }
    let total: f64 = lists.iter().map(|(w, _)| w).sum();
    table_from(items, |set_pos| {
        let mut probs = vec![0.0; set_pos.len()];
        for (w, order) in &lists {
            if let Some(first) = order.iter().find(|a| set_pos.contains(a)) {
                probs[set_pos.iter().position(|b| b == first).expect("member")] += w / total;
            }
        }
        probs
    })
}

/// Table over every non-empty subset of `items`; `f` gets positions into `items`.
fn table_from(items: &[usize], f: impl Fn(&[usize]) -> Vec<f64>) -> Result<ChoiceModel> {
    let n = items.len();
    let mut entries = Vec::with_capacity((1usize << n) - 1);
    for mask in 1u32..(1u32 << n) {
        let pos: Vec<usize> = (0..n).filter(|b| mask >> b & 1 == 1).collect();
        let probs = f(&pos);
        entries.push((pos.iter().map(|&b| items[b]).collect(), probs));
    }
    ChoiceModel::table(entries)
}

/// `(S, model, targets)` with `|S| <= max_items`; targets are random fractions
/// of `phi(S, s)`, some exactly zero or exactly `phi`.
pub fn random_pmatch_triple<R: Rng>(rng: &mut R, max_items: usize) -> Result<(Vec<usize>, ChoiceModel, Vec<f64>)> {
    let n = rng.random_range(1..=max_items);
    let mut pool: Vec<usize> = (0..2 * max_items).collect();
    pool.shuffle(rng);
    let mut set: Vec<usize> = pool[..n].to_vec();
    set.sort_unstable();
    let model = match rng.random_range(0..3) {
        0 => ChoiceModel::mnl(set.iter().map(|&i| (i, rng.random_range(0.05..3.0))).collect())?,
        1 => random_mixture_table(rng, &set)?,
        _ => random_ranking_table(rng, &set)?,
    };
    let targets = set
        .iter()
        .map(|&s| {
            let phi = model.phi(&set, s);
            match rng.random_range(0..8) {
                0 => 0.0,
                1 => phi,
                _ => phi * rng.random::<f64>(),
            }
        })
        .collect();
    Ok((set, model, targets))
}

/// Tiny matching instance for the exact solver: `t <= max_arrivals`, total
/// capacity `<= max_units`, every capacity `>= min_capacity`, discrete laws with
/// at most three atoms and times on a half-unit grid.
pub fn random_tiny_instance<R: Rng>(
    rng: &mut R,
    max_arrivals: usize,
    max_units: usize,
    min_capacity: u32,
) -> Result<Instance> {
    let max_resources = (max_units / min_capacity as usize).max(1);
    let n = rng.random_range(1..=max_resources.min(3));
    let mut left = max_units;
    let mut resources = Vec::with_capacity(n);
    for i in 0..n {
        let reserve = (n - i - 1) * min_capacity as usize;
        let cap = rng.random_range(min_capacity as usize..=(left - reserve).max(min_capacity as usize));
        left -= cap;
        let usage = match rng.random_range(0..4) {
            0 => UsageDistribution::Infinite,
            1 => UsageDistribution::Deterministic {
                duration: 0.5 * rng.random_range(1..8) as f64,
            },
            _ => random_discrete(rng, 3),
        };
        resources.push(Resource {
            id: format!("r{i}"),
            capacity: cap as u32,
            reward: round3(rng.random_range(0.2..3.0)),
            usage,
        });
    }
    let t = rng.random_range(1..=max_arrivals);
    let mut now = 0.0;
    let mut arrivals = Vec::with_capacity(t);
    for s in 0..t {
        if s > 0 {
            now += 0.5 * rng.random_range(1..5) as f64;
        }
        let mut edges: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.7)).collect();
        if edges.is_empty() {
            edges.push(rng.random_range(0..n));
        }
        arrivals.push(Arrival::matching(now, edges));
    }
    Instance::new(Mode::Matching, resources, arrivals)
}

/// Assortment arrivals whose model is "buy the single offered item", on the
/// given matching instance's neighborhoods.
pub fn single_choice_twin(matching: &Instance) -> Result<Instance> {
    let arrivals = matching
        .arrivals()
        .iter()
        .map(|a| {
            let model = ChoiceModel::single_choice(a.edges())?;
            Ok(Arrival::choice(a.time, ChoiceContext::new(model, FeasibleFamily::All)))
        })
        .collect::<Result<Vec<_>>>()?;
    Instance::new(Mode::Assortment, matching.resources().to_vec(), arrivals)
}
