use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Law of the time a matched unit stays in use.
///
/// `cdf` is right-continuous: a unit matched at `a` with realized duration `d`
/// is available again for an arrival at exactly `a + d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum UsageDistribution {
    Deterministic {
        duration: f64,
    },
    Exponential {
        rate: f64,
    },
    /// `low` with probability `p_low`, otherwise `high`.
    TwoPoint {
        low: f64,
        high: f64,
        p_low: f64,
    },
    /// `step * K` with `K` geometric on `{1, 2, ...}` and success probability `p`.
    Geometric {
        p: f64,
        #[serde(default = "unit_step")]
        step: f64,
    },
    EmpiricalDiscrete {
        values: Vec<f64>,
        probs: Vec<f64>,
    },
    /// All mass at +infinity: the unit never comes back (classic non-reusable inventory).
    Infinite,
}

fn unit_step() -> f64 {
    1.0
}

// Slack for landing exactly on a lattice point of a geometric distribution.
const LATTICE_EPS: f64 = 1e-9;

impl UsageDistribution {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Validation(msg));
        match *self {
            UsageDistribution::Deterministic { duration } => {
                if !(duration.is_finite() && duration >= 0.0) {
                    return bad(format!(
                        "deterministic duration must be finite and >= 0, got {duration}"
                    ));
                }
            }
            UsageDistribution::Exponential { rate } => {
                if !(rate.is_finite() && rate > 0.0) {
                    return bad(format!("exponential rate must be positive, got {rate}"));
                }
            }
            UsageDistribution::TwoPoint { low, high, p_low } => {
                if !(low.is_finite() && high.is_finite() && 0.0 <= low && low <= high) {
                    return bad(format!("two_point needs 0 <= low <= high, got ({low}, {high})"));
                }
                if !(0.0..=1.0).contains(&p_low) {
                    return bad(format!("two_point p_low must lie in [0,1], got {p_low}"));
                }
            }
            UsageDistribution::Geometric { p, step } => {
                if !(p > 0.0 && p <= 1.0) {
                    return bad(format!("geometric p must lie in (0,1], got {p}"));
                }
                if !(step.is_finite() && step > 0.0) {
                    return bad(format!("geometric step must be positive, got {step}"));
                }
            }
            UsageDistribution::EmpiricalDiscrete { ref values, ref probs } => {
                if values.is_empty() || values.len() != probs.len() {
                    return bad("empirical_discrete needs matching, non-empty values and probs".into());
                }
                if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return bad("empirical_discrete values must be finite and >= 0".into());
                }
                if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
                    return bad("empirical_discrete probs must be >= 0".into());
                }
                let total: f64 = probs.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return bad(format!("empirical_discrete probs sum to {total}, expected 1"));
                }
            }
            UsageDistribution::Infinite => {}
        }
        Ok(())
    }

    /// `P(duration <= d)`.
    pub fn cdf(&self, d: f64) -> f64 {
        if d < 0.0 || d.is_nan() {
            return 0.0;
        }
        match *self {
            UsageDistribution::Deterministic { duration } => {
                if d >= duration {
                    1.0
                } else {
                    0.0
                }
            }
            UsageDistribution::Exponential { rate } => -(-rate * d).exp_m1(),
            UsageDistribution::TwoPoint { low, high, p_low } => {
                let mut mass = 0.0;
                if d >= low {
                    mass += p_low;
                }
                if d >= high {
                    mass += 1.0 - p_low;
                }
                mass.min(1.0)
            }
            UsageDistribution::Geometric { p, step } => {
                let k = (d / step + LATTICE_EPS).floor();
                if k < 1.0 {
                    0.0
                } else if p >= 1.0 {
                    1.0
                } else {
                    1.0 - (1.0 - p).powf(k)
                }
            }
            UsageDistribution::EmpiricalDiscrete { ref values, ref probs } => values
                .iter()
                .zip(probs)
                .filter(|(v, _)| **v <= d)
                .map(|(_, p)| *p)
                .sum::<f64>()
                .min(1.0),
            UsageDistribution::Infinite => 0.0,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            UsageDistribution::Deterministic { duration } => duration,
            UsageDistribution::Exponential { rate } => Exp::new(rate).expect("validated rate").sample(rng),
            UsageDistribution::TwoPoint { low, high, p_low } => {
                if rng.random::<f64>() < p_low {
                    low
                } else {
                    high
                }
            }
            UsageDistribution::Geometric { p, step } => {
                let mut k = 1u64;
                if p < 1.0 {
                    // inverse transform: K = ceil(ln U / ln(1-p))
                    let u: f64 = 1.0 - rng.random::<f64>();
                    k = (u.ln() / (1.0 - p).ln()).ceil().max(1.0) as u64;
                }
                step * k as f64
            }
            UsageDistribution::EmpiricalDiscrete { ref values, ref probs } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (v, p) in values.iter().zip(probs) {
                    acc += p;
                    if u < acc {
                        return *v;
                    }
                }
                *values.last().expect("validated non-empty")
            }
            UsageDistribution::Infinite => f64::INFINITY,
        }
    }

    /// Atoms `(value, probability)` when the support is finite, otherwise empty.
    /// The non-reusable law reports a single atom at +infinity.
    pub fn discrete_support(&self) -> Vec<(f64, f64)> {
        match *self {
            UsageDistribution::Deterministic { duration } => vec![(duration, 1.0)],
            UsageDistribution::TwoPoint { low, high, p_low } => {
                if low == high {
                    vec![(low, 1.0)]
                } else {
                    vec![(low, p_low), (high, 1.0 - p_low)]
                }
            }
            UsageDistribution::EmpiricalDiscrete { ref values, ref probs } => {
                let mut atoms: Vec<(f64, f64)> = Vec::new();
                for (&v, &p) in values.iter().zip(probs) {
                    match atoms.iter_mut().find(|(x, _)| *x == v) {
                        Some(atom) => atom.1 += p,
                        None => atoms.push((v, p)),
                    }
                }
                atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
                atoms
            }
            UsageDistribution::Infinite => vec![(f64::INFINITY, 1.0)],
            UsageDistribution::Exponential { .. } | UsageDistribution::Geometric { .. } => Vec::new(),
        }
    }

    pub fn is_non_reusable(&self) -> bool {
        matches!(self, UsageDistribution::Infinite)
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            UsageDistribution::Deterministic { .. } => "deterministic",
            UsageDistribution::Exponential { .. } => "exponential",
            UsageDistribution::TwoPoint { .. } => "two_point",
            UsageDistribution::Geometric { .. } => "geometric",
            UsageDistribution::EmpiricalDiscrete { .. } => "empirical_discrete",
            UsageDistribution::Infinite => "infinite",
        }
    }
}
