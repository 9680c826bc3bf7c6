//! The single-unit `(F, sigma, p)` activation process and its fluid counterpart.
//!
//! A unit starts available. At each point `sigma_t`, if it is available, it is
//! activated with probability `p_t`, earns one unit of reward and stays in use
//! for a duration drawn from `F`. In the fluid version a fraction `p_t` of the
//! available mass is consumed instead and returns deterministically along `F`.
//! The probability of availability at each point in the random process equals
//! the available fraction in the fluid process, so the fluid recursion is an
//! exact evaluator of the expected reward.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{has_returned, UsageDistribution};
use crate::stats::{replicate, stream_rng, Summary};

/// Availability at or below this is treated as exactly zero.
pub const ZERO_AVAILABILITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointProcessSpec {
    dist: UsageDistribution,
    points: Vec<f64>,
    probs: Vec<f64>,
}

impl PointProcessSpec {
    pub fn new(dist: UsageDistribution, points: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        dist.validate()?;
        if points.len() != probs.len() {
            return Err(Error::Argument(format!(
                "{} points but {} probabilities",
                points.len(),
                probs.len()
            )));
        }
        if points.first().is_some_and(|&s| s <= 0.0) || points.iter().any(|s| !s.is_finite()) {
            return Err(Error::Argument("points must be finite and strictly positive".into()));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Argument("points must be strictly increasing".into()));
        }
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::Argument("probabilities must lie in [0,1]".into()));
        }
        Ok(PointProcessSpec { dist, points, probs })
    }

    /// Builds a spec on algorithm arrival times, which may start at 0: every time is
    /// shifted by +1 (only gaps matter to the process).
    pub fn from_arrival_times(dist: UsageDistribution, times: &[f64], probs: Vec<f64>) -> Result<Self> {
        Self::new(dist, times.iter().map(|a| a + 1.0).collect(), probs)
    }

    pub fn dist(&self) -> &UsageDistribution {
        &self.dist
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn with_probs(&self, probs: Vec<f64>) -> Result<Self> {
        Self::new(self.dist.clone(), self.points.clone(), probs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluidTrace {
    /// Available fraction `eta(sigma_t)` just before each point.
    pub availability: Vec<f64>,
    /// `sum_t p_t * eta(sigma_t)`.
    pub reward: f64,
}

/// Forward evaluation of the availability recursion, `O(T^2)`.
///
/// `eta_1 = 1` and
/// `eta_t = eta_{t-1} (1 - p_{t-1}) + sum_{tau < t} eta_tau p_tau (F(sigma_t - sigma_tau) - F(sigma_{t-1} - sigma_tau))`,
/// except that mass consumed at `sigma_{t-1}` is credited from zero: whatever
/// returns with duration 0 is available again at the next point.
pub fn fluid_availability(spec: &PointProcessSpec) -> FluidTrace {
    let n = spec.len();
    let (points, probs, dist) = (&spec.points, &spec.probs, &spec.dist);
    let mut eta = Vec::with_capacity(n);
    for t in 0..n {
        if t == 0 {
            eta.push(1.0);
            continue;
        }
        let mut value = eta[t - 1] * (1.0 - probs[t - 1]);
        for tau in 0..t {
            let consumed = eta[tau] * probs[tau];
            if consumed == 0.0 {
                continue;
            }
            let upper = dist.cdf(points[t] - points[tau]);
            let lower = if tau == t - 1 {
                0.0
            } else {
                dist.cdf(points[t - 1] - points[tau])
            };
            value += consumed * (upper - lower);
        }
        debug_assert!(
            (-1e-9..=1.0 + 1e-9).contains(&value),
            "fluid availability left [0,1]: {value} at point {t}"
        );
        eta.push(value.clamp(0.0, 1.0));
    }
    let reward = eta.iter().zip(probs).map(|(e, p)| e * p).sum();
    FluidTrace {
        availability: eta,
        reward,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomProcessEstimate {
    pub reward: Summary,
    /// Fraction of replications in which the unit was free at each point.
    pub availability_freq: Vec<f64>,
}

/// Monte Carlo of the random process. Replication `r` reads ChaCha stream `r`
/// under `seed`, so the estimate is reproducible regardless of thread count.
pub fn simulate_random_process(
    spec: &PointProcessSpec,
    replications: usize,
    seed: u64,
) -> Result<RandomProcessEstimate> {
    if replications == 0 {
        return Err(Error::Argument("replications must be >= 1".into()));
    }
    let n = spec.len();
    let runs = replicate(replications, |r| {
        let mut rng = stream_rng(seed, r as u64);
        let mut last_use = (0.0, f64::NEG_INFINITY);
        let mut reward = 0u32;
        let mut free_mask = Vec::with_capacity(n);
        for t in 0..n {
            let sigma = spec.points[t];
            let free = has_returned(last_use.0, last_use.1, sigma);
            free_mask.push(free);
            if free && rng.random::<f64>() < spec.probs[t] {
                reward += 1;
                last_use = (sigma, spec.dist.sample(&mut rng));
            }
        }
        (reward, free_mask)
    });
    let mut counts = vec![0usize; n];
    for (_, mask) in &runs {
        for (c, &free) in counts.iter_mut().zip(mask) {
            *c += free as usize;
        }
    }
    Ok(RandomProcessEstimate {
        reward: Summary::of(runs.iter().map(|(r, _)| *r as f64)),
        availability_freq: counts.iter().map(|&c| c as f64 / replications as f64).collect(),
    })
}

/// Sets `p_t = 1` at every point where the fluid availability is zero. The
/// expected reward does not change: an unavailable unit cannot be activated.
pub fn augment_zero_set(spec: &PointProcessSpec) -> PointProcessSpec {
    let trace = fluid_availability(spec);
    let probs = spec
        .probs
        .iter()
        .zip(&trace.availability)
        .map(|(&p, &eta)| if eta <= ZERO_AVAILABILITY_TOL { 1.0 } else { p })
        .collect();
    PointProcessSpec { probs, ..spec.clone() }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotoneWitness {
    pub reward_lo: f64,
    pub reward_hi: f64,
    pub holds: bool,
}

/// Compares fluid rewards of two specs on the same `(F, sigma)` whose
/// probabilities satisfy `lo <= hi` pointwise.
pub fn compare_monotone(spec_lo: &PointProcessSpec, spec_hi: &PointProcessSpec) -> Result<MonotoneWitness> {
    if spec_lo.dist != spec_hi.dist || spec_lo.points != spec_hi.points {
        return Err(Error::Argument(
            "specs must share the distribution and the points".into(),
        ));
    }
    if let Some(t) = spec_lo.probs.iter().zip(&spec_hi.probs).position(|(lo, hi)| lo > hi) {
        return Err(Error::Argument(format!(
            "probabilities are not pointwise comparable at point {t}: {} > {}",
            spec_lo.probs[t], spec_hi.probs[t]
        )));
    }
    let reward_lo = fluid_availability(spec_lo).reward;
    let reward_hi = fluid_availability(spec_hi).reward;
    Ok(MonotoneWitness {
        reward_lo,
        reward_hi,
        holds: reward_lo <= reward_hi + 1e-9,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(dist: UsageDistribution, points: &[f64], probs: &[f64]) -> PointProcessSpec {
        PointProcessSpec::new(dist, points.to_vec(), probs.to_vec()).unwrap()
    }

    #[test]
    fn return_exactly_on_a_point_counts_on_both_sides() {
        // 0.9054 + 1.0 - 0.9054 rounds below 1.0
        let (a, d) = (0.9054, 1.0);
        let s = spec(
            UsageDistribution::Deterministic { duration: d },
            &[a, a + d],
            &[1.0, 1.0],
        );
        let fluid = fluid_availability(&s);
        let mc = simulate_random_process(&s, 200, 1).unwrap();
        assert_eq!(fluid.availability[1], mc.availability_freq[1]);
        assert_eq!(fluid.reward, mc.reward.mean);
    }

    #[test]
    fn single_point_base_case() {
        let tr = fluid_availability(&spec(UsageDistribution::Exponential { rate: 1.0 }, &[3.0], &[1.0]));
        assert_eq!(tr.availability, vec![1.0]);
        assert_eq!(tr.reward, 1.0);
    }

    #[test]
    fn exponential_two_points_by_hand() {
        // eta_2 = 1*(1-1) + 1*1*(F(1) - 0) = 1 - e^-1
        let tr = fluid_availability(&spec(
            UsageDistribution::Exponential { rate: 1.0 },
            &[0.5, 1.5],
            &[1.0, 1.0],
        ));
        let expected = 1.0 - (-1.0f64).exp();
        assert!((tr.availability[1] - expected).abs() < 1e-15);
        assert!((tr.reward - 1.632_120_558_828_557_7).abs() < 1e-12);
    }

    #[test]
    fn deterministic_step_respects_right_continuity() {
        let det = UsageDistribution::Deterministic { duration: 1.0 };
        let early = fluid_availability(&spec(det.clone(), &[1.0, 1.9], &[1.0, 1.0]));
        assert_eq!(early.availability, vec![1.0, 0.0]);
        assert_eq!(early.reward, 1.0);
        let on_time = fluid_availability(&spec(det, &[1.0, 2.0], &[1.0, 1.0]));
        assert_eq!(on_time.availability, vec![1.0, 1.0]);
        assert_eq!(on_time.reward, 2.0);
    }

    #[test]
    fn zero_duration_returns_by_next_point() {
        let tr = fluid_availability(&spec(
            UsageDistribution::Deterministic { duration: 0.0 },
            &[1.0, 2.0, 3.0],
            &[1.0; 3],
        ));
        assert_eq!(tr.availability, vec![1.0; 3]);
        let mc = simulate_random_process(
            &spec(
                UsageDistribution::Deterministic { duration: 0.0 },
                &[1.0, 2.0, 3.0],
                &[1.0; 3],
            ),
            50,
            1,
        )
        .unwrap();
        assert_eq!(mc.reward.mean, 3.0);
    }

    #[test]
    fn non_reusable_unit_pays_once() {
        let s = spec(UsageDistribution::Infinite, &[1.0, 2.0, 5.0], &[1.0; 3]);
        let mc = simulate_random_process(&s, 1000, 3).unwrap();
        assert_eq!(mc.reward.mean, 1.0);
        assert_eq!(mc.reward.std_err, 0.0);
        assert_eq!(fluid_availability(&s).reward, 1.0);
    }

    #[test]
    fn zero_probabilities_earn_nothing() {
        let s = spec(UsageDistribution::Exponential { rate: 2.0 }, &[1.0, 2.0], &[0.0, 0.0]);
        assert_eq!(simulate_random_process(&s, 100, 0).unwrap().reward.mean, 0.0);
        assert_eq!(augment_zero_set(&s), s);
    }

    #[test]
    fn monte_carlo_agrees_with_recursion() {
        let s = spec(UsageDistribution::Exponential { rate: 1.0 }, &[0.5, 1.5], &[1.0, 1.0]);
        let mc = simulate_random_process(&s, 100_000, 17).unwrap();
        let exact = fluid_availability(&s);
        assert!(
            (mc.reward.mean - exact.reward).abs() <= 3.0 * mc.reward.std_err,
            "{mc:?}"
        );
        for (f, eta) in mc.availability_freq.iter().zip(&exact.availability) {
            let se = (eta * (1.0 - eta) / 1e5).sqrt();
            assert!((f - eta).abs() <= 3.0 * se + 1e-12);
        }
    }

    #[test]
    fn augment_marks_unavailable_points() {
        let det = UsageDistribution::Deterministic { duration: 1.0 };
        let s = spec(det, &[1.0, 1.9, 2.5], &[1.0, 0.3, 0.5]);
        let aug = augment_zero_set(&s);
        assert_eq!(aug.probs(), &[1.0, 1.0, 0.5]);
        assert!((fluid_availability(&aug).reward - fluid_availability(&s).reward).abs() < 1e-12);
    }

    #[test]
    fn monotone_comparison() {
        let d = UsageDistribution::TwoPoint {
            low: 0.5,
            high: 3.0,
            p_low: 0.5,
        };
        let lo = spec(d.clone(), &[1.0, 2.0, 3.0], &[0.2, 0.5, 0.1]);
        let hi = spec(d.clone(), &[1.0, 2.0, 3.0], &[0.4, 0.5, 1.0]);
        let w = compare_monotone(&lo, &hi).unwrap();
        assert!(w.holds && w.reward_lo <= w.reward_hi);
        let same = compare_monotone(&lo, &lo).unwrap();
        assert_eq!(same.reward_lo, same.reward_hi);
        assert!(compare_monotone(&hi, &lo).is_err());
        let zero = spec(d, &[1.0, 2.0, 3.0], &[0.0; 3]);
        assert_eq!(compare_monotone(&zero, &hi).unwrap().reward_lo, 0.0);
    }

    #[test]
    fn rejects_bad_specs() {
        let d = UsageDistribution::Exponential { rate: 1.0 };
        assert!(PointProcessSpec::new(d.clone(), vec![0.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(PointProcessSpec::new(d.clone(), vec![2.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(PointProcessSpec::new(d.clone(), vec![1.0], vec![1.5]).is_err());
        assert!(PointProcessSpec::new(d, vec![1.0], vec![]).is_err());
    }
}
