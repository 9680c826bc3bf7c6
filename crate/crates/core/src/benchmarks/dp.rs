//! Exact clairvoyant optimum on tiny instances with discrete usage laws.
//!
//! The information state at arrival `t` lists, per resource, the arrival
//! indices at which its still-busy units were committed. Units of a resource
//! are exchangeable, so the multiset is enough. Between epochs each busy unit
//! returns independently with its conditional CDF increment.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::guide::exp_tradeoff;
use crate::model::{Decision, Instance, Mode, RejectReason, RunRecord, SamplePath};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DpLimits {
    pub max_arrivals: usize,
    pub max_total_capacity: usize,
    pub max_support: usize,
}

impl Default for DpLimits {
    fn default() -> Self {
        DpLimits {
            max_arrivals: 10,
            max_total_capacity: 6,
            max_support: 3,
        }
    }
}

/// Decision rule the solver optimizes over or evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DpPolicy {
    Optimal,
    Greedy,
    Ib,
}

/// `busy[i]`: commit epochs of the busy units of `i`, ascending.
type State = Vec<Vec<u8>>;

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Checks the limits and returns a bound on the number of information states.
pub fn dp_state_estimate(instance: &Instance, limits: &DpLimits) -> Result<f64> {
    let t = instance.num_arrivals();
    let estimate = instance
        .resources()
        .iter()
        .map(|r| binomial(t + r.capacity as usize, r.capacity as usize))
        .product::<f64>()
        * t.max(1) as f64;
    let refuse = |reason: String| Err(Error::StateSpace { estimate, reason });
    if instance.mode() != Mode::Matching {
        return refuse("only matching instances are supported".into());
    }
    if t > limits.max_arrivals {
        return refuse(format!("{t} arrivals, limit {}", limits.max_arrivals));
    }
    if instance.total_units() > limits.max_total_capacity {
        return refuse(format!(
            "total capacity {}, limit {}",
            instance.total_units(),
            limits.max_total_capacity
        ));
    }
    for r in instance.resources() {
        let atoms = r.usage.discrete_support().len();
        if atoms == 0 {
            return refuse(format!("usage law of {} has no finite support", r.id));
        }
        if atoms > limits.max_support {
            return refuse(format!(
                "usage law of {} has {atoms} atoms, limit {}",
                r.id, limits.max_support
            ));
        }
    }
    Ok(estimate)
}

/// Memoized solver. Values and actions are filled lazily, so replays can ask
/// for states the forward solve never needed.
pub struct DpSolver<'a> {
    instance: &'a Instance,
    policy: DpPolicy,
    memo: HashMap<(usize, State), (f64, Option<usize>)>,
}

impl<'a> DpSolver<'a> {
    pub fn new(instance: &'a Instance, policy: DpPolicy, limits: &DpLimits) -> Result<Self> {
        dp_state_estimate(instance, limits)?;
        Ok(DpSolver {
            instance,
            policy,
            memo: HashMap::new(),
        })
    }

    /// Expected reward from the start.
    pub fn solve(&mut self) -> f64 {
        let empty = vec![Vec::new(); self.instance.resources().len()];
        self.value(0, &empty).0
    }

    pub fn states_visited(&self) -> usize {
        self.memo.len()
    }

    fn free(&self, state: &State, i: usize) -> usize {
        self.instance.capacity(i) - state[i].len()
    }

    fn fixed_action(&self, t: usize, state: &State) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for &i in self.instance.arrivals()[t].edges() {
            let free = self.free(state, i);
            if free == 0 {
                continue;
            }
            let r = &self.instance.resources()[i];
            let score = match self.policy {
                DpPolicy::Ib => r.reward * (1.0 - exp_tradeoff(free as f64 / r.capacity as f64)),
                _ => r.reward,
            };
            if score > 0.0 && best.is_none_or(|(_, s)| score > s) {
                best = Some((i, score));
            }
        }
        best.map(|(i, _)| i)
    }

    /// Probability that a unit committed at `tau` and busy at `t` returns by `t + 1`.
    fn return_probability(&self, i: usize, tau: usize, t: usize) -> f64 {
        let a = self.instance.arrivals();
        let f = |d: f64| self.instance.resources()[i].usage.cdf(d);
        let before = if tau == t { 0.0 } else { f(a[t].time - a[tau].time) };
        let after = f(a[t + 1].time - a[tau].time);
        if 1.0 - before <= 1e-15 {
            return 1.0;
        }
        ((after - before) / (1.0 - before)).clamp(0.0, 1.0)
    }

    /// Expected future reward after the decision at `t`, given the post-decision state.
    fn continuation(&mut self, t: usize, state: &State) -> f64 {
        if t + 1 >= self.instance.num_arrivals() {
            return 0.0;
        }
        let mut certain: State = vec![Vec::new(); state.len()];
        let mut uncertain: Vec<(usize, u8, f64)> = Vec::new();
        for (i, units) in state.iter().enumerate() {
            for &tau in units {
                let q = self.return_probability(i, tau as usize, t);
                if q >= 1.0 {
                    continue;
                }
                if q <= 0.0 {
                    certain[i].push(tau);
                } else {
                    uncertain.push((i, tau, q));
                }
            }
        }
        let mut total = 0.0;
        for outcome in 0u32..(1 << uncertain.len()) {
            let mut p = 1.0;
            let mut next = certain.clone();
            for (b, &(i, tau, q)) in uncertain.iter().enumerate() {
                if outcome >> b & 1 == 1 {
                    p *= q;
                } else {
                    p *= 1.0 - q;
                    next[i].push(tau);
                }
            }
            for units in &mut next {
                units.sort_unstable();
            }
            total += p * self.value(t + 1, &next).0;
        }
        total
    }

    /// `(value, action)` at arrival `t` in `state`.
    pub fn value(&mut self, t: usize, state: &State) -> (f64, Option<usize>) {
        if t >= self.instance.num_arrivals() {
            return (0.0, None);
        }
        if let Some(&hit) = self.memo.get(&(t, state.clone())) {
            return hit;
        }
        let mut candidates: Vec<Option<usize>> = match self.policy {
            DpPolicy::Optimal => {
                let mut c = vec![None];
                c.extend(
                    self.instance.arrivals()[t]
                        .edges()
                        .iter()
                        .filter(|&&i| self.free(state, i) > 0)
                        .map(|&i| Some(i)),
                );
                c
            }
            _ => vec![self.fixed_action(t, state)],
        };
        let mut best = (f64::NEG_INFINITY, None);
        for action in candidates.drain(..) {
            let mut next = state.clone();
            let mut v = 0.0;
            if let Some(i) = action {
                v += self.instance.resources()[i].reward;
                next[i].push(t as u8);
                next[i].sort_unstable();
            }
            v += self.continuation(t, &next);
            // strict improvement needed, so ties keep rejecting or the lower index
            if v > best.0 + 1e-12 {
                best = (v, action);
            }
        }
        self.memo.insert((t, state.clone()), best);
        best
    }

    /// Plays the solver's rule on a concrete sample path. A unit committed at
    /// `tau` with duration `d` is free again at `t` iff `d <= a_t - a_tau`.
    pub fn replay(&mut self, path: &SamplePath) -> Result<RunRecord> {
        let instance = self.instance;
        if !path.fits(instance) {
            return Err(Error::Argument("sample path was drawn for a different instance".into()));
        }
        let a = instance.arrivals();
        let name = match self.policy {
            DpPolicy::Optimal => "opt",
            DpPolicy::Greedy => "greedy",
            DpPolicy::Ib => "ib",
        };
        // per unit: (commit epoch, duration) while busy
        let mut busy: Vec<Vec<Option<(usize, f64)>>> = instance
            .resources()
            .iter()
            .map(|r| vec![None; r.capacity as usize])
            .collect();
        let mut used: Vec<Vec<usize>> = busy.iter().map(|u| vec![0; u.len()]).collect();
        let mut record = RunRecord::new(name, path.seed, instance.num_arrivals());
        for t in 0..instance.num_arrivals() {
            for units in busy.iter_mut() {
                for slot in units.iter_mut() {
                    if let Some((tau, d)) = *slot {
                        if d <= a[t].time - a[tau].time {
                            *slot = None;
                        }
                    }
                }
            }
            let state: State = busy
                .iter()
                .map(|units| {
                    let mut v: Vec<u8> = units.iter().flatten().map(|&(tau, _)| tau as u8).collect();
                    v.sort_unstable();
                    v
                })
                .collect();
            let snapshot: Vec<u32> = busy
                .iter()
                .map(|u| u.iter().filter(|s| s.is_none()).count() as u32)
                .collect();
            match self.value(t, &state).1 {
                Some(i) => {
                    let k = busy[i]
                        .iter()
                        .position(Option::is_none)
                        .expect("action needs a free unit");
                    let d = path.duration(i, k, used[i][k]);
                    used[i][k] += 1;
                    busy[i][k] = Some((t, d));
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
}

/// Expected reward of the clairvoyant optimum.
pub fn clairvoyant_dp(instance: &Instance) -> Result<f64> {
    clairvoyant_dp_with(instance, &DpLimits::default())
}

pub fn clairvoyant_dp_with(instance: &Instance, limits: &DpLimits) -> Result<f64> {
    Ok(DpSolver::new(instance, DpPolicy::Optimal, limits)?.solve())
}

/// Exact expected reward of Greedy or IB, by the same recursion.
pub fn evaluate_policy(instance: &Instance, policy: DpPolicy, limits: &DpLimits) -> Result<f64> {
    Ok(DpSolver::new(instance, policy, limits)?.solve())
}
