use serde::Serialize;

use super::Instance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    /// The policy chose not to serve the arrival.
    NotSelected,
    /// The rounding draw picked a resource with no free unit.
    Unavailable { resource: usize },
    /// An assortment was shown and the customer left empty-handed.
    NoPurchase,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Reject(RejectReason),
    Match {
        resource: usize,
        unit: usize,
    },
    Offer {
        assortment: Vec<usize>,
        sale: Option<(usize, usize)>,
    },
}

impl Decision {
    /// Resource that served the arrival, if any.
    pub fn served_by(&self) -> Option<usize> {
        match *self {
            Decision::Match { resource, .. } => Some(resource),
            Decision::Offer { sale: Some((i, _)), .. } => Some(i),
            _ => None,
        }
    }
}

/// Everything a single stochastic run produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub policy: String,
    pub seed: u64,
    pub decisions: Vec<Decision>,
    pub rewards: Vec<f64>,
    /// Free units per resource just before each arrival is served.
    pub inventory: Vec<Vec<u32>>,
    pub total_reward: f64,
}

impl RunRecord {
    pub(crate) fn new(policy: &str, seed: u64, horizon: usize) -> Self {
        RunRecord {
            policy: policy.to_string(),
            seed,
            decisions: Vec::with_capacity(horizon),
            rewards: Vec::with_capacity(horizon),
            inventory: Vec::with_capacity(horizon),
            total_reward: 0.0,
        }
    }

    pub(crate) fn push(&mut self, inventory: Vec<u32>, decision: Decision, reward: f64) {
        self.inventory.push(inventory);
        self.decisions.push(decision);
        self.rewards.push(reward);
        self.total_reward += reward;
    }

    pub fn reward_by_resource(&self, instance: &Instance) -> Vec<f64> {
        let mut out = vec![0.0; instance.resources().len()];
        for (d, r) in self.decisions.iter().zip(&self.rewards) {
            if let Some(i) = d.served_by() {
                out[i] += r;
            }
        }
        out
    }

    /// Arrivals served by resource `i` (the set `O(omega, i)` when the run is the optimum's).
    pub fn served_arrivals(&self, i: usize) -> Vec<usize> {
        self.decisions
            .iter()
            .enumerate()
            .filter(|(_, d)| d.served_by() == Some(i))
            .map(|(t, _)| t)
            .collect()
    }

    pub fn rejections(&self) -> usize {
        self.decisions.iter().filter(|d| d.served_by().is_none()).count()
    }

    pub fn stockouts(&self) -> usize {
        self.decisions
            .iter()
            .filter(|d| matches!(d, Decision::Reject(RejectReason::Unavailable { .. })))
            .count()
    }

    pub fn is_available(&self, i: usize, t: usize) -> bool {
        self.inventory[t][i] > 0
    }

    /// Bookkeeping invariants: reward total and inventory bounds.
    pub fn check(&self, instance: &Instance) -> Result<(), String> {
        let sum: f64 = self.rewards.iter().sum();
        if (sum - self.total_reward).abs() > 1e-9 * sum.abs().max(1.0) {
            return Err(format!("total {} != sum of rewards {sum}", self.total_reward));
        }
        for (t, inv) in self.inventory.iter().enumerate() {
            for (i, &free) in inv.iter().enumerate() {
                if free as usize > instance.capacity(i) {
                    return Err(format!(
                        "arrival {t}: resource {i} has {free} free units, capacity {}",
                        instance.capacity(i)
                    ));
                }
            }
            if let Some(i) = self.decisions[t].served_by() {
                if inv[i] == 0 {
                    return Err(format!("arrival {t}: served by resource {i} with no free unit"));
                }
            }
        }
        Ok(())
    }
}
