use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::UsageDistribution;
use crate::assortment::ChoiceContext;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Matching,
    Assortment,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Resource {
    pub id: String,
    pub capacity: u32,
    pub reward: f64,
    pub usage: UsageDistribution,
}

/// What an arrival can be served with.
#[derive(Debug, Clone, PartialEq)]
pub enum Demand {
    /// Resource indices with an edge to the arrival, ascending.
    Edges(Vec<usize>),
    Choice(ChoiceContext),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Arrival {
    pub time: f64,
    pub demand: Demand,
}

impl Arrival {
    pub fn matching(time: f64, mut edges: Vec<usize>) -> Self {
        edges.sort_unstable();
        edges.dedup();
        Arrival {
            time,
            demand: Demand::Edges(edges),
        }
    }

    pub fn choice(time: f64, context: ChoiceContext) -> Self {
        Arrival {
            time,
            demand: Demand::Choice(context),
        }
    }

    /// Resources that can serve this arrival (`S_t`), ascending.
    pub fn edges(&self) -> &[usize] {
        match &self.demand {
            Demand::Edges(e) => e,
            Demand::Choice(ctx) => ctx.universe(),
        }
    }

    pub fn choice_context(&self) -> Option<&ChoiceContext> {
        match &self.demand {
            Demand::Choice(ctx) => Some(ctx),
            Demand::Edges(_) => None,
        }
    }
}

/// A validated problem instance. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    mode: Mode,
    resources: Vec<Resource>,
    arrivals: Vec<Arrival>,
    index: HashMap<String, usize>,
}

impl Instance {
    pub fn new(mode: Mode, resources: Vec<Resource>, arrivals: Vec<Arrival>) -> Result<Self> {
        if resources.is_empty() {
            return Err(Error::Validation("instance needs at least one resource".into()));
        }
        let mut index = HashMap::with_capacity(resources.len());
        for (i, r) in resources.iter().enumerate() {
            if index.insert(r.id.clone(), i).is_some() {
                return Err(Error::Validation(format!("duplicate resource id `{}`", r.id)));
            }
            if r.capacity < 1 {
                return Err(Error::Validation(format!("resource `{}` has capacity 0", r.id)));
            }
            if !(r.reward.is_finite() && r.reward >= 0.0) {
                return Err(Error::Validation(format!(
                    "resource `{}` has invalid reward {}",
                    r.id, r.reward
                )));
            }
            r.usage
                .validate()
                .map_err(|e| Error::Validation(format!("resource `{}`: {e}", r.id)))?;
        }
        let mut prev: Option<f64> = None;
        for (t, a) in arrivals.iter().enumerate() {
            if !(a.time.is_finite() && a.time >= 0.0) {
                return Err(Error::Validation(format!(
                    "arrival {t}: time {} must be finite and >= 0",
                    a.time
                )));
            }
            if let Some(p) = prev {
                if a.time <= p {
                    return Err(Error::Validation(format!(
                        "arrival {t}: time {} is not strictly after the previous arrival ({p})",
                        a.time
                    )));
                }
            }
            prev = Some(a.time);
            match (&a.demand, mode) {
                (Demand::Edges(edges), Mode::Matching) => {
                    if edges.windows(2).any(|w| w[0] >= w[1]) {
                        return Err(Error::Validation(format!(
                            "arrival {t}: edges must be ascending and unique"
                        )));
                    }
                    if let Some(&bad) = edges.iter().find(|&&i| i >= resources.len()) {
                        return Err(Error::Validation(format!("arrival {t}: unknown resource index {bad}")));
                    }
                }
                (Demand::Choice(ctx), Mode::Assortment) => {
                    ctx.validate(resources.len())
                        .map_err(|e| Error::Validation(format!("arrival {t}: {e}")))?;
                }
                _ => {
                    return Err(Error::Validation(format!(
                        "arrival {t}: demand kind does not match instance mode {mode:?}"
                    )))
                }
            }
        }
        Ok(Instance {
            mode,
            resources,
            arrivals,
            index,
        })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn resources(&self) -> &[Resource] {
        &self.resources
    }

    pub fn arrivals(&self) -> &[Arrival] {
        &self.arrivals
    }

    pub fn num_arrivals(&self) -> usize {
        self.arrivals.len()
    }

    pub fn resource_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn capacity(&self, i: usize) -> usize {
        self.resources[i].capacity as usize
    }

    pub fn c_min(&self) -> u32 {
        self.resources.iter().map(|r| r.capacity).min().expect("non-empty")
    }

    pub fn total_units(&self) -> usize {
        self.resources.iter().map(|r| r.capacity as usize).sum()
    }

    /// True when no resource ever returns a unit.
    pub fn is_non_reusable(&self) -> bool {
        self.resources.iter().all(|r| r.usage.is_non_reusable())
    }

    pub(crate) fn require_mode(&self, mode: Mode) -> Result<()> {
        if self.mode != mode {
            return Err(Error::Argument(format!(
                "expected a {mode:?} instance, got {:?}",
                self.mode
            )));
        }
        Ok(())
    }
}
