use std::collections::HashMap;

use crate::error::{Error, Result};

// Substitutability and probability-sum checks allow this much float noise.
const MODEL_TOL: f64 = 1e-12;

/// Customer choice model `phi(set, item)`: probability that `item` is bought
/// when `set` is offered. Sets are ascending resource indices.
#[derive(Debug, Clone, PartialEq)]
pub enum ChoiceModel {
    /// Multinomial logit with no-purchase weight 1.
    Mnl(MnlModel),
    Table(TableModel),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MnlModel {
    /// `(resource, weight)`, ascending by resource.
    weights: Vec<(usize, f64)>,
    universe: Vec<usize>,
}

impl MnlModel {
    pub fn new(mut weights: Vec<(usize, f64)>) -> Result<Self> {
        weights.sort_by_key(|&(i, _)| i);
        if weights.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Validation("mnl weights list a resource twice".into()));
        }
        if let Some(&(i, w)) = weights.iter().find(|(_, w)| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::Validation(format!(
                "mnl weight of resource {i} must be positive, got {w}"
            )));
        }
        let universe = weights.iter().map(|&(i, _)| i).collect();
        Ok(MnlModel { weights, universe })
    }

    pub fn weights(&self) -> &[(usize, f64)] {
        &self.weights
    }

    pub fn weight(&self, item: usize) -> f64 {
        self.weights
            .binary_search_by_key(&item, |&(i, _)| i)
            .map(|pos| self.weights[pos].1)
            .unwrap_or(0.0)
    }

    pub fn phi(&self, set: &[usize], item: usize) -> f64 {
        if set.binary_search(&item).is_err() {
            return 0.0;
        }
        let denom = 1.0 + set.iter().map(|&j| self.weight(j)).sum::<f64>();
        self.weight(item) / denom
    }
}

/// Explicit `phi` values for every stored set. The stored family must be closed
/// under taking non-empty subsets so that every nested sub-assortment has a value.
#[derive(Debug, Clone, PartialEq)]
pub struct TableModel {
    entries: HashMap<Vec<usize>, Vec<f64>>,
    universe: Vec<usize>,
}

impl TableModel {
    /// `entries`: `(set, probs)` with probs aligned to the ascending set.
    pub fn new(raw: Vec<(Vec<usize>, Vec<f64>)>) -> Result<Self> {
        let mut entries = HashMap::with_capacity(raw.len());
        let mut universe = Vec::new();
        for (set, probs) in raw {
            if set.is_empty() {
                continue;
            }
            if set.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Validation(format!(
                    "table set {set:?} must be ascending and unique"
                )));
            }
            if set.len() != probs.len() {
                return Err(Error::Validation(format!(
                    "table set {set:?} has {} probabilities",
                    probs.len()
                )));
            }
            if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
                return Err(Error::Validation(format!(
                    "table set {set:?} has a negative probability"
                )));
            }
            let total: f64 = probs.iter().sum();
            if total > 1.0 + MODEL_TOL {
                return Err(Error::Validation(format!(
                    "table set {set:?} probabilities sum to {total} > 1"
                )));
            }
            universe.extend_from_slice(&set);
            if entries.insert(set.clone(), probs).is_some() {
                return Err(Error::Validation(format!("table set {set:?} listed twice")));
            }
        }
        universe.sort_unstable();
        universe.dedup();
        let model = TableModel { entries, universe };
        model.check_closure_and_substitutability()?;
        Ok(model)
    }

    fn check_closure_and_substitutability(&self) -> Result<()> {
        for (set, probs) in &self.entries {
            if set.len() < 2 {
                continue;
            }
            for drop in 0..set.len() {
                let sub: Vec<usize> = set
                    .iter()
                    .enumerate()
                    .filter(|&(p, _)| p != drop)
                    .map(|(_, &i)| i)
                    .collect();
                let Some(sub_probs) = self.entries.get(&sub) else {
                    return Err(Error::Validation(format!(
                        "table is not closed under subsets: {set:?} is stored but {sub:?} is not"
                    )));
                };
                // every item of `sub` must not lose probability when `set[drop]` is removed
                for (q, &item) in sub.iter().enumerate() {
                    let big = probs[set.binary_search(&item).expect("subset")];
                    if sub_probs[q] + MODEL_TOL < big {
                        return Err(Error::Validation(format!(
                            "table violates substitutability: phi({sub:?}, {item}) = {} < phi({set:?}, {item}) = {big}",
                            sub_probs[q]
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn contains(&self, set: &[usize]) -> bool {
        set.is_empty() || self.entries.contains_key(set)
    }

    pub fn phi(&self, set: &[usize], item: usize) -> f64 {
        match (self.entries.get(set), set.binary_search(&item)) {
            (Some(probs), Ok(pos)) => probs[pos],
            _ => 0.0,
        }
    }

    /// Stored entries in a canonical order (by size, then lexicographic).
    pub fn entries_sorted(&self) -> Vec<(&Vec<usize>, &Vec<f64>)> {
        let mut out: Vec<_> = self.entries.iter().collect();
        out.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(b.0)));
        out
    }
}

impl ChoiceModel {
    pub fn mnl(weights: Vec<(usize, f64)>) -> Result<Self> {
        MnlModel::new(weights).map(ChoiceModel::Mnl)
    }

    pub fn table(entries: Vec<(Vec<usize>, Vec<f64>)>) -> Result<Self> {
        TableModel::new(entries).map(ChoiceModel::Table)
    }

    /// The customer buys the offered item if and only if exactly one item is
    /// offered. With this model assortment planning degenerates to matching.
    pub fn single_choice(universe: &[usize]) -> Result<Self> {
        let n = universe.len();
        if n > 16 {
            return Err(Error::Argument("single_choice tables are limited to 16 items".into()));
        }
        let mut entries = Vec::with_capacity((1usize << n) - 1);
        for mask in 1u32..(1u32 << n) {
            let set: Vec<usize> = (0..n).filter(|b| mask >> b & 1 == 1).map(|b| universe[b]).collect();
            let p = if set.len() == 1 { 1.0 } else { 0.0 };
            entries.push((set.clone(), vec![p; set.len()]));
        }
        Self::table(entries)
    }

    pub fn phi(&self, set: &[usize], item: usize) -> f64 {
        match self {
            ChoiceModel::Mnl(m) => m.phi(set, item),
            ChoiceModel::Table(t) => t.phi(set, item),
        }
    }

    /// Items this model can ever sell, ascending.
    pub fn universe(&self) -> &[usize] {
        match self {
            ChoiceModel::Mnl(m) => &m.universe,
            ChoiceModel::Table(t) => &t.universe,
        }
    }

    /// Whether `phi(set, .)` is defined. MNL is defined everywhere.
    pub fn defines(&self, set: &[usize]) -> bool {
        match self {
            ChoiceModel::Mnl(_) => true,
            ChoiceModel::Table(t) => t.contains(set),
        }
    }
}

/// Downward-closed family of offerable sets.
#[derive(Debug, Clone, PartialEq)]
pub enum FeasibleFamily {
    All,
    Cardinality(usize),
    /// Explicit non-empty sets; must be closed under removing elements.
    List(Vec<Vec<usize>>),
}

impl FeasibleFamily {
    pub fn contains(&self, set: &[usize]) -> bool {
        match self {
            FeasibleFamily::All => true,
            FeasibleFamily::Cardinality(k) => set.len() <= *k,
            FeasibleFamily::List(sets) => set.is_empty() || sets.iter().any(|s| s == set),
        }
    }

    fn validate(&self) -> Result<()> {
        if let FeasibleFamily::List(sets) = self {
            for set in sets {
                if set.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::Validation(format!(
                        "family set {set:?} must be ascending and unique"
                    )));
                }
                if set.len() < 2 {
                    continue;
                }
                for drop in 0..set.len() {
                    let sub: Vec<usize> = set
                        .iter()
                        .enumerate()
                        .filter(|&(p, _)| p != drop)
                        .map(|(_, &i)| i)
                        .collect();
                    if !self.contains(&sub) {
                        return Err(Error::Validation(format!(
                            "feasible family is not downward-closed: {set:?} listed without {sub:?}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// What an assortment-mode arrival brings: its choice model and what may be offered.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiceContext {
    pub model: ChoiceModel,
    pub family: FeasibleFamily,
}

impl ChoiceContext {
    pub fn new(model: ChoiceModel, family: FeasibleFamily) -> Self {
        ChoiceContext { model, family }
    }

    pub fn universe(&self) -> &[usize] {
        self.model.universe()
    }

    /// Offerable under both the family and the model's domain.
    pub fn is_feasible(&self, set: &[usize]) -> bool {
        self.family.contains(set) && self.model.defines(set)
    }

    pub(crate) fn validate(&self, num_resources: usize) -> Result<()> {
        if let Some(&bad) = self.universe().iter().find(|&&i| i >= num_resources) {
            return Err(Error::Validation(format!(
                "choice model references unknown resource {bad}"
            )));
        }
        self.family.validate()
    }
}
