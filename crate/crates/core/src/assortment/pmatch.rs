//! Probability Match: split one assortment into nested sub-assortments with
//! weights so that every item is chosen with a prescribed probability.

use serde::Serialize;

use super::choice::{ChoiceModel, MnlModel};
use crate::error::{Error, Result};

/// Ratios at or below this count as zero.
pub const GAMMA_TOL: f64 = 1e-12;
/// Slack on the `p_s <= phi(S, s)` precondition.
const TARGET_TOL: f64 = 1e-12;

/// Nested sets `A_1 ⊃ A_2 ⊃ ...` with weights.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MatchedCollection {
    pub sets: Vec<Vec<usize>>,
    pub weights: Vec<f64>,
    /// Item removed after set `j` was added: the argmin `s_j` of that round.
    pub removed: Vec<usize>,
}

impl MatchedCollection {
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `sum_{A_j ∋ s} y_j phi(A_j, s)`.
    pub fn coverage(&self, model: &ChoiceModel, s: usize) -> f64 {
        self.sets
            .iter()
            .zip(&self.weights)
            .filter(|(a, _)| a.binary_search(&s).is_ok())
            .map(|(a, y)| y * model.phi(a, s))
            .sum()
    }
}

fn check_targets(set: &[usize], model: &ChoiceModel, targets: &[f64]) -> Result<()> {
    if set.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Argument(format!("set {set:?} must be ascending and unique")));
    }
    if set.len() != targets.len() {
        return Err(Error::Argument(format!(
            "{} targets for a set of {} items",
            targets.len(),
            set.len()
        )));
    }
    for (&s, &p) in set.iter().zip(targets) {
        let phi = model.phi(set, s);
        if !(p.is_finite() && p >= 0.0) {
            return Err(Error::Argument(format!("target of item {s} is {p}")));
        }
        if p > phi + TARGET_TOL {
            return Err(Error::Argument(format!("target {p} of item {s} exceeds phi = {phi}")));
        }
    }
    Ok(())
}

/// Decomposes `set` for `targets` (aligned with the ascending `set`). MNL models
/// use the sorting shortcut; everything else runs the generic loop.
pub fn probability_match(set: &[usize], model: &ChoiceModel, targets: &[f64]) -> Result<MatchedCollection> {
    match model {
        ChoiceModel::Mnl(m) => probability_match_mnl(set, m, targets),
        _ => probability_match_generic(set, model, targets),
    }
}

/// Each round takes `gamma_s = p_s / phi(S, s)`, adds `S` with weight
/// `min gamma`, lowers every target by what `S` covers and drops the argmin.
/// A round whose minimum ratio is zero drops the item without adding a set.
pub fn probability_match_generic(set: &[usize], model: &ChoiceModel, targets: &[f64]) -> Result<MatchedCollection> {
    check_targets(set, model, targets)?;
    let mut out = MatchedCollection::default();
    let mut current = set.to_vec();
    let mut p = targets.to_vec();
    while !current.is_empty() {
        let phis: Vec<f64> = current.iter().map(|&s| model.phi(&current, s)).collect();
        let mut arg = 0;
        let mut gamma_min = f64::INFINITY;
        for (pos, (&ps, &phi)) in p.iter().zip(&phis).enumerate() {
            let gamma = if ps <= GAMMA_TOL {
                0.0
            } else if phi > 0.0 {
                ps / phi
            } else {
                return Err(Error::Consistency(format!(
                    "item {} still needs {ps} but has zero choice probability in {current:?}",
                    current[pos]
                )));
            };
            if gamma < gamma_min {
                gamma_min = gamma;
                arg = pos;
            }
        }
        if gamma_min > GAMMA_TOL {
            for (ps, &phi) in p.iter_mut().zip(&phis) {
                *ps = (*ps - gamma_min * phi).max(0.0);
            }
            out.sets.push(current.clone());
            out.weights.push(gamma_min);
            out.removed.push(current[arg]);
        }
        current.remove(arg);
        p.remove(arg);
    }
    Ok(out)
}

/// Under MNL every ratio shrinks by the same amount each round, so the removal
/// order is just the order of `p_s / w_s`.
pub fn probability_match_mnl(set: &[usize], model: &MnlModel, targets: &[f64]) -> Result<MatchedCollection> {
    let wrapped = ChoiceModel::Mnl(model.clone());
    check_targets(set, &wrapped, targets)?;
    let w: Vec<f64> = set.iter().map(|&s| model.weight(s)).collect();
    let mut order: Vec<usize> = (0..set.len()).collect();
    let rho = |a: usize| {
        if targets[a] <= GAMMA_TOL {
            0.0
        } else {
            targets[a] / w[a]
        }
    };
    order.sort_by(|&a, &b| rho(a).total_cmp(&rho(b)).then(a.cmp(&b)));
    let mut alive = vec![true; set.len()];
    let mut total_w: f64 = w.iter().sum();
    let mut shift = 0.0;
    let mut out = MatchedCollection::default();
    for &a in &order {
        let gamma = (rho(a) - shift).max(0.0) * (1.0 + total_w);
        if gamma > GAMMA_TOL {
            out.sets
                .push((0..set.len()).filter(|&b| alive[b]).map(|b| set[b]).collect());
            out.weights.push(gamma);
            out.removed.push(set[a]);
            shift += gamma / (1.0 + total_w);
        }
        alive[a] = false;
        total_w -= w[a];
    }
    Ok(out)
}

/// Checks nestedness, total weight, exact coverage and the per-round bound
/// `y_1 + ... + y_j <= p_{s_j} / phi(S, s_j)`.
pub fn check_collection(
    set: &[usize],
    model: &ChoiceModel,
    targets: &[f64],
    collection: &MatchedCollection,
    tol: f64,
) -> std::result::Result<(), String> {
    let mut outer: &[usize] = set;
    for (j, a) in collection.sets.iter().enumerate() {
        let strict = j > 0 && a.len() < outer.len();
        if !(a.iter().all(|s| outer.binary_search(s).is_ok()) && (j == 0 || strict)) {
            return Err(format!("set {j} = {a:?} is not nested in {outer:?}"));
        }
        outer = a;
    }
    if collection.weights.iter().any(|&y| y <= 0.0) {
        return Err("non-positive weight".into());
    }
    let total = collection.total_weight();
    if total > 1.0 + tol {
        return Err(format!("weights sum to {total}"));
    }
    for (&s, &p) in set.iter().zip(targets) {
        let got = collection.coverage(model, s);
        if (got - p).abs() > tol {
            return Err(format!("item {s}: coverage {got} vs target {p}"));
        }
    }
    let mut prefix = 0.0;
    for (j, (&y, &s)) in collection.weights.iter().zip(&collection.removed).enumerate() {
        prefix += y;
        let pos = set
            .binary_search(&s)
            .map_err(|_| format!("removed item {s} is not in the set"))?;
        let bound = targets[pos] / model.phi(set, s);
        if prefix > bound + tol {
            return Err(format!("round {j}: cumulative weight {prefix} exceeds {bound}"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_item() {
        let m = ChoiceModel::mnl(vec![(4, 1.0)]).unwrap();
        let c = probability_match(&[4], &m, &[0.5 * 0.4]).unwrap();
        assert_eq!(c.sets, vec![vec![4]]);
        assert!((c.weights[0] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn two_item_hand_trace() {
        let m = ChoiceModel::mnl(vec![(1, 1.0), (2, 1.0)]).unwrap();
        let targets = [1.0 / 3.0, 1.0 / 6.0];
        for c in [
            probability_match(&[1, 2], &m, &targets).unwrap(),
            probability_match_generic(&[1, 2], &m, &targets).unwrap(),
        ] {
            assert_eq!(c.sets, vec![vec![1, 2], vec![1]]);
            assert!((c.weights[0] - 0.5).abs() < 1e-12);
            assert!((c.weights[1] - 1.0 / 3.0).abs() < 1e-12);
            assert!((c.total_weight() - 5.0 / 6.0).abs() < 1e-12);
            check_collection(&[1, 2], &m, &targets, &c, 1e-9).unwrap();
        }
    }

    #[test]
    fn zero_targets_give_empty_collection() {
        let m = ChoiceModel::mnl(vec![(0, 1.0), (1, 2.0)]).unwrap();
        assert!(probability_match(&[0, 1], &m, &[0.0, 0.0]).unwrap().is_empty());
        assert!(probability_match_generic(&[0, 1], &m, &[0.0, 0.0]).unwrap().is_empty());
    }

    #[test]
    fn one_zero_target_does_not_stop_the_others() {
        let m = ChoiceModel::mnl(vec![(0, 1.0), (1, 1.0)]).unwrap();
        let targets = [0.0, 0.25];
        let c = probability_match_generic(&[0, 1], &m, &targets).unwrap();
        check_collection(&[0, 1], &m, &targets, &c, 1e-9).unwrap();
        assert_eq!(c.sets, vec![vec![1]]);
    }

    #[test]
    fn target_above_phi_is_rejected() {
        let m = ChoiceModel::mnl(vec![(0, 1.0)]).unwrap();
        assert!(matches!(probability_match(&[0], &m, &[0.6]), Err(Error::Argument(_))));
        assert!(matches!(probability_match(&[0], &m, &[-0.1]), Err(Error::Argument(_))));
    }
}
