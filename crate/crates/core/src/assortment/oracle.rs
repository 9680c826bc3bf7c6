//! Revenue-maximizing assortment under reduced prices.

use super::choice::{ChoiceContext, ChoiceModel, FeasibleFamily, MnlModel};
use crate::error::{Error, Result};

/// Largest candidate set searched exhaustively.
pub const EXHAUSTIVE_LIMIT: usize = 20;

/// Expected reduced revenue `sum_{i in set} price_i phi(set, i)`.
pub fn assortment_revenue(set: &[usize], prices: &[(usize, f64)], model: &ChoiceModel) -> f64 {
    set.iter()
        .map(|&i| {
            let p = prices.iter().find(|(j, _)| *j == i).map_or(0.0, |(_, p)| *p);
            p * model.phi(set, i)
        })
        .sum()
}

/// Best feasible assortment among `candidates` (`(resource, reduced price)`).
///
/// Candidates with a non-positive price or outside the model's universe are
/// dropped, and sets in which some item has zero choice probability are never
/// returned. An empty result means the arrival should be rejected.
pub fn best_assortment(candidates: &[(usize, f64)], context: &ChoiceContext) -> Result<Vec<usize>> {
    if let Some(&(i, p)) = candidates.iter().find(|(_, p)| !p.is_finite() || *p < 0.0) {
        return Err(Error::Argument(format!("reduced price of resource {i} is {p}")));
    }
    let universe = context.universe();
    let mut items: Vec<(usize, f64)> = candidates
        .iter()
        .copied()
        .filter(|&(i, p)| p > 0.0 && universe.binary_search(&i).is_ok())
        .collect();
    items.sort_by_key(|&(i, _)| i);
    items.dedup_by_key(|(i, _)| *i);
    if items.is_empty() {
        return Ok(Vec::new());
    }
    match (&context.model, &context.family) {
        (ChoiceModel::Mnl(m), FeasibleFamily::All) => Ok(mnl_nested(m, &items)),
        (ChoiceModel::Mnl(m), FeasibleFamily::Cardinality(k)) => Ok(mnl_cardinality(m, &items, *k)),
        _ => exhaustive(&items, context),
    }
}

fn finish(mut set: Vec<usize>) -> Vec<usize> {
    set.sort_unstable();
    set
}

/// Unconstrained MNL: some revenue-ordered prefix is optimal.
fn mnl_nested(m: &MnlModel, items: &[(usize, f64)]) -> Vec<usize> {
    let mut order = items.to_vec();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let (mut num, mut den) = (0.0, 1.0);
    let (mut best, mut best_len) = (0.0, 0);
    for (len, &(i, p)) in order.iter().enumerate() {
        let w = m.weight(i);
        num += p * w;
        den += w;
        if num / den > best {
            best = num / den;
            best_len = len + 1;
        }
    }
    finish(order[..best_len].iter().map(|&(i, _)| i).collect())
}

/// Cardinality-constrained MNL, solved exactly: at the optimal value `lambda`, an
/// optimal set is the top-`k` items by `w_i (p_i - lambda)` among positive ones.
/// That ranking only changes at finitely many `lambda`, so every distinct
/// top-`k` set is visited and scored.
fn mnl_cardinality(m: &MnlModel, items: &[(usize, f64)], k: usize) -> Vec<usize> {
    if k == 0 {
        return Vec::new();
    }
    if k >= items.len() {
        return mnl_nested(m, items);
    }
    let w: Vec<f64> = items.iter().map(|&(i, _)| m.weight(i)).collect();
    let p_max = items.iter().map(|&(_, p)| p).fold(0.0, f64::max);
    let mut breaks = vec![0.0, p_max];
    for (a, &(_, pa)) in items.iter().enumerate() {
        breaks.push(pa);
        for (b, &(_, pb)) in items.iter().enumerate().skip(a + 1) {
            if w[a] != w[b] {
                let l = (w[a] * pa - w[b] * pb) / (w[a] - w[b]);
                if l > 0.0 && l < p_max {
                    breaks.push(l);
                }
            }
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let mut probes = breaks.clone();
    probes.extend(breaks.windows(2).map(|w| 0.5 * (w[0] + w[1])));

    let (mut best, mut best_set) = (0.0, Vec::new());
    let mut keyed: Vec<(f64, usize)> = Vec::with_capacity(items.len());
    for lambda in probes {
        keyed.clear();
        keyed.extend(items.iter().enumerate().map(|(a, &(_, p))| (w[a] * (p - lambda), a)));
        keyed.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
        let set = finish(
            keyed
                .iter()
                .take(k)
                .filter(|(v, _)| *v > 0.0)
                .map(|&(_, a)| items[a].0)
                .collect(),
        );
        let (num, den) = set.iter().fold((0.0, 1.0), |(n, d), &i| {
            let a = items.binary_search_by_key(&i, |&(j, _)| j).expect("candidate");
            (n + items[a].1 * w[a], d + w[a])
        });
        if num / den > best {
            best = num / den;
            best_set = set;
        }
    }
    best_set
}

fn score(set: &[usize], items: &[(usize, f64)], model: &ChoiceModel) -> Option<f64> {
    let mut total = 0.0;
    for &i in set {
        let phi = model.phi(set, i);
        if phi <= 0.0 {
            return None;
        }
        total += items[items.binary_search_by_key(&i, |&(j, _)| j).ok()?].1 * phi;
    }
    Some(total)
}

fn exhaustive(items: &[(usize, f64)], context: &ChoiceContext) -> Result<Vec<usize>> {
    let model = &context.model;
    let (mut best, mut best_set) = (0.0, Vec::new());
    let mut consider = |set: Vec<usize>| {
        if let Some(v) = score(&set, items, model) {
            if v > best {
                best = v;
                best_set = set;
            }
        }
    };
    if let FeasibleFamily::List(sets) = &context.family {
        for set in sets {
            let inside = set.iter().all(|i| items.binary_search_by_key(i, |&(j, _)| j).is_ok());
            if inside && model.defines(set) {
                consider(set.clone());
            }
        }
        return Ok(best_set);
    }
    let n = items.len();
    if n > EXHAUSTIVE_LIMIT {
        return Err(Error::Argument(format!(
            "exhaustive assortment search over {n} candidates exceeds the limit of {EXHAUSTIVE_LIMIT}"
        )));
    }
    for mask in 1u32..(1u32 << n) {
        let set: Vec<usize> = (0..n).filter(|b| mask >> b & 1 == 1).map(|b| items[b].0).collect();
        if context.is_feasible(&set) {
            consider(set);
        }
    }
    Ok(best_set)
}
