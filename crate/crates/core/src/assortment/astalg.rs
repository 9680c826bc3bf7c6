//! Randomized rounding of the assortment guide with true inventory.

use super::astgalg::AssortmentPlan;
use super::pmatch::probability_match;
use crate::error::{Error, Result};
use crate::model::{Decision, Instance, InventoryState, Mode, RejectReason, RunRecord, SamplePath};
use crate::rounding::DeltaSchedule;

/// Index of the `(lo, hi]` interval that contains `u` when `weights` are laid
/// end to end from 0; `None` when `u` falls past the last one.
pub(crate) fn categorical(weights: impl IntoIterator<Item = f64>, u: f64) -> Option<usize> {
    let mut lo = 0.0;
    for (j, w) in weights.into_iter().enumerate() {
        let hi = lo + w;
        if u > lo && u <= hi {
            return Some(j);
        }
        lo = hi;
    }
    None
}

/// Per arrival: pick a planned assortment (or reject) with its plan weight,
/// keep the items with a free unit, probability-match them to
/// `phi(A, s) / (1 + delta_s)`, pick a nested sub-assortment (or reject) by
/// weight, then let the customer choose by the cumulative choice probabilities.
pub fn run_astalg(
    instance: &Instance,
    plan: &AssortmentPlan,
    deltas: &DeltaSchedule,
    path: &SamplePath,
) -> Result<RunRecord> {
    instance.require_mode(Mode::Assortment)?;
    if plan.rows.len() != instance.num_arrivals() {
        return Err(Error::Argument(format!(
            "plan has {} rows for {} arrivals",
            plan.rows.len(),
            instance.num_arrivals()
        )));
    }
    if deltas.len() != instance.resources().len() {
        return Err(Error::Argument("delta schedule does not match the resources".into()));
    }
    if !path.fits(instance) {
        return Err(Error::Argument("sample path was drawn for a different instance".into()));
    }
    let mut inventory = InventoryState::new(instance);
    let mut record = RunRecord::new("astalg", path.seed, instance.num_arrivals());
    for (t, arrival) in instance.arrivals().iter().enumerate() {
        let now = arrival.time;
        let ctx = arrival.choice_context().expect("assortment arrival");
        let draws = path.draws(t);
        let snapshot = inventory.snapshot(now);
        let row = &plan.rows[t];

        let Some(eta) = categorical(row.offers.iter().map(|(_, y)| *y), draws.selection) else {
            record.push(snapshot, Decision::Reject(RejectReason::NotSelected), 0.0);
            continue;
        };
        let planned = &row.offers[eta].0;
        let available: Vec<usize> = planned.iter().copied().filter(|&i| snapshot[i] > 0).collect();
        if available.is_empty() {
            let decision = Decision::Reject(RejectReason::Unavailable { resource: planned[0] });
            record.push(snapshot, decision, 0.0);
            continue;
        }
        let targets: Vec<f64> = available
            .iter()
            .map(|&s| ctx.model.phi(planned, s) * deltas.scale(s))
            .collect();
        let collection = probability_match(&available, &ctx.model, &targets)
            .map_err(|e| Error::Consistency(format!("arrival {t}: probability match failed on {available:?}: {e}")))?;
        let Some(j) = categorical(collection.weights.iter().copied(), draws.offer) else {
            record.push(snapshot, Decision::Reject(RejectReason::NotSelected), 0.0);
            continue;
        };
        let offered = collection.sets[j].clone();
        let chosen = categorical(offered.iter().map(|&i| ctx.model.phi(&offered, i)), draws.choice).map(|p| offered[p]);
        let (sale, reward) = match chosen {
            Some(i) => {
                let k = inventory.lowest_free(i, now).expect("offered items are in stock");
                inventory.commit(i, k, now, path);
                (Some((i, k)), instance.resources()[i].reward)
            }
            None => (None, 0.0),
        };
        record.push(
            snapshot,
            Decision::Offer {
                assortment: offered,
                sale,
            },
            reward,
        );
    }
    Ok(record)
}
