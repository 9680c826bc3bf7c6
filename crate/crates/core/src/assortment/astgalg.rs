//! Fractional assortment guide over fluid inventory.

use serde::Serialize;

use super::oracle::best_assortment;
use crate::error::{Error, Result};
use crate::guide::{reduced_price, FluidState, GalgConfig, UnitShare, SNAP};
use crate::model::{Instance, Mode};

/// Guide output for one arrival.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PlanRow {
    /// `(A(eta, t), y(eta, t))` in the order they were chosen.
    pub offers: Vec<(Vec<usize>, f64)>,
    /// Per-unit consumption `y_i(k, t)`.
    pub units: Vec<UnitShare>,
}

impl PlanRow {
    pub fn total_weight(&self) -> f64 {
        self.offers.iter().map(|(_, y)| y).sum()
    }

    /// `sum_k y_i(k, t)`.
    pub fn consumption(&self, i: usize) -> f64 {
        self.units.iter().filter(|u| u.resource == i).map(|u| u.amount).sum()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AssortmentPlan {
    pub rows: Vec<PlanRow>,
}

impl AssortmentPlan {
    pub fn reward_by_resource(&self, instance: &Instance) -> Vec<f64> {
        let mut out = vec![0.0; instance.resources().len()];
        for row in &self.rows {
            for u in &row.units {
                out[u.resource] += instance.resources()[u.resource].reward * u.amount;
            }
        }
        out
    }

    pub fn reward(&self, instance: &Instance) -> f64 {
        self.reward_by_resource(instance).iter().sum()
    }

    /// Per-unit shares of every arrival, in the same shape the guide for matching uses.
    pub fn unit_rows(&self) -> Vec<Vec<UnitShare>> {
        self.rows.iter().map(|r| r.units.clone()).collect()
    }

    /// `Σ_k y_i(k,t) = Σ_{A ∋ i} y(A) φ(A, i)` for every arrival and item.
    pub fn check_consistency(&self, instance: &Instance, tol: f64) -> std::result::Result<(), String> {
        for (t, (row, arrival)) in self.rows.iter().zip(instance.arrivals()).enumerate() {
            let ctx = arrival
                .choice_context()
                .ok_or_else(|| format!("arrival {t} has no choice model"))?;
            if row.total_weight() > 1.0 + tol {
                return Err(format!("arrival {t}: weights sum to {}", row.total_weight()));
            }
            for &i in ctx.universe() {
                let planned: f64 = row
                    .offers
                    .iter()
                    .filter(|(a, _)| a.binary_search(&i).is_ok())
                    .map(|(a, y)| y * ctx.model.phi(a, i))
                    .sum();
                if (planned - row.consumption(i)).abs() > tol {
                    return Err(format!(
                        "arrival {t}, item {i}: offers give {planned}, units {}",
                        row.consumption(i)
                    ));
                }
            }
        }
        Ok(())
    }
}

fn plan_arrival(state: &mut FluidState, t: usize, instance: &Instance, cfg: &GalgConfig) -> Result<PlanRow> {
    let arrival = &instance.arrivals()[t];
    let Some(ctx) = arrival.choice_context() else {
        return Err(Error::Argument(format!("arrival {t} has no choice model")));
    };
    let max_iterations = ctx.universe().iter().map(|&i| instance.capacity(i)).sum::<usize>() + 1;
    let mut row = PlanRow::default();
    let mut eta = 0.0;
    let mut iterations = 0;
    while 1.0 - eta > SNAP {
        let mut top = Vec::new();
        let mut prices = Vec::new();
        for &i in ctx.universe() {
            if let Some(k) = state.highest_available(i) {
                let r = &instance.resources()[i];
                top.push((i, k));
                prices.push((i, reduced_price(r.reward, k + 1, r.capacity as usize, cfg.tradeoff)));
            }
        }
        let set = best_assortment(&prices, ctx)?;
        if set.is_empty() {
            break;
        }
        let unit_of = |i: usize| top.iter().find(|(j, _)| *j == i).expect("candidate").1;
        let phis: Vec<f64> = set.iter().map(|&i| ctx.model.phi(&set, i)).collect();
        let y = set
            .iter()
            .zip(&phis)
            .map(|(&i, &phi)| state.z(i, unit_of(i)) / phi)
            .fold(1.0 - eta, f64::min);
        for (&i, &phi) in set.iter().zip(&phis) {
            let k = unit_of(i);
            let amount = y * phi;
            state.consume(i, k, amount, arrival.time);
            match row.units.iter_mut().find(|u| u.resource == i && u.unit == k) {
                Some(u) => u.amount += amount,
                None => row.units.push(UnitShare {
                    resource: i,
                    unit: k,
                    amount,
                }),
            }
        }
        row.offers.push((set, y));
        eta += y;
        iterations += 1;
        if iterations > max_iterations {
            return Err(Error::Consistency(format!(
                "arrival {t}: assortment loop did not terminate"
            )));
        }
    }
    Ok(row)
}

pub fn run_astgalg(instance: &Instance) -> Result<(AssortmentPlan, f64)> {
    run_astgalg_with(instance, GalgConfig::default())
}

pub fn run_astgalg_with(instance: &Instance, cfg: GalgConfig) -> Result<(AssortmentPlan, f64)> {
    instance.require_mode(Mode::Assortment)?;
    let mut state = FluidState::new(instance);
    let mut plan = AssortmentPlan::default();
    for (t, arrival) in instance.arrivals().iter().enumerate() {
        state.fluid_update(arrival.time)?;
        plan.rows.push(plan_arrival(&mut state, t, instance, &cfg)?);
    }
    let reward = plan.reward(instance);
    Ok((plan, reward))
}
