//! Fractional guide for b-matching with fluid reusability.
//!
//! Every unit `k` of resource `i` carries an available fraction `z_i(k)`. A
//! fractionally matched amount returns deterministically along the usage CDF.
//! Each arrival is poured into the unit with the highest reduced price
//! `r_i (1 - g(k*/c_i))`, where `k*` is the highest-index unit with mass left,
//! until the arrival is fully matched or nothing useful is left.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fluid::PointProcessSpec;
use crate::model::{Instance, Mode, UsageDistribution};

/// Fractions below this are snapped to zero.
pub const SNAP: f64 = 1e-12;

/// Trade-off function `g` in the reduced price.
pub type Tradeoff = fn(f64) -> f64;

pub fn exp_tradeoff(x: f64) -> f64 {
    (-x).exp()
}

#[derive(Debug, Clone, Copy)]
pub struct GalgConfig {
    pub tradeoff: Tradeoff,
    /// Log `z_i(k)` of every unit of every `i in S_t` just before `t` is matched.
    pub record_availability: bool,
    /// Log every inner-loop step.
    pub trace: bool,
}

impl Default for GalgConfig {
    fn default() -> Self {
        GalgConfig {
            tradeoff: exp_tradeoff,
            record_availability: false,
            trace: false,
        }
    }
}

pub fn reduced_price(reward: f64, unit_rank: usize, capacity: usize, g: Tradeoff) -> f64 {
    reward * (1.0 - g(unit_rank as f64 / capacity as f64))
}

#[derive(Debug, Clone)]
struct Outstanding {
    time: f64,
    mass: f64,
    /// CDF value already returned to the unit.
    credited: f64,
}

/// Fluid availability of every unit plus the mass still out on loan.
#[derive(Debug, Clone)]
pub struct FluidState {
    z: Vec<Vec<f64>>,
    outstanding: Vec<Vec<Vec<Outstanding>>>,
    usage: Vec<UsageDistribution>,
    last_update_time: f64,
}

impl FluidState {
    pub fn new(instance: &Instance) -> Self {
        let z: Vec<Vec<f64>> = instance
            .resources()
            .iter()
            .map(|r| vec![1.0; r.capacity as usize])
            .collect();
        let outstanding = z.iter().map(|u| vec![Vec::new(); u.len()]).collect();
        FluidState {
            z,
            outstanding,
            usage: instance.resources().iter().map(|r| r.usage.clone()).collect(),
            last_update_time: f64::NEG_INFINITY,
        }
    }

    pub fn z(&self, i: usize, k: usize) -> f64 {
        self.z[i][k]
    }

    pub fn units(&self, i: usize) -> &[f64] {
        &self.z[i]
    }

    pub fn last_update_time(&self) -> f64 {
        self.last_update_time
    }

    /// Highest-index unit of `i` with positive availability (0-based).
    pub fn highest_available(&self, i: usize) -> Option<usize> {
        self.z[i].iter().rposition(|&z| z > 0.0)
    }

    /// Mass of unit `(i, k)` matched in the past and not yet returned.
    pub fn outstanding_mass(&self, i: usize, k: usize) -> f64 {
        self.outstanding[i][k].iter().map(|o| o.mass * (1.0 - o.credited)).sum()
    }

    /// Credits every unit with the CDF increment of its past matches up to `time`:
    /// `z += sum_tau (F(time - a_tau) - F(previous update - a_tau)) y(tau)`.
    pub fn fluid_update(&mut self, time: f64) -> Result<()> {
        if time < self.last_update_time {
            return Err(Error::Argument(format!(
                "fluid update at {time} precedes the last update at {}",
                self.last_update_time
            )));
        }
        for (i, units) in self.outstanding.iter_mut().enumerate() {
            let dist = &self.usage[i];
            if dist.is_non_reusable() {
                continue;
            }
            for (k, loans) in units.iter_mut().enumerate() {
                if loans.is_empty() {
                    continue;
                }
                let mut back = 0.0;
                for loan in loans.iter_mut() {
                    let f = dist.cdf(time - loan.time);
                    back += loan.mass * (f - loan.credited);
                    loan.credited = f;
                }
                // fully returned loans never contribute again
                loans.retain(|l| l.credited < 1.0 - 1e-15);
                let z = &mut self.z[i][k];
                *z += back;
                if *z > 1.0 + 1e-9 {
                    return Err(Error::Consistency(format!(
                        "unit {k} of resource {i} reached availability {z} at time {time}"
                    )));
                }
                *z = z.min(1.0);
                if *z < SNAP {
                    *z = 0.0;
                }
            }
        }
        self.last_update_time = time;
        Ok(())
    }

    /// Fractionally matches `amount` of unit `(i, k)` at `time`.
    pub fn consume(&mut self, i: usize, k: usize, amount: f64, time: f64) {
        let z = &mut self.z[i][k];
        *z -= amount;
        if *z < SNAP {
            *z = 0.0;
        }
        let loans = &mut self.outstanding[i][k];
        match loans.last_mut() {
            Some(last) if last.time == time && last.credited == 0.0 => last.mass += amount,
            _ => loans.push(Outstanding {
                time,
                mass: amount,
                credited: 0.0,
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnitShare {
    pub resource: usize,
    /// 0-based unit index; unit `k` has rank `k + 1`.
    pub unit: usize,
    pub amount: f64,
}

/// Guide output for one arrival.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MatchRow {
    /// `(resource, x_it)` ascending by resource, positive entries only.
    pub x: Vec<(usize, f64)>,
    /// Per-unit breakdown `y_i(k, t)`.
    pub units: Vec<UnitShare>,
}

impl MatchRow {
    pub fn x(&self, i: usize) -> f64 {
        self.x.iter().find(|(j, _)| *j == i).map_or(0.0, |(_, v)| *v)
    }

    pub fn matched_mass(&self) -> f64 {
        self.x.iter().map(|(_, v)| v).sum()
    }

    pub fn unit_amount(&self, i: usize, k: usize) -> f64 {
        self.units
            .iter()
            .filter(|u| u.resource == i && u.unit == k)
            .map(|u| u.amount)
            .sum()
    }

    pub(crate) fn from_units(units: Vec<UnitShare>) -> Self {
        let mut x: Vec<(usize, f64)> = Vec::new();
        for u in &units {
            match x.iter_mut().find(|(j, _)| *j == u.resource) {
                Some(e) => e.1 += u.amount,
                None => x.push((u.resource, u.amount)),
            }
        }
        x.sort_by_key(|&(i, _)| i);
        MatchRow { x, units }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FractionalMatch {
    pub rows: Vec<MatchRow>,
}

impl FractionalMatch {
    pub fn x(&self, i: usize, t: usize) -> f64 {
        self.rows[t].x(i)
    }

    pub fn reward_by_resource(&self, instance: &Instance) -> Vec<f64> {
        let mut out = vec![0.0; instance.resources().len()];
        for row in &self.rows {
            for &(i, x) in &row.x {
                out[i] += instance.resources()[i].reward * x;
            }
        }
        out
    }

    pub fn reward(&self, instance: &Instance) -> f64 {
        self.reward_by_resource(instance).iter().sum()
    }
}

/// One inner-loop step, for golden-trace dumps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceStep {
    pub t: usize,
    pub i: String,
    /// Unit rank, 1-based.
    pub k: usize,
    pub y: f64,
    pub reduced_price: f64,
}

#[derive(Debug, Clone, Default)]
pub struct MatchStep {
    pub row: MatchRow,
    pub iterations: usize,
    pub trace: Vec<TraceStep>,
    /// `(resource, z of every unit)` for `i in S_t`, before matching.
    pub availability: Option<Vec<(usize, Vec<f64>)>>,
}

/// Fractionally matches arrival `t`. The fluid update for its time must already
/// have been applied.
pub fn match_arrival(state: &mut FluidState, t: usize, instance: &Instance, cfg: &GalgConfig) -> Result<MatchStep> {
    let arrival = &instance.arrivals()[t];
    let edges = arrival.edges();
    let mut step = MatchStep {
        availability: cfg
            .record_availability
            .then(|| edges.iter().map(|&i| (i, state.units(i).to_vec())).collect()),
        ..MatchStep::default()
    };
    let max_iterations = edges.iter().map(|&i| instance.capacity(i)).sum::<usize>() + 1;
    let mut units = Vec::new();
    let mut eta = 0.0;
    while 1.0 - eta > SNAP {
        // highest reduced price; ties go to the lowest resource index
        let mut best: Option<(usize, usize, f64)> = None;
        for &i in edges {
            let Some(k) = state.highest_available(i) else { continue };
            let r = &instance.resources()[i];
            let price = reduced_price(r.reward, k + 1, r.capacity as usize, cfg.tradeoff);
            if price > 0.0 && best.is_none_or(|(_, _, p)| price > p) {
                best = Some((i, k, price));
            }
        }
        let Some((i, k, price)) = best else { break };
        let y = state.z(i, k).min(1.0 - eta);
        state.consume(i, k, y, arrival.time);
        eta += y;
        units.push(UnitShare {
            resource: i,
            unit: k,
            amount: y,
        });
        if cfg.trace {
            step.trace.push(TraceStep {
                t,
                i: instance.resources()[i].id.clone(),
                k: k + 1,
                y,
                reduced_price: price,
            });
        }
        step.iterations += 1;
        if step.iterations > max_iterations {
            return Err(Error::Consistency(format!(
                "arrival {t}: matching loop did not terminate"
            )));
        }
    }
    step.row = MatchRow::from_units(units);
    Ok(step)
}

/// Online driver: feed arrivals in order.
pub struct Galg<'a> {
    instance: &'a Instance,
    cfg: GalgConfig,
    state: FluidState,
    next: usize,
}

impl<'a> Galg<'a> {
    pub fn new(instance: &'a Instance, cfg: GalgConfig) -> Result<Self> {
        instance.require_mode(Mode::Matching)?;
        Ok(Galg {
            instance,
            cfg,
            state: FluidState::new(instance),
            next: 0,
        })
    }

    pub fn state(&self) -> &FluidState {
        &self.state
    }

    /// Processes the next arrival; `None` once the sequence is exhausted.
    pub fn step(&mut self) -> Result<Option<MatchStep>> {
        let t = self.next;
        let Some(arrival) = self.instance.arrivals().get(t) else {
            return Ok(None);
        };
        self.state.fluid_update(arrival.time)?;
        let step = match_arrival(&mut self.state, t, self.instance, &self.cfg)?;
        self.next += 1;
        Ok(Some(step))
    }
}

#[derive(Debug, Clone)]
pub struct GalgRun {
    pub plan: FractionalMatch,
    pub reward: f64,
    pub iterations: Vec<usize>,
    pub trace: Vec<TraceStep>,
    /// Per arrival, present when `record_availability` is set.
    pub availability: Vec<Vec<(usize, Vec<f64>)>>,
}

pub fn run_galg(instance: &Instance) -> Result<(FractionalMatch, f64)> {
    let run = run_galg_with(instance, GalgConfig::default())?;
    Ok((run.plan, run.reward))
}

pub fn run_galg_with(instance: &Instance, cfg: GalgConfig) -> Result<GalgRun> {
    let mut galg = Galg::new(instance, cfg)?;
    let mut run = GalgRun {
        plan: FractionalMatch::default(),
        reward: 0.0,
        iterations: Vec::new(),
        trace: Vec::new(),
        availability: Vec::new(),
    };
    while let Some(step) = galg.step()? {
        run.iterations.push(step.iterations);
        run.trace.extend(step.trace);
        if let Some(a) = step.availability {
            run.availability.push(a);
        }
        run.plan.rows.push(step.row);
    }
    run.reward = run.plan.reward(instance);
    Ok(run)
}

pub fn write_trace_jsonl(trace: &[TraceStep], mut out: impl Write) -> Result<()> {
    for step in trace {
        serde_json::to_writer(&mut out, step).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// The single-unit process that unit `k` of resource `i` follows inside the
/// guide: points are the arrivals with an edge to `i`, and the activation
/// probability at each is the share of the unit's available mass that was
/// matched. Returns the spec and the logged availability at those points.
///
/// Needs a run made with `record_availability`.
pub fn unit_process(instance: &Instance, run: &GalgRun, i: usize, k: usize) -> Result<(PointProcessSpec, Vec<f64>)> {
    if run.availability.len() != instance.num_arrivals() {
        return Err(Error::Argument("run was made without record_availability".into()));
    }
    let mut times = Vec::new();
    let mut probs = Vec::new();
    let mut logged = Vec::new();
    for (t, arrival) in instance.arrivals().iter().enumerate() {
        let Some((_, z)) = run.availability[t].iter().find(|(j, _)| *j == i) else {
            continue;
        };
        let eta = z[k];
        let gamma = run.plan.rows[t].unit_amount(i, k);
        times.push(arrival.time);
        probs.push(if eta > 0.0 { (gamma / eta).min(1.0) } else { 0.0 });
        logged.push(eta);
    }
    let spec = PointProcessSpec::from_arrival_times(instance.resources()[i].usage.clone(), &times, probs)?;
    Ok((spec, logged))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Arrival, Resource};

    fn resource(id: &str, capacity: u32, reward: f64, usage: UsageDistribution) -> Resource {
        Resource {
            id: id.into(),
            capacity,
            reward,
            usage,
        }
    }

    #[test]
    fn update_without_history_is_a_no_op() {
        let inst = Instance::new(
            Mode::Matching,
            vec![resource("a", 2, 1.0, UsageDistribution::Exponential { rate: 1.0 })],
            vec![],
        )
        .unwrap();
        let mut s = FluidState::new(&inst);
        s.fluid_update(3.0).unwrap();
        assert_eq!(s.units(0), &[1.0, 1.0]);
        assert!(s.fluid_update(1.0).is_err());
    }

    #[test]
    fn step_cdf_returns_whole_unit() {
        let inst = Instance::new(
            Mode::Matching,
            vec![resource(
                "a",
                1,
                1.0,
                UsageDistribution::Deterministic { duration: 1.0 },
            )],
            vec![],
        )
        .unwrap();
        let mut s = FluidState::new(&inst);
        s.fluid_update(0.0).unwrap();
        s.consume(0, 0, 1.0, 0.0);
        assert_eq!(s.z(0, 0), 0.0);
        s.fluid_update(0.5).unwrap();
        assert_eq!(s.z(0, 0), 0.0);
        s.fluid_update(1.0).unwrap();
        assert_eq!(s.z(0, 0), 1.0);
    }

    #[test]
    fn exponential_single_increment() {
        let inst = Instance::new(
            Mode::Matching,
            vec![resource("a", 1, 1.0, UsageDistribution::Exponential { rate: 1.0 })],
            vec![],
        )
        .unwrap();
        let mut s = FluidState::new(&inst);
        s.fluid_update(0.0).unwrap();
        s.consume(0, 0, 1.0, 0.0);
        s.fluid_update(1.0).unwrap();
        assert!((s.z(0, 0) - 0.632_120_558_828_557_7).abs() < 1e-12);
        assert!((s.outstanding_mass(0, 0) - (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn non_reusable_single_unit_trace() {
        let inst = Instance::new(
            Mode::Matching,
            vec![resource("a", 1, 1.0, UsageDistribution::Infinite)],
            vec![Arrival::matching(0.0, vec![0]), Arrival::matching(1.0, vec![0])],
        )
        .unwrap();
        let (plan, reward) = run_galg(&inst).unwrap();
        assert_eq!(plan.x(0, 0), 1.0);
        assert_eq!(plan.x(0, 1), 0.0);
        assert_eq!(reward, 1.0);
    }

    #[test]
    fn higher_reward_wins_at_full_inventory() {
        let inst = Instance::new(
            Mode::Matching,
            vec![
                resource("a", 1, 2.0, UsageDistribution::Infinite),
                resource("b", 1, 1.0, UsageDistribution::Infinite),
            ],
            vec![Arrival::matching(0.0, vec![0, 1])],
        )
        .unwrap();
        let (plan, _) = run_galg(&inst).unwrap();
        assert_eq!(plan.rows[0].x, vec![(0, 1.0)]);
    }

    #[test]
    fn partial_unit_then_next_unit() {
        // c = 2 with z = (1, 0.4): unit 2's 0.4 goes first, then 0.6 of unit 1
        let inst = Instance::new(
            Mode::Matching,
            vec![resource("a", 2, 1.0, UsageDistribution::Infinite)],
            vec![Arrival::matching(0.0, vec![0])],
        )
        .unwrap();
        let mut s = FluidState::new(&inst);
        s.consume(0, 1, 0.6, -1.0);
        let step = match_arrival(
            &mut s,
            0,
            &inst,
            &GalgConfig {
                trace: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((step.row.unit_amount(0, 1) - 0.4).abs() < 1e-15);
        assert!((step.row.unit_amount(0, 0) - 0.6).abs() < 1e-15);
        assert!((step.row.x(0) - 1.0).abs() < 1e-15);
        assert_eq!(step.iterations, 2);
        assert_eq!(step.trace.iter().map(|s| s.k).collect::<Vec<_>>(), vec![2, 1]);
    }

    #[test]
    fn empty_edge_set_gives_empty_row() {
        let inst = Instance::new(
            Mode::Matching,
            vec![resource("a", 1, 1.0, UsageDistribution::Infinite)],
            vec![Arrival::matching(0.0, vec![])],
        )
        .unwrap();
        let (plan, reward) = run_galg(&inst).unwrap();
        assert!(plan.rows[0].x.is_empty());
        assert_eq!(reward, 0.0);
    }

    #[test]
    fn spaced_deterministic_arrivals_always_matched() {
        let d = 1.5;
        let inst = Instance::new(
            Mode::Matching,
            vec![resource("a", 1, 1.0, UsageDistribution::Deterministic { duration: d })],
            (0..12).map(|t| Arrival::matching(t as f64 * d, vec![0])).collect(),
        )
        .unwrap();
        assert_eq!(run_galg(&inst).unwrap().1, 12.0);
    }

    #[test]
    fn trace_dump_is_json_lines() {
        let inst = Instance::new(
            Mode::Matching,
            vec![resource("a", 2, 1.0, UsageDistribution::Infinite)],
            vec![Arrival::matching(0.0, vec![0])],
        )
        .unwrap();
        let run = run_galg_with(
            &inst,
            GalgConfig {
                trace: true,
                ..Default::default()
            },
        )
        .unwrap();
        let mut buf = Vec::new();
        write_trace_jsonl(&run.trace, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(
            text.starts_with(r#"{"t":0,"i":"a","k":2,"y":1.0,"reduced_price":"#),
            "{text}"
        );
    }
}
