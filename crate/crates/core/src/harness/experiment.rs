//! Seeded experiment runs with CSV output.

use std::io::Write;

use crate::assortment::{run_astalg, run_astgalg, AssortmentPlan};
use crate::benchmarks::{clairvoyant_dp, offline_bmatching, run_greedy, run_ib, run_rba, PolicyId};
use crate::error::{Error, Result};
use crate::guide::{run_galg, FractionalMatch};
use crate::model::{draw_sample_path, Instance, Mode, RunRecord, SamplePath};
use crate::rounding::{run_alg, DeltaSchedule, DEFAULT_DELTA_CONSTANT};
use crate::stats::{derive_seed, replicate, Summary};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptMode {
    /// Exact solver when the instance is small enough, the offline matching
    /// bound when nothing is reusable, otherwise nothing.
    Auto,
    Off,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub instance_id: String,
    pub policies: Vec<PolicyId>,
    pub replications: usize,
    pub seed: u64,
    pub delta_constant: f64,
    pub opt: OptMode,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            instance_id: "instance".into(),
            policies: vec![PolicyId::Alg],
            replications: 100,
            seed: 0,
            delta_constant: DEFAULT_DELTA_CONSTANT,
            opt: OptMode::Auto,
        }
    }
}

impl ExperimentConfig {
    fn validate(&self, instance: &Instance) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::Argument("replications must be >= 1".into()));
        }
        if self.policies.is_empty() {
            return Err(Error::Argument("no policies given".into()));
        }
        if !(self.delta_constant.is_finite() && self.delta_constant >= 0.0) {
            return Err(Error::Argument(format!(
                "delta constant {} must be >= 0",
                self.delta_constant
            )));
        }
        for &p in &self.policies {
            let wants = if p.is_assortment() {
                Mode::Assortment
            } else {
                Mode::Matching
            };
            if wants != instance.mode() {
                return Err(Error::Argument(format!(
                    "policy {p} does not run on {:?} instances",
                    instance.mode()
                )));
            }
        }
        Ok(())
    }
}

/// Guides and schedules shared by every replication.
pub struct Prepared {
    pub guide: Option<(FractionalMatch, f64)>,
    pub plan: Option<(AssortmentPlan, f64)>,
    pub deltas: DeltaSchedule,
}

impl Prepared {
    pub fn new(instance: &Instance, delta_constant: f64) -> Result<Self> {
        let (guide, plan) = match instance.mode() {
            Mode::Matching => (Some(run_galg(instance)?), None),
            Mode::Assortment => (None, Some(run_astgalg(instance)?)),
        };
        Ok(Prepared {
            guide,
            plan,
            deltas: DeltaSchedule::with_constant(instance, delta_constant),
        })
    }
}

/// One stochastic run of `policy` on `path`.
pub fn run_policy(instance: &Instance, policy: PolicyId, prepared: &Prepared, path: &SamplePath) -> Result<RunRecord> {
    let no_guide = || Error::Argument(format!("policy {policy} needs a guide for this instance mode"));
    match policy {
        PolicyId::Greedy => run_greedy(instance, path),
        PolicyId::Ib => run_ib(instance, path),
        PolicyId::Rba => run_rba(instance, path),
        PolicyId::Alg => run_alg(
            instance,
            &prepared.guide.as_ref().ok_or_else(no_guide)?.0,
            &prepared.deltas,
            path,
        ),
        PolicyId::Astalg => run_astalg(
            instance,
            &prepared.plan.as_ref().ok_or_else(no_guide)?.0,
            &prepared.deltas,
            path,
        ),
        PolicyId::Galg | PolicyId::Astgalg => Err(Error::Argument(format!("{policy} is deterministic"))),
    }
}

fn guide_rewards(instance: &Instance, policy: PolicyId, prepared: &Prepared) -> Result<(f64, Vec<f64>)> {
    match (policy, &prepared.guide, &prepared.plan) {
        (PolicyId::Galg, Some((g, r)), _) => Ok((*r, g.reward_by_resource(instance))),
        (PolicyId::Astgalg, _, Some((p, r))) => Ok((*r, p.reward_by_resource(instance))),
        _ => Err(Error::Argument(format!(
            "{policy} does not run on {:?} instances",
            instance.mode()
        ))),
    }
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicySummary {
    pub policy: PolicyId,
    pub reward: Summary,
}

/// Per-run CSV: `seed, algorithm, total_reward, reward_<id>..., rejections,
/// stockouts`. Each stochastic policy gets one row per replication followed by
/// a `mean` row; deterministic guides get a single row.
pub fn simulate(instance: &Instance, config: &ExperimentConfig, out: impl Write) -> Result<Vec<PolicySummary>> {
    config.validate(instance)?;
    let prepared = Prepared::new(instance, config.delta_constant)?;
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["seed".to_string(), "algorithm".into(), "total_reward".into()];
    header.extend(instance.resources().iter().map(|r| format!("reward_{}", r.id)));
    header.extend(["rejections".into(), "stockouts".into()]);
    w.write_record(&header).map_err(csv_error)?;

    let mut summaries = Vec::new();
    for &policy in &config.policies {
        if policy.is_deterministic() {
            let (total, per) = guide_rewards(instance, policy, &prepared)?;
            let mut row = vec![config.seed.to_string(), policy.to_string(), num(total)];
            row.extend(per.into_iter().map(num));
            row.extend([String::new(), String::new()]);
            w.write_record(&row).map_err(csv_error)?;
            summaries.push(PolicySummary {
                policy,
                reward: Summary::of([total]),
            });
            continue;
        }
        let runs = replicate(config.replications, |r| {
            let seed = derive_seed(config.seed, r as u64);
            run_policy(instance, policy, &prepared, &draw_sample_path(instance, seed))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let n_res = instance.resources().len();
        let mut sums = vec![0.0; n_res + 3];
        for run in &runs {
            let per = run.reward_by_resource(instance);
            let mut row = vec![run.seed.to_string(), policy.to_string(), num(run.total_reward)];
            row.extend(per.iter().copied().map(num));
            row.extend([run.rejections().to_string(), run.stockouts().to_string()]);
            w.write_record(&row).map_err(csv_error)?;
            sums[0] += run.total_reward;
            for (s, v) in sums[1..=n_res].iter_mut().zip(&per) {
                *s += v;
            }
            sums[n_res + 1] += run.rejections() as f64;
            sums[n_res + 2] += run.stockouts() as f64;
        }
        let n = runs.len() as f64;
        let mut row = vec!["mean".to_string(), policy.to_string()];
        row.extend(sums.iter().map(|s| num(s / n)));
        w.write_record(&row).map_err(csv_error)?;
        summaries.push(PolicySummary {
            policy,
            reward: Summary::of(runs.iter().map(|r| r.total_reward)),
        });
    }
    w.flush()?;
    Ok(summaries)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptBound {
    pub value: f64,
    pub source: &'static str,
}

/// The benchmark value for `compare`, or a warning saying why there is none.
pub fn opt_bound(instance: &Instance, mode: OptMode) -> std::result::Result<Option<OptBound>, String> {
    if mode == OptMode::Off {
        return Ok(None);
    }
    if instance.mode() != Mode::Matching {
        return Err("no optimum is computed for assortment instances".into());
    }
    match clairvoyant_dp(instance) {
        Ok(value) => Ok(Some(OptBound { value, source: "dp" })),
        Err(Error::StateSpace { .. }) if instance.is_non_reusable() => offline_bmatching(instance)
            .map(|value| {
                Some(OptBound {
                    value,
                    source: "offline_matching",
                })
            })
            .map_err(|e| e.to_string()),
        Err(e) => Err(format!("optimum skipped: {e}")),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub rows: Vec<PolicySummary>,
    pub opt: Option<OptBound>,
    pub warnings: Vec<String>,
}

/// Coupled comparison: replication `r` hands every policy the same sample path.
/// CSV: `instance_id, policy, mean_reward, std_err, opt_bound, ratio`.
pub fn compare(instance: &Instance, config: &ExperimentConfig, out: impl Write) -> Result<Comparison> {
    config.validate(instance)?;
    let prepared = Prepared::new(instance, config.delta_constant)?;
    let stochastic: Vec<PolicyId> = config
        .policies
        .iter()
        .copied()
        .filter(|p| !p.is_deterministic())
        .collect();
    let totals = replicate(config.replications, |r| {
        let path = draw_sample_path(instance, derive_seed(config.seed, r as u64));
        stochastic
            .iter()
            .map(|&p| run_policy(instance, p, &prepared, &path).map(|rec| rec.total_reward))
            .collect::<Result<Vec<f64>>>()
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for &policy in &config.policies {
        let reward = if policy.is_deterministic() {
            Summary::of([guide_rewards(instance, policy, &prepared)?.0])
        } else {
            let col = stochastic.iter().position(|&p| p == policy).expect("listed");
            Summary::of(totals.iter().map(|t| t[col]))
        };
        rows.push(PolicySummary { policy, reward });
    }
    let mut warnings = Vec::new();
    let opt = opt_bound(instance, config.opt).unwrap_or_else(|w| {
        warnings.push(w);
        None
    });

    let mut w = csv::Writer::from_writer(out);
    w.write_record(["instance_id", "policy", "mean_reward", "std_err", "opt_bound", "ratio"])
        .map_err(csv_error)?;
    for row in &rows {
        let (bound, ratio) = match &opt {
            Some(o) if o.value > 0.0 => (num(o.value), num(row.reward.mean / o.value)),
            Some(o) => (num(o.value), String::new()),
            None => (String::new(), String::new()),
        };
        w.write_record([
            config.instance_id.clone(),
            row.policy.to_string(),
            num(row.reward.mean),
            num(row.reward.std_err),
            bound,
            ratio,
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(Comparison { rows, opt, warnings })
}
