//! Property batteries behind `verify`.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::generate::{random_dense, GeneratorParams};
use super::random::{random_monotone_pair, random_pmatch_triple, random_point_spec, random_tiny_instance};
use crate::assortment::{check_collection, probability_match_generic, probability_match_mnl, ChoiceModel};
use crate::benchmarks::{certificate_check, DpLimits, DpPolicy, DpSolver};
use crate::error::{Error, Result};
use crate::fluid::{augment_zero_set, compare_monotone, fluid_availability, simulate_random_process};
use crate::guide::run_galg;
use crate::model::{draw_sample_path, instance_to_json};
use crate::rounding::{alg_monte_carlo, DeltaSchedule};
use crate::stats::{derive_seed, replicate};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    RandomProcess,
    ZeroSet,
    Monotone,
    Probmatch,
    Availability,
    Certificate,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::RandomProcess,
        Suite::ZeroSet,
        Suite::Monotone,
        Suite::Probmatch,
        Suite::Availability,
        Suite::Certificate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::RandomProcess => "lemma1",
            Suite::ZeroSet => "lemma3",
            Suite::Monotone => "monotone",
            Suite::Probmatch => "probmatch",
            Suite::Availability => "availability",
            Suite::Certificate => "certificate",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Argument(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub trials: usize,
    pub seed: u64,
    /// Monte Carlo replications per trial where a suite needs them.
    pub replications: usize,
    /// Capacity of every resource in the availability suite.
    pub capacity: u32,
}

impl VerifyOptions {
    pub fn new(trials: usize, seed: u64) -> Self {
        VerifyOptions {
            trials,
            seed,
            replications: 100_000,
            capacity: 25,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub suite: Suite,
    pub trials: usize,
    pub failures: usize,
    /// Largest residual or z-score seen, whichever the suite measures.
    pub worst: f64,
    pub summary: String,
    /// JSON of the first failing input, for replay.
    pub failing_case: Option<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

struct Trial {
    ok: bool,
    metric: f64,
    case: String,
}

fn collect(suite: Suite, opts: &VerifyOptions, trials: Vec<Result<Trial>>, what: &str) -> Result<VerifyReport> {
    let trials = trials.into_iter().collect::<Result<Vec<_>>>()?;
    let failures = trials.iter().filter(|t| !t.ok).count();
    let worst = trials.iter().map(|t| t.metric).fold(0.0, f64::max);
    Ok(VerifyReport {
        suite,
        trials: opts.trials,
        failures,
        worst,
        summary: format!("{failures} of {} trials failed; worst {what} {worst:.3e}", opts.trials),
        failing_case: trials.into_iter().find(|t| !t.ok).map(|t| t.case),
    })
}

fn trial_rng(opts: &VerifyOptions, j: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(opts.seed, j as u64))
}

pub fn verify(suite: Suite, opts: &VerifyOptions) -> Result<VerifyReport> {
    if opts.trials == 0 {
        return Err(Error::Argument("trials must be >= 1".into()));
    }
    if opts.replications == 0 {
        return Err(Error::Argument("replications must be >= 1".into()));
    }
    match suite {
        Suite::RandomProcess => random_process(opts),
        Suite::ZeroSet => zero_set(opts),
        Suite::Monotone => monotone(opts),
        Suite::Probmatch => probmatch(opts),
        Suite::Availability => availability(opts),
        Suite::Certificate => certificate(opts),
    }
}

fn spec_json(spec: &crate::fluid::PointProcessSpec) -> String {
    serde_json::to_string(spec).expect("serializable")
}

/// Monte Carlo reward of the random process is within `3 se` of the fluid value,
/// with `se` floored at `1/n`.
fn random_process(opts: &VerifyOptions) -> Result<VerifyReport> {
    let trials = (0..opts.trials)
        .map(|j| {
            let spec = random_point_spec(&mut trial_rng(opts, j), 20);
            let exact = fluid_availability(&spec).reward;
            let mc = simulate_random_process(&spec, opts.replications, derive_seed(opts.seed ^ 0x5eed, j as u64))?;
            let gap = (mc.reward.mean - exact).abs();
            // rewards are integers, so 1/n is the smallest observable shift; a zero
            // sample variance only says the rare outcomes were never drawn
            let se = mc.reward.std_err.max(1.0 / opts.replications as f64);
            let z = gap / se;
            Ok(Trial {
                ok: gap <= 3.0 * se + 1e-9,
                metric: z,
                case: spec_json(&spec),
            })
        })
        .collect();
    collect(Suite::RandomProcess, opts, trials, "z-score")
}

/// Setting `p = 1` where the unit is never available leaves the reward unchanged.
fn zero_set(opts: &VerifyOptions) -> Result<VerifyReport> {
    let trials = replicate(opts.trials, |j| {
        let spec = random_point_spec(&mut trial_rng(opts, j), 20);
        let gap = (fluid_availability(&augment_zero_set(&spec)).reward - fluid_availability(&spec).reward).abs();
        Ok(Trial {
            ok: gap <= 1e-9,
            metric: gap,
            case: spec_json(&spec),
        })
    });
    collect(Suite::ZeroSet, opts, trials, "reward change")
}

/// Raising activation probabilities never lowers the fluid reward.
fn monotone(opts: &VerifyOptions) -> Result<VerifyReport> {
    let trials = replicate(opts.trials, |j| {
        let (lo, hi) = random_monotone_pair(&mut trial_rng(opts, j), 20);
        let w = compare_monotone(&lo, &hi)?;
        Ok(Trial {
            ok: w.holds,
            metric: (w.reward_lo - w.reward_hi).max(0.0),
            case: json!({"lo": lo, "hi": hi}).to_string(),
        })
    });
    collect(Suite::Monotone, opts, trials, "reward drop")
}

fn model_json(set: &[usize], model: &ChoiceModel) -> serde_json::Value {
    match model {
        ChoiceModel::Mnl(m) => json!({"kind": "mnl", "weights": m.weights()}),
        ChoiceModel::Table(t) => json!({
            "kind": "table",
            "entries": t.entries_sorted().into_iter().map(|(s, p)| json!({"set": s, "probs": p})).collect::<Vec<_>>(),
            "set": set,
        }),
    }
}

/// Nestedness, total weight, exact coverage and the per-round bound; under MNL
/// the sorting shortcut must reproduce the generic collection.
fn probmatch(opts: &VerifyOptions) -> Result<VerifyReport> {
    let trials = replicate(opts.trials, |j| {
        let (set, model, targets) = random_pmatch_triple(&mut trial_rng(opts, j), 12)?;
        let generic = probability_match_generic(&set, &model, &targets)?;
        let mut problems = Vec::new();
        if let Err(e) = check_collection(&set, &model, &targets, &generic, 1e-9) {
            problems.push(format!("generic: {e}"));
        }
        let mut residual: f64 = set
            .iter()
            .zip(&targets)
            .map(|(&s, &p)| (generic.coverage(&model, s) - p).abs())
            .fold(0.0, f64::max);
        if let ChoiceModel::Mnl(m) = &model {
            let fast = probability_match_mnl(&set, m, &targets)?;
            if let Err(e) = check_collection(&set, &model, &targets, &fast, 1e-9) {
                problems.push(format!("mnl: {e}"));
            }
            let same_weights = fast.weights.len() == generic.weights.len()
                && fast
                    .weights
                    .iter()
                    .zip(&generic.weights)
                    .all(|(a, b)| (a - b).abs() <= 1e-12);
            if fast.sets != generic.sets || !same_weights {
                problems.push("mnl shortcut differs from the generic collection".into());
            }
            for (&s, &p) in set.iter().zip(&targets) {
                residual = residual.max((fast.coverage(&model, s) - p).abs());
            }
        }
        Ok(Trial {
            ok: problems.is_empty(),
            metric: residual,
            case: json!({"set": set, "targets": targets, "model": model_json(&set, &model), "problems": problems})
                .to_string(),
        })
    });
    collect(Suite::Probmatch, opts, trials, "coverage residual")
}

/// Dense instance, every capacity `opts.capacity`: each `(i, t)` edge sees a free
/// unit with frequency at least `1 - 1/c - 3 se`, and each resource earns at
/// least `(1 - 1/c) / (1 + delta)` of its guide reward, less `3 se`.
fn availability(opts: &VerifyOptions) -> Result<VerifyReport> {
    let c = opts.capacity;
    let trials = (0..opts.trials)
        .map(|j| {
            let params = GeneratorParams::default()
                .set("n", 4)
                .set("t", 150)
                .set("c", c)
                .set("rate", 40)
                .set("density", 0.6)
                .set("dist", "mixed")
                .set("seed", derive_seed(opts.seed, j as u64));
            let inst = random_dense(&params)?;
            let (guide, _) = run_galg(&inst)?;
            let deltas = DeltaSchedule::standard(&inst);
            let mc = alg_monte_carlo(
                &inst,
                &guide,
                &deltas,
                opts.replications,
                derive_seed(opts.seed ^ 0xa11, j as u64),
            )?;
            let bound = 1.0 - 1.0 / c as f64;
            let mut ok = true;
            let mut worst: f64 = 0.0;
            for (t, a) in inst.arrivals().iter().enumerate() {
                for &i in a.edges() {
                    let f = mc.availability(i, t);
                    worst = worst.max(bound - f.mean);
                    ok &= f.mean >= bound - 3.0 * f.std_err - 1e-12;
                }
            }
            let galg = guide.reward_by_resource(&inst);
            for (i, s) in mc.per_resource.iter().enumerate() {
                let target = bound * deltas.scale(i) * galg[i];
                ok &= s.mean >= target - 3.0 * s.std_err - 1e-9;
            }
            Ok(Trial {
                ok,
                metric: worst.max(0.0),
                case: instance_to_json(&inst),
            })
        })
        .collect();
    collect(Suite::Availability, opts, trials, "availability shortfall")
}

/// The identity on a random instance, then the per-resource condition against
/// replays of the exact optimum on a tiny instance.
fn certificate(opts: &VerifyOptions) -> Result<VerifyReport> {
    let replays = opts.replications.min(5_000);
    let trials = (0..opts.trials)
        .map(|j| {
            let mut rng = trial_rng(opts, j);
            let params = GeneratorParams::default()
                .set("dist", "mixed")
                .set("c", 1 + j % 6)
                .set("seed", derive_seed(opts.seed, j as u64));
            let dense = random_dense(&params)?;
            let (guide, _) = run_galg(&dense)?;
            let rows: Vec<_> = guide.rows.iter().map(|r| r.units.clone()).collect();
            let identity = certificate_check(&dense, &rows, &[]);

            let tiny = random_tiny_instance(&mut rng, 8, 6, 2)?;
            let (tiny_guide, _) = run_galg(&tiny)?;
            let mut solver = DpSolver::new(&tiny, DpPolicy::Optimal, &DpLimits::default())?;
            solver.solve();
            let paths = (0..replays)
                .map(|r| solver.replay(&draw_sample_path(&tiny, derive_seed(opts.seed ^ 0xce47, r as u64))))
                .collect::<Result<Vec<_>>>()?;
            let tiny_rows: Vec<_> = tiny_guide.rows.iter().map(|r| r.units.clone()).collect();
            let report = certificate_check(&tiny, &tiny_rows, &paths);
            let worst_slack = report.resources.iter().map(|r| -r.slack).fold(0.0, f64::max);
            let gap = (identity.identity_total - identity.guide_reward).abs();
            Ok(Trial {
                ok: identity.identity_holds && report.holds(),
                metric: gap.max(worst_slack),
                case: if identity.identity_holds {
                    instance_to_json(&tiny)
                } else {
                    instance_to_json(&dense)
                },
            })
        })
        .collect();
    collect(Suite::Certificate, opts, trials, "identity gap or negative slack")
}
