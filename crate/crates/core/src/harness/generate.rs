//! Instance generators.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use crate::assortment::{ChoiceContext, ChoiceModel, FeasibleFamily};
use crate::error::{Error, Result};
use crate::model::{Arrival, Instance, Mode, Resource, UsageDistribution};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    GreedyTight,
    RandomDense,
    ReuseStress,
    AssortmentMnl,
}

impl GeneratorKind {
    pub fn name(self) -> &'static str {
        match self {
            GeneratorKind::GreedyTight => "greedy_tight",
            GeneratorKind::RandomDense => "random_dense",
            GeneratorKind::ReuseStress => "reuse_stress",
            GeneratorKind::AssortmentMnl => "assortment_mnl",
        }
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GeneratorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            GeneratorKind::GreedyTight,
            GeneratorKind::RandomDense,
            GeneratorKind::ReuseStress,
            GeneratorKind::AssortmentMnl,
        ]
        .into_iter()
        .find(|k| k.name() == s)
        .ok_or_else(|| Error::Argument(format!("unknown generator {s:?}")))
    }
}

/// `key=value` pairs, e.g. parsed from `c=5,t=40,dist=exponential`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GeneratorParams {
    values: BTreeMap<String, String>,
}

impl GeneratorParams {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for pair in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| Error::Argument(format!("parameter {pair:?} is not key=value")))?;
            if values.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
                return Err(Error::Argument(format!("parameter {k:?} given twice")));
            }
        }
        Ok(GeneratorParams { values })
    }

    pub fn set(mut self, key: &str, value: impl ToString) -> Self {
        self.values.insert(key.to_string(), value.to_string());
        self
    }

    fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.values.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::Argument(format!("parameter {key}={v:?} is not valid"))),
        }
    }

    fn str(&self, key: &str, default: &str) -> String {
        self.values.get(key).cloned().unwrap_or_else(|| default.to_string())
    }

    fn check_known(&self, known: &[&str]) -> Result<()> {
        match self.values.keys().find(|k| !known.contains(&k.as_str())) {
            Some(k) => Err(Error::Argument(format!(
                "unknown parameter {k:?}; expected one of {known:?}"
            ))),
            None => Ok(()),
        }
    }
}

pub fn generate(kind: GeneratorKind, params: &GeneratorParams) -> Result<Instance> {
    match kind {
        GeneratorKind::GreedyTight => greedy_tight(params),
        GeneratorKind::RandomDense => random_dense(params),
        GeneratorKind::ReuseStress => reuse_stress(params),
        GeneratorKind::AssortmentMnl => assortment_mnl(params),
    }
}

fn positive<T: PartialOrd + Default + fmt::Display>(key: &str, v: T) -> Result<T> {
    if v > T::default() {
        Ok(v)
    } else {
        Err(Error::Argument(format!("parameter {key} must be positive, got {v}")))
    }
}

fn probability(key: &str, v: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(Error::Argument(format!("parameter {key} must lie in [0, 1], got {v}")))
    }
}

/// Two non-reusable resources with equal rewards and `c` units each. The first
/// `c` arrivals see both; the last `c` see only `a`, which Greedy's lowest-index
/// tie-break drains first. Greedy earns `c r`, the optimum `2 c r`.
///
/// Params: `c` (default 1), `r` (default 1).
pub fn greedy_tight(params: &GeneratorParams) -> Result<Instance> {
    params.check_known(&["c", "r"])?;
    let c: u32 = positive("c", params.get("c", 1)?)?;
    let r: f64 = params.get("r", 1.0)?;
    let resources = ["a", "b"]
        .iter()
        .map(|id| Resource {
            id: id.to_string(),
            capacity: c,
            reward: r,
            usage: UsageDistribution::Infinite,
        })
        .collect();
    let arrivals = (0..2 * c as usize)
        .map(|t| Arrival::matching(t as f64, if t < c as usize { vec![0, 1] } else { vec![0] }))
        .collect();
    Instance::new(Mode::Matching, resources, arrivals)
}

fn usage_law(kind: &str, mean: f64, rng: &mut ChaCha8Rng) -> Result<UsageDistribution> {
    Ok(match kind {
        "deterministic" => UsageDistribution::Deterministic { duration: mean },
        "exponential" => UsageDistribution::Exponential { rate: 1.0 / mean },
        "two_point" => UsageDistribution::TwoPoint {
            low: 0.5 * mean,
            high: 1.5 * mean,
            p_low: 0.5,
        },
        "geometric" => UsageDistribution::Geometric {
            p: (1.0 / mean).min(1.0),
            step: 1.0,
        },
        "empirical" => UsageDistribution::EmpiricalDiscrete {
            values: vec![0.25 * mean, mean, 1.75 * mean],
            probs: vec![0.25, 0.5, 0.25],
        },
        "infinite" => UsageDistribution::Infinite,
        "mixed" => {
            const KINDS: [&str; 5] = ["deterministic", "exponential", "two_point", "geometric", "empirical"];
            let pick = KINDS[rng.random_range(0..KINDS.len())];
            return usage_law(pick, mean, rng);
        }
        other => return Err(Error::Argument(format!("unknown usage kind {other:?}"))),
    })
}

struct Common {
    n: usize,
    t: usize,
    c: u32,
    rate: f64,
    density: f64,
    mean: f64,
    dist: String,
    rng: ChaCha8Rng,
}

const COMMON: [&str; 8] = ["n", "t", "c", "rate", "density", "mean", "dist", "seed"];

impl Common {
    fn read(params: &GeneratorParams) -> Result<Self> {
        Ok(Common {
            n: positive("n", params.get("n", 5)?)?,
            t: params.get("t", 50)?,
            c: positive("c", params.get("c", 5)?)?,
            rate: positive("rate", params.get("rate", 1.0)?)?,
            density: probability("density", params.get("density", 0.5)?)?,
            mean: positive("mean", params.get("mean", 2.0)?)?,
            dist: params.str("dist", "exponential"),
            rng: ChaCha8Rng::seed_from_u64(params.get("seed", 0)?),
        })
    }

    fn resources(&mut self) -> Result<Vec<Resource>> {
        (0..self.n)
            .map(|i| {
                Ok(Resource {
                    id: format!("r{i}"),
                    capacity: self.c,
                    reward: (self.rng.random_range(0.5..2.0f64) * 1000.0).round() / 1000.0,
                    usage: usage_law(&self.dist, self.mean, &mut self.rng)?,
                })
            })
            .collect()
    }

    /// Poisson arrival times starting at 0.
    fn times(&mut self) -> Vec<f64> {
        let gap = Exp::new(self.rate).expect("positive rate");
        let mut now = 0.0;
        (0..self.t)
            .map(|t| {
                if t > 0 {
                    // keep strictly increasing even if a gap underflows
                    now += gap.sample(&mut self.rng).max(1e-9);
                }
                now
            })
            .collect()
    }

    /// Random non-empty neighborhood, each resource independently with `density`.
    fn edges(&mut self) -> Vec<usize> {
        let mut e: Vec<usize> = (0..self.n).filter(|_| self.rng.random_bool(self.density)).collect();
        if e.is_empty() {
            e.push(self.rng.random_range(0..self.n));
        }
        e
    }
}

/// Poisson arrivals with random neighborhoods.
///
/// Params: `n` resources (5), `t` arrivals (50), `c` capacity (5), `rate` (1),
/// `density` edge probability (0.5), `mean` usage (2), `dist` usage kind
/// (`exponential`; also deterministic, two_point, geometric, empirical,
/// infinite, mixed), `seed` (0).
pub fn random_dense(params: &GeneratorParams) -> Result<Instance> {
    params.check_known(&COMMON)?;
    let mut g = Common::read(params)?;
    let resources = g.resources()?;
    let times = g.times();
    let arrivals = times
        .into_iter()
        .map(|time| Arrival::matching(time, g.edges()))
        .collect();
    Instance::new(Mode::Matching, resources, arrivals)
}

/// One resource with deterministic usage `d` and gaps alternating `d - eps`
/// and `d + eps`, so returns land just after or just before each arrival.
///
/// Params: `d` (1), `eps` (0.1), `t` (20), `c` (1), `r` (1).
pub fn reuse_stress(params: &GeneratorParams) -> Result<Instance> {
    params.check_known(&["d", "eps", "t", "c", "r"])?;
    let d: f64 = positive("d", params.get("d", 1.0)?)?;
    let eps: f64 = positive("eps", params.get("eps", 0.1)?)?;
    if eps >= d {
        return Err(Error::Argument(format!("eps = {eps} must be below d = {d}")));
    }
    let t: usize = params.get("t", 20)?;
    let resource = Resource {
        id: "a".into(),
        capacity: positive("c", params.get("c", 1)?)?,
        reward: params.get("r", 1.0)?,
        usage: UsageDistribution::Deterministic { duration: d },
    };
    let mut now = 0.0;
    let arrivals = (0..t)
        .map(|s| {
            if s > 0 {
                now += if s % 2 == 1 { d - eps } else { d + eps };
            }
            Arrival::matching(now, vec![0])
        })
        .collect();
    Instance::new(Mode::Matching, vec![resource], arrivals)
}

/// Poisson arrivals, each with its own MNL model over a random neighborhood.
///
/// Params: as `random_dense`, plus `k` cardinality limit (0 = none) and the
/// weight range `wmin`..`wmax` (0.2..2).
pub fn assortment_mnl(params: &GeneratorParams) -> Result<Instance> {
    let mut known = COMMON.to_vec();
    known.extend(["k", "wmin", "wmax"]);
    params.check_known(&known)?;
    let mut g = Common::read(params)?;
    let k: usize = params.get("k", 0)?;
    let wmin: f64 = positive("wmin", params.get("wmin", 0.2)?)?;
    let wmax: f64 = params.get("wmax", 2.0)?;
    if wmax <= wmin {
        return Err(Error::Argument(format!("wmax = {wmax} must exceed wmin = {wmin}")));
    }
    let family = if k == 0 {
        FeasibleFamily::All
    } else {
        FeasibleFamily::Cardinality(k)
    };
    let resources = g.resources()?;
    let times = g.times();
    let mut arrivals = Vec::with_capacity(times.len());
    for time in times {
        let edges = g.edges();
        let weights = edges
            .into_iter()
            .map(|i| (i, (g.rng.random_range(wmin..wmax) * 1000.0).round() / 1000.0))
            .collect();
        arrivals.push(Arrival::choice(
            time,
            ChoiceContext::new(ChoiceModel::mnl(weights)?, family.clone()),
        ));
    }
    Instance::new(Mode::Assortment, resources, arrivals)
}
