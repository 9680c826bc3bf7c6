//! JSON instance files.
//!
//! ```json
//! {"mode":"matching",
//!  "resources":[{"id":"a","capacity":2,"reward":1.0,"usage":{"kind":"exponential","params":{"rate":1.0}}}],
//!  "arrivals":[{"time":0.0,"edges":["a"]}]}
//! ```
//!
//! Assortment arrivals carry `"choice":{"model":{...},"family":{...}}` instead of `edges`,
//! with `{"kind":"mnl","weights":{id:w}}` or `{"kind":"table","entries":[{"set":[ids],"probs":{id:p}}]}`
//! and `{"family":"all"}`, `{"family":"card","k":K}` or `{"family":"list","sets":[[ids]]}`.
//! Unknown fields are rejected everywhere.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Arrival, Demand, Instance, Mode, Resource, UsageDistribution};
use crate::assortment::{ChoiceContext, ChoiceModel, FeasibleFamily};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    mode: Mode,
    resources: Vec<Value>,
    arrivals: Vec<Value>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawResource {
    id: String,
    capacity: u32,
    reward: f64,
    usage: UsageDistribution,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawArrival {
    time: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    edges: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    choice: Option<RawChoice>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChoice {
    model: RawChoiceModel,
    #[serde(default)]
    family: RawFamily,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum RawChoiceModel {
    Mnl { weights: BTreeMap<String, f64> },
    Table { entries: Vec<RawTableEntry> },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTableEntry {
    set: Vec<String>,
    probs: BTreeMap<String, f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
enum RawFamily {
    #[default]
    All,
    Card {
        k: usize,
    },
    List {
        sets: Vec<Vec<String>>,
    },
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance> {
    let text = std::fs::read_to_string(path)?;
    instance_from_json(&text)
}

pub fn save_instance(instance: &Instance, path: impl AsRef<Path>) -> Result<()> {
    let mut text = instance_to_json(instance);
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn instance_from_json(text: &str) -> Result<Instance> {
    let raw: RawInstance = serde_json::from_str(text).map_err(|e| Error::parse("instance", None, e))?;

    let mut resources = Vec::with_capacity(raw.resources.len());
    for (i, value) in raw.resources.into_iter().enumerate() {
        let r: RawResource =
            serde_json::from_value(value).map_err(|e| Error::parse(format!("resources[{i}]"), None, e))?;
        resources.push(Resource {
            id: r.id,
            capacity: r.capacity,
            reward: r.reward,
            usage: r.usage,
        });
    }
    let ids: BTreeMap<&str, usize> = resources.iter().enumerate().map(|(i, r)| (r.id.as_str(), i)).collect();
    let lookup = |field: &str, t: usize, id: &str| -> Result<usize> {
        ids.get(id)
            .copied()
            .ok_or_else(|| Error::parse(field, Some(t), format!("unknown resource id `{id}`")))
    };
    let lookup_set = |field: &str, t: usize, set: &[String]| -> Result<Vec<usize>> {
        let mut out = set.iter().map(|id| lookup(field, t, id)).collect::<Result<Vec<_>>>()?;
        out.sort_unstable();
        let n = out.len();
        out.dedup();
        if out.len() != n {
            return Err(Error::parse(field, Some(t), "set lists a resource twice"));
        }
        Ok(out)
    };

    let mut arrivals = Vec::with_capacity(raw.arrivals.len());
    for (t, value) in raw.arrivals.into_iter().enumerate() {
        let field = format!("arrivals[{t}]");
        let a: RawArrival = serde_json::from_value(value).map_err(|e| Error::parse(&field, Some(t), e))?;
        let demand = match (a.edges, a.choice, raw.mode) {
            (Some(edges), None, Mode::Matching) => Demand::Edges(lookup_set(&format!("{field}.edges"), t, &edges)?),
            (None, Some(choice), Mode::Assortment) => {
                let model = match choice.model {
                    RawChoiceModel::Mnl { weights } => {
                        let w = weights
                            .iter()
                            .map(|(id, w)| Ok((lookup(&format!("{field}.choice.model.weights"), t, id)?, *w)))
                            .collect::<Result<Vec<_>>>()?;
                        ChoiceModel::mnl(w)
                    }
                    RawChoiceModel::Table { entries } => {
                        let f = format!("{field}.choice.model.entries");
                        let mut table = Vec::with_capacity(entries.len());
                        for e in entries {
                            let set = lookup_set(&f, t, &e.set)?;
                            let mut probs = vec![0.0; set.len()];
                            for (id, p) in &e.probs {
                                let i = lookup(&f, t, id)?;
                                let pos = set.binary_search(&i).map_err(|_| {
                                    Error::parse(&f, Some(t), format!("`{id}` has a probability but is not in the set"))
                                })?;
                                probs[pos] = *p;
                            }
                            table.push((set, probs));
                        }
                        ChoiceModel::table(table)
                    }
                }
                .map_err(|e| Error::parse(format!("{field}.choice.model"), Some(t), e))?;
                let family = match choice.family {
                    RawFamily::All => FeasibleFamily::All,
                    RawFamily::Card { k } => FeasibleFamily::Cardinality(k),
                    RawFamily::List { sets } => FeasibleFamily::List(
                        sets.iter()
                            .map(|s| lookup_set(&format!("{field}.choice.family"), t, s))
                            .collect::<Result<_>>()?,
                    ),
                };
                Demand::Choice(ChoiceContext::new(model, family))
            }
            (Some(_), Some(_), _) => return Err(Error::parse(&field, Some(t), "has both `edges` and `choice`")),
            (None, None, _) => return Err(Error::parse(&field, Some(t), "needs `edges` or `choice`")),
            (_, _, mode) => {
                return Err(Error::parse(
                    &field,
                    Some(t),
                    format!("demand kind does not match mode {mode:?}"),
                ))
            }
        };
        arrivals.push(Arrival { time: a.time, demand });
    }
    Instance::new(raw.mode, resources, arrivals)
}

pub fn instance_to_json(instance: &Instance) -> String {
    let id = |i: usize| instance.resources()[i].id.clone();
    let ids = |set: &[usize]| set.iter().map(|&i| id(i)).collect::<Vec<_>>();
    let resources = instance
        .resources()
        .iter()
        .map(|r| {
            serde_json::to_value(RawResource {
                id: r.id.clone(),
                capacity: r.capacity,
                reward: r.reward,
                usage: r.usage.clone(),
            })
            .expect("serializable")
        })
        .collect();
    let arrivals = instance
        .arrivals()
        .iter()
        .map(|a| {
            let raw = match &a.demand {
                Demand::Edges(e) => RawArrival {
                    time: a.time,
                    edges: Some(ids(e)),
                    choice: None,
                },
                Demand::Choice(ctx) => {
                    let model = match &ctx.model {
                        ChoiceModel::Mnl(m) => RawChoiceModel::Mnl {
                            weights: m.weights().iter().map(|&(i, w)| (id(i), w)).collect(),
                        },
                        ChoiceModel::Table(tbl) => RawChoiceModel::Table {
                            entries: tbl
                                .entries_sorted()
                                .into_iter()
                                .map(|(set, probs)| RawTableEntry {
                                    set: ids(set),
                                    probs: set.iter().zip(probs).map(|(&i, &p)| (id(i), p)).collect(),
                                })
                                .collect(),
                        },
                    };
                    let family = match &ctx.family {
                        FeasibleFamily::All => RawFamily::All,
                        FeasibleFamily::Cardinality(k) => RawFamily::Card { k: *k },
                        FeasibleFamily::List(sets) => RawFamily::List {
                            sets: sets.iter().map(|s| ids(s)).collect(),
                        },
                    };
                    RawArrival {
                        time: a.time,
                        edges: None,
                        choice: Some(RawChoice { model, family }),
                    }
                }
            };
            serde_json::to_value(raw).expect("serializable")
        })
        .collect();
    let raw = RawInstance {
        mode: instance.mode(),
        resources,
        arrivals,
    };
    serde_json::to_string_pretty(&raw).expect("serializable")
}
