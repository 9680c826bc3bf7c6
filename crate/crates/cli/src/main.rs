//! `reuse-sim`: generate instances, run policies, compare against the optimum
//! and run the property batteries.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use reusable_alloc::benchmarks::PolicyId;
use reusable_alloc::guide::{run_galg_with, write_trace_jsonl, GalgConfig};
use reusable_alloc::harness::{
    compare, generate, simulate, verify, ExperimentConfig, GeneratorKind, GeneratorParams, OptMode, Suite,
    VerifyOptions,
};
use reusable_alloc::model::{load_instance, save_instance, Mode};
use reusable_alloc::rounding::DEFAULT_DELTA_CONSTANT;

/// Worker threads for Monte Carlo replications; defaults to all cores.
const WORKERS_ENV: &str = "REUSE_SIM_WORKERS";

#[derive(Parser)]
#[command(name = "reuse-sim", version, about = "Online allocation of reusable resources")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Opt {
    Auto,
    Off,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated instance file.
    Generate {
        /// greedy_tight, random_dense, reuse_stress or assortment_mnl
        #[arg(long)]
        kind: String,
        /// Comma-separated key=value pairs, e.g. `c=5,t=40,seed=3`.
        #[arg(long, default_value = "")]
        params: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-run rewards of one or more policies.
    Simulate {
        #[arg(long)]
        instance: PathBuf,
        /// Comma-separated: greedy, ib, rba, alg, astalg, galg, astgalg.
        #[arg(long, default_value = "alg")]
        policy: String,
        #[arg(long, default_value_t = 100)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Constant in `delta_i = sqrt(C ln c_i / c_i)`.
        #[arg(long, default_value_t = DEFAULT_DELTA_CONSTANT)]
        delta_const: f64,
        /// CSV output; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the guide's step trace as JSON lines (matching instances).
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run a property battery; exits non-zero on any failure.
    Verify {
        /// lemma1, lemma3, monotone, probmatch, availability or certificate
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Monte Carlo replications per trial.
        #[arg(long)]
        reps: Option<usize>,
        /// Resource capacity for the availability suite.
        #[arg(long, default_value_t = 25)]
        capacity: u32,
        /// Where to write the first failing case.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Mean reward per policy on shared sample paths, with the optimum when available.
    Compare {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value = "greedy,ib,rba,alg,galg")]
        policies: String,
        #[arg(long, default_value_t = 100)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "auto")]
        opt: Opt,
        #[arg(long, default_value_t = DEFAULT_DELTA_CONSTANT)]
        delta_const: f64,
        /// Value of the instance_id column; the file stem by default.
        #[arg(long)]
        id: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_policies(text: &str) -> Result<Vec<PolicyId>> {
    let mut out = Vec::new();
    for name in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let p: PolicyId = name.parse()?;
        if !out.contains(&p) {
            out.push(p);
        }
    }
    if out.is_empty() {
        bail!("no policies given");
    }
    Ok(out)
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn init_workers() -> Result<()> {
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let n: usize = v
            .parse()
            .with_context(|| format!("{WORKERS_ENV}={v:?} is not a number"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn instance_id(path: &Path, id: Option<String>) -> String {
    id.unwrap_or_else(|| {
        path.file_stem()
            .map_or("instance".into(), |s| s.to_string_lossy().into_owned())
    })
}

fn run(cli: Cli) -> Result<ExitCode> {
    init_workers()?;
    match cli.command {
        Command::Generate { kind, params, out } => {
            let kind: GeneratorKind = kind.parse()?;
            let inst = generate(kind, &GeneratorParams::parse(&params)?)?;
            save_instance(&inst, &out)?;
        }
        Command::Simulate {
            instance,
            policy,
            reps,
            seed,
            delta_const,
            out,
            trace,
        } => {
            let inst = load_instance(&instance).with_context(|| format!("loading {}", instance.display()))?;
            let config = ExperimentConfig {
                instance_id: instance_id(&instance, None),
                policies: parse_policies(&policy)?,
                replications: reps,
                seed,
                delta_constant: delta_const,
                opt: OptMode::Off,
            };
            let mut w = output(out.as_deref())?;
            simulate(&inst, &config, &mut w)?;
            w.flush()?;
            if let Some(path) = trace {
                if inst.mode() != Mode::Matching {
                    bail!("--trace needs a matching instance");
                }
                let run = run_galg_with(
                    &inst,
                    GalgConfig {
                        trace: true,
                        ..GalgConfig::default()
                    },
                )?;
                let mut f = BufWriter::new(File::create(&path)?);
                write_trace_jsonl(&run.trace, &mut f)?;
                f.flush()?;
            }
        }
        Command::Verify {
            suite,
            trials,
            seed,
            reps,
            capacity,
            dump,
        } => {
            let suite: Suite = suite.parse()?;
            let mut opts = VerifyOptions::new(trials, seed);
            opts.capacity = capacity;
            if let Some(r) = reps {
                opts.replications = r;
            }
            let report = verify(suite, &opts)?;
            println!(
                "{}: {} ({})",
                suite,
                if report.passed() { "PASS" } else { "FAIL" },
                report.summary
            );
            if let Some(case) = &report.failing_case {
                eprintln!("first failing case:\n{case}");
                if let Some(path) = dump {
                    std::fs::write(&path, format!("{case}\n"))?;
                    eprintln!("written to {}", path.display());
                }
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Compare {
            instance,
            policies,
            reps,
            seed,
            opt,
            delta_const,
            id,
            out,
        } => {
            let inst = load_instance(&instance).with_context(|| format!("loading {}", instance.display()))?;
            let config = ExperimentConfig {
                instance_id: instance_id(&instance, id),
                policies: parse_policies(&policies)?,
                replications: reps,
                seed,
                delta_constant: delta_const,
                opt: match opt {
                    Opt::Auto => OptMode::Auto,
                    Opt::Off => OptMode::Off,
                },
            };
            let mut w = output(out.as_deref())?;
            let cmp = compare(&inst, &config, &mut w)?;
            w.flush()?;
            for warning in cmp.warnings {
                eprintln!("warning: {warning}");
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
