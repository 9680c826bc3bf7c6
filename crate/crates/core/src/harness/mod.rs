//! Generators, experiment runs and property batteries used by the command line.

pub mod experiment;
pub mod generate;
pub mod random;
pub mod verify;

pub use experiment::{
    compare, opt_bound, run_policy, simulate, Comparison, ExperimentConfig, OptBound, OptMode, PolicySummary, Prepared,
};
pub use generate::{generate, GeneratorKind, GeneratorParams};
pub use verify::{verify, Suite, VerifyOptions, VerifyReport};
