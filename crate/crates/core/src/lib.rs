//! Online allocation of reusable resources: fluid guides, randomized rounding,
//! assortment planning and the benchmarks to judge them against.
//!
//! ```
//! use reusable_alloc::harness::{generate, GeneratorKind, GeneratorParams};
//! use reusable_alloc::{run_galg, clairvoyant_dp};
//!
//! let inst = generate(GeneratorKind::GreedyTight, &GeneratorParams::parse("c=2").unwrap()).unwrap();
//! let (_, guide_reward) = run_galg(&inst).unwrap();
//! let opt = clairvoyant_dp(&inst).unwrap();
//! assert_eq!(opt, 4.0);
//! assert!(guide_reward >= 0.63 * opt);
//! ```

pub mod assortment;
pub mod benchmarks;
pub mod error;
pub mod fluid;
pub mod guide;
pub mod harness;
pub mod model;
pub mod rounding;
pub mod stats;

pub use assortment::{
    best_assortment, probability_match, run_astalg, run_astgalg, AssortmentPlan, ChoiceContext, ChoiceModel,
    FeasibleFamily, MatchedCollection,
};
pub use benchmarks::{
    certificate_check, clairvoyant_dp, offline_bmatching, run_greedy, run_ib, run_rba, CertificateReport, PolicyId,
};
pub use error::{Error, Result};
pub use fluid::{augment_zero_set, compare_monotone, fluid_availability, simulate_random_process, PointProcessSpec};
pub use guide::{run_galg, run_galg_with, FractionalMatch, GalgConfig};
pub use model::{
    draw_sample_path, load_instance, save_instance, Arrival, Decision, Instance, InventoryState, Mode, Resource,
    RunRecord, SamplePath, UsageDistribution,
};
pub use rounding::{availability_estimate, run_alg, DeltaSchedule};
