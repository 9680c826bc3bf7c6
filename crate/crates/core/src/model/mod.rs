//! Instances, usage laws, sample paths and run logs shared by every policy.

mod distribution;
mod instance;
mod inventory;
mod record;
mod sample;
mod schema;

pub use distribution::UsageDistribution;
pub use instance::{Arrival, Demand, Instance, Mode, Resource};
pub use inventory::{has_returned, InventoryState};
pub use record::{Decision, RejectReason, RunRecord};
pub use sample::{draw_sample_path, ArrivalDraws, SamplePath};
pub use schema::{instance_from_json, instance_to_json, load_instance, save_instance};
