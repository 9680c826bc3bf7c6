//! Baselines, the clairvoyant optimum and the guide's certificate.

mod baselines;
mod certificate;
mod dp;
mod offline;

use std::fmt;
use std::str::FromStr;

pub use baselines::{run_greedy, run_ib, run_rba};
pub use certificate::{certificate_check, certificate_values, CertificateReport, CertificateValues, ResourceSlack};
pub use dp::{clairvoyant_dp, clairvoyant_dp_with, dp_state_estimate, evaluate_policy, DpLimits, DpPolicy, DpSolver};
pub use offline::offline_bmatching;

use crate::error::Error;

/// Every policy the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PolicyId {
    Greedy,
    Ib,
    Rba,
    Alg,
    Astalg,
    Galg,
    Astgalg,
}

impl PolicyId {
    pub const ALL: [PolicyId; 7] = [
        PolicyId::Greedy,
        PolicyId::Ib,
        PolicyId::Rba,
        PolicyId::Alg,
        PolicyId::Astalg,
        PolicyId::Galg,
        PolicyId::Astgalg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyId::Greedy => "greedy",
            PolicyId::Ib => "ib",
            PolicyId::Rba => "rba",
            PolicyId::Alg => "alg",
            PolicyId::Astalg => "astalg",
            PolicyId::Galg => "galg",
            PolicyId::Astgalg => "astgalg",
        }
    }

    /// The fractional guides have no randomness; one replication says it all.
    pub fn is_deterministic(self) -> bool {
        matches!(self, PolicyId::Galg | PolicyId::Astgalg)
    }

    pub fn is_assortment(self) -> bool {
        matches!(self, PolicyId::Astalg | PolicyId::Astgalg)
    }
}

impl fmt::Display for PolicyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        PolicyId::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Argument(format!("unknown policy {s:?}")))
    }
}
