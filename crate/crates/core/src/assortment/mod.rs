//! Assortment planning: choice models, the fractional guide, Probability Match
//! and the randomized rounding that offers real assortments.

mod astalg;
mod astgalg;
mod choice;
mod oracle;
mod pmatch;

pub use astalg::run_astalg;
pub use astgalg::{run_astgalg, run_astgalg_with, AssortmentPlan, PlanRow};
pub use choice::{ChoiceContext, ChoiceModel, FeasibleFamily, MnlModel, TableModel};
pub use oracle::{assortment_revenue, best_assortment, EXHAUSTIVE_LIMIT};
pub use pmatch::{
    check_collection, probability_match, probability_match_generic, probability_match_mnl, MatchedCollection, GAMMA_TOL,
};
