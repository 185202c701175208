//! Property specifications and their decomposition into verification queries.

mod closed_loop;
mod file;
mod query;
mod robustness;

pub use closed_loop::{closed_loop_queries, grid_workspace, transition_query, ClosedLoopSpec};
pub use file::{LabeledQuery, Property};
pub use query::{CoupledConstraint, VerificationQuery};
pub use robustness::{
    argmax, check_robustness, class_maximal_set, robustness_queries, RobustnessOutcome, RobustnessSpec,
    RobustnessVerdict,
};
