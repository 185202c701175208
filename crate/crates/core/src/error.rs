use thiserror::Error;

use crate::network::NeuronId;

/// Errors produced anywhere in the verifier.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("value error: {0}")]
    Value(String),

    #[error("phase error: neuron {0} is not fixed")]
    Phase(NeuronId),

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("program is feasible; no inconsistent subsystem exists")]
    NotInfeasible,

    #[error("program is infeasible even with every candidate constraint removed")]
    BaseInfeasible,

    #[error("volume estimate requested over an empty sample set")]
    EmptySamples,

    #[error("rejection sampling accepted {accepted} of {requested} points before the cap")]
    SamplingFailed { accepted: usize, requested: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("two conditioning decisions target neuron {0}")]
    InconsistentDecisions(NeuronId),

    #[error("every conditioning candidate was pruned")]
    NoCandidate,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
