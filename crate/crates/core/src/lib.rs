//! Sound and complete verification of ReLU networks against polytopic
//! input/output properties.
//!
//! The verifier relaxes the network into a linear program with one slack
//! variable per neuron, then searches over the phases of neurons whose slack
//! cannot be made tight. The search conditions the shallowest undecided
//! neurons first, picks among them the activation region of smallest volume,
//! prunes incompatible half-space combinations, infers forced phases with
//! symbolic interval analysis, and backtracks through irreducible
//! inconsistent subsystems of the conditioning constraints.

pub mod encoder;
pub mod error;
pub mod generate;
pub mod geometry;
pub mod interval;
pub mod lp;
pub mod network;
pub mod oracle;
pub mod properties;
pub mod search;

pub use error::{Error, Result};
