//! Finite-time distributed average consensus: per-node update rules for
//! several algorithms, connectivity analysis of communication sequences,
//! sequence generators, a deterministic event simulator and resource-cost
//! accounting.
//!
//! Node indices are 0-based throughout the library; file formats and
//! messages shown to users are 1-based.

pub mod algorithms;
pub mod connectivity;
pub mod error;
pub mod generators;
pub mod metrics;
pub mod rng;
pub mod sim;
pub mod types;

pub use error::{Error, Result};
pub use types::{
    make_instance, AlgorithmKind, CommSequence, Goal, KnowledgeSet, NormalEstimate,
    ProblemInstance, Signal, Support,
};
