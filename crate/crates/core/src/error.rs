use thiserror::Error;

/// Errors raised by instance construction, algorithm updates and the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("initial vector of node {node} has non-positive component {value} (ARIS requires positive initials)")]
    Positivity { node: usize, value: f64 },

    #[error("malformed payload: {0}")]
    MalformedPayload(String),

    #[error("goal not supported by {0}: only the uniform average goal is representable on the 0/(1/n) lattice")]
    UnsupportedGoal(&'static str),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("trace error: {0}")]
    Trace(String),

    #[error("domain error: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;
