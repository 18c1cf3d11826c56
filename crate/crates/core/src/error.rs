use num_bigint::BigUint;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    /// The input point is not where the operation needs it to be
    /// (e.g. a chord requested from a point outside the body).
    #[error("invalid state: {0}")]
    State(String),

    #[error("polytope is unbounded")]
    Unbounded,

    #[error("degenerate polytope: {0}")]
    Degenerate(String),

    /// Exact computation requested beyond the supported size.
    #[error("{0}")]
    Capability(String),

    #[error("result set too large: {count} elements exceed cap {cap}")]
    Capacity { count: BigUint, cap: usize },

    #[error("node budget of {budget} exhausted after {nodes_explored} nodes (partial count {partial})")]
    Budget {
        budget: u64,
        nodes_explored: u64,
        partial: BigUint,
    },

    #[error("level {level} (box lower bound {lower}) accepted no samples; refine schedule")]
    RefineSchedule { level: usize, lower: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}
