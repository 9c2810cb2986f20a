use thiserror::Error;

/// Errors produced by the estimation and simulation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("month {month} outside observed range [{first}, {last}]")]
    MonthOutOfRange { month: i32, first: i32, last: i32 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("did not converge after {iterations} iterations (best point {best})")]
    NonConvergence { iterations: usize, best: f64 },

    #[error("insufficient data: {0}")]
    Insufficient(String),

    #[error("nonpositive value {value} at month {month}")]
    NonPositive { month: i32, value: f64 },

    #[error("misaligned inputs: {0}")]
    Misaligned(String),

    #[error("{failed} of {total} bootstrap replicas failed to fit")]
    ReplicaFailures { failed: usize, total: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
