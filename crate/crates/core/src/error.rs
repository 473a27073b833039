use thiserror::Error;

/// Errors raised by the laboratory's samplers, simulators and statistics.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("self-loop ({0}, {0}) has no edge weight")]
    SelfLoop(usize),

    #[error("empty input to {0}")]
    EmptyInput(&'static str),

    #[error("cdf is not monotone: F({x_hi}) = {f_hi} < F({x_lo}) = {f_lo}")]
    NonMonotoneCdf {
        x_lo: f64,
        f_lo: f64,
        x_hi: f64,
        f_hi: f64,
    },

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("instability fraction {fraction:.4} exceeds the permitted {limit}")]
    Unstable { fraction: f64, limit: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
