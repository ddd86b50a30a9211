use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    #[error("{name} = {value} is outside the domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    /// A sequential run consumed its whole draw budget without stopping.
    #[error("draw budget of {max_calls} exhausted after accumulating {accumulated} of {target} arrivals")]
    BudgetExceeded {
        max_calls: u64,
        accumulated: u64,
        target: u64,
    },

    #[error("calibration search failed: {0}")]
    SearchFailed(String),

    #[error("TPA run exceeded the iteration cap of {0} steps")]
    IterationCap(u64),

    /// Phase one of the ratio scheme never stopped, which happens when the log-ratio is (close to) zero.
    #[error("log-ratio looks degenerate: phase one exhausted its budget of {max_calls} calls")]
    DegenerateRatio { max_calls: u64 },

    #[error("graph has {vertices} vertices; exact enumeration supports at most {limit}")]
    SizeExceeded { vertices: usize, limit: usize },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),
}

pub(crate) fn domain(name: &'static str, value: f64, domain: &'static str) -> Error {
    Error::Domain {
        name,
        value,
        domain,
    }
}
