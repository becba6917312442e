use thiserror::Error;

/// Errors reported by model validation and the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The station list is empty.
    #[error("model must contain at least one station")]
    EmptyModel,

    /// A station has a non-positive capacity or an invalid service time.
    #[error("station {index} ({name}): {reason}")]
    BadStation {
        index: usize,
        name: String,
        reason: String,
    },

    /// The reference station index is out of range.
    #[error("reference station {index} out of range ({stations} stations)")]
    InvalidReference { index: usize, stations: usize },

    /// A named reference station does not exist in the station list.
    #[error("unknown reference station name: {0}")]
    UnknownReference(String),

    /// A routing-matrix row deviates from sum 1 by more than the tolerance.
    #[error("routing row {row} sums to {sum:.17}, off by more than 1e-12")]
    NonStochasticRow { row: usize, sum: f64 },

    /// The graph of positive routing entries is not strongly connected.
    #[error("routing graph is not strongly connected")]
    Reducible,

    /// Routing matrix shape does not match the station list.
    #[error("routing matrix is {rows}x{cols}, expected {stations}x{stations}")]
    DimensionMismatch {
        rows: usize,
        cols: usize,
        stations: usize,
    },

    /// The visit-ratio linear system could not be solved. Unreachable for an
    /// irreducible routing matrix; signals numerical breakdown.
    #[error("visit-ratio system is numerically singular")]
    SingularSystem,

    /// The requested population exceeds the sum of the buffer capacities.
    #[error("population {population} exceeds the capacity sum {n_max}")]
    InfeasiblePopulation { population: usize, n_max: usize },

    /// Little's formula was applied at zero throughput.
    #[error("mean waiting time is undefined at zero throughput")]
    ZeroThroughput,

    /// The enumeration oracle would visit more states than its limit allows.
    #[error("state space holds {states} states, above the limit {limit}")]
    SizeLimit { states: u128, limit: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
