use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("time {t} outside trajectory interval [0, {dt}]")]
    TimeOutOfRange { t: f64, dt: f64 },

    #[error("acceleration bound {a_max} cannot be met by any duration")]
    Unattainable { a_max: f64 },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    /// A request whose cost grows too fast to be served, e.g. `n!` enumeration
    /// or an `O(n^3)` scan beyond the configured cap.
    #[error("{what}: {n} points exceeds the cap of {cap}")]
    SizeLimit {
        what: &'static str,
        n: usize,
        cap: usize,
    },

    #[error("degenerate data: {0}")]
    DegenerateData(&'static str),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
