use thiserror::Error;

/// Errors raised by the simulation and analysis layers.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// A model parameter or workload binding constraint was violated.
    #[error("model violation: {0}")]
    Model(String),

    /// A probe addressed a server cell outside `[1, 2^w]`.
    #[error("address {addr} out of range [1, {max}]")]
    AddressOutOfRange { addr: u64, max: u64 },

    /// A payload did not fit in `w` bits.
    #[error("data {data:#x} does not fit in {w} bits")]
    DataTooWide { data: u64, w: u32 },

    /// A workload generator or spec string was malformed.
    #[error("invalid workload: {0}")]
    Workload(String),

    #[error("tree oram stash overflow: {occupancy} blocks exceed the bound of {bound}")]
    StashOverflow { occupancy: usize, bound: usize },

    /// An input sequence could not be parsed as a write/read block sequence.
    #[error("input is not block-shaped: {0}")]
    NotBlockShaped(String),

    /// Exhaustive search was asked to run on too large an instance.
    #[error("brute-force search limited to N <= {limit}, got N = {n}")]
    TooLarge { n: usize, limit: usize },

    #[error("invalid partition boundaries: {0}")]
    Boundaries(String),

    #[error("invalid certificate: {0}")]
    Certificate(String),

    #[error("invalid distribution: {0}")]
    Distribution(String),

    #[error("decode failure: {0}")]
    Decode(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("malformed trace file: {0}")]
    TraceFormat(String),
}

pub type Result<T> = std::result::Result<T, Error>;
