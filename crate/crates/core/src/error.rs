use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("measure space needs at least one atom")]
    EmptySpace,
    #[error("weight of atom {index} must be positive and finite, got {value}")]
    InvalidWeight { index: usize, value: f64 },
    #[error("kernel of order {order} on {atoms} atoms needs {expected} entries, got {found}")]
    KernelExtent {
        order: usize,
        atoms: usize,
        expected: usize,
        found: usize,
    },
    #[error("kernel entry {index} is not finite")]
    NonFiniteEntry { index: usize },
    #[error("incompatible kernel orders {left} and {right}")]
    OrderMismatch { left: usize, right: usize },
    #[error("kernel lives on {found} atoms, expected {expected}")]
    AtomMismatch { expected: usize, found: usize },
    #[error("kernel is not symmetric")]
    NotSymmetric,
    #[error("shape must have at least one factor")]
    EmptyShape,
    #[error("expected {expected} kernels for the shape, got {found}")]
    KernelCount { expected: usize, found: usize },
    #[error("partition is flat for the given shape")]
    FlatPartition,
    #[error("invalid partition: {0}")]
    InvalidPartition(&'static str),
    #[error("{what} = {value} is out of range (allowed {min}..={max})")]
    OutOfRange {
        what: &'static str,
        value: usize,
        min: usize,
        max: usize,
    },
    #[error("{what}: expected length {expected}, got {found}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("resource limit: {what} = {requested} exceeds cap {cap}")]
    ResourceLimit {
        what: &'static str,
        requested: usize,
        cap: usize,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
