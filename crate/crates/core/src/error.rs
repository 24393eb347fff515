use thiserror::Error;

/// Failure modes shared by every module in the crate.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} must be positive")]
    NonPositive(&'static str),

    #[error("table limit {requested} exceeds the supported cap of {cap}")]
    LimitTooLarge { requested: u64, cap: u64 },

    #[error("could not allocate a table of {0} entries")]
    Allocation(u64),

    #[error("argument {needed} lies outside table coverage (limit {limit})")]
    OutOfRange { needed: u64, limit: u64 },

    #[error("checked arithmetic overflowed while evaluating {0}")]
    Overflow(&'static str),

    #[error("series orders differ ({0} vs {1})")]
    OrderMismatch(usize, usize),

    #[error("inexact division at n = {n}: {numerator} is not a multiple of {denominator}")]
    InexactDivision {
        n: u64,
        numerator: i128,
        denominator: i128,
    },

    #[error("invalid range: lo = {lo} exceeds hi = {hi}")]
    InvalidRange { lo: u64, hi: u64 },

    #[error("could not start worker pool: {0}")]
    ThreadPool(String),

    #[error("table mismatch: {0}")]
    TableMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
