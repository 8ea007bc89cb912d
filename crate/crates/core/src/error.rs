use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("argument out of domain: {0}")]
    OutOfDomain(String),
    #[error("no white balls: increment undefined (M = {m})")]
    NoWhiteBalls { m: u64 },
    #[error("{what} exceeds configured cap ({value} > {cap})")]
    CapExceeded { what: &'static str, value: u64, cap: u64 },
    #[error("trajectory carries no edge times; simulate with edge tracking enabled")]
    MissingEdgeTimes,
    #[error("time grid must start at 0, lie in [0, 1] and be strictly increasing")]
    BadGrid,
}

pub type Result<T> = std::result::Result<T, Error>;
