use thiserror::Error;

/// Errors produced anywhere in the codec, decoder, bound and scheduling code.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid code parameters: {0}")]
    InvalidParams(String),
    #[error("expected {expected} message bits, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("plan covers {actual} segments but the code has {expected}")]
    PlanMismatch { expected: usize, actual: usize },
    #[error("value {value} is outside [0, {limit})")]
    OutOfRange { value: u64, limit: u64 },
    #[error("channel input does not match the channel kind: {0}")]
    KindMismatch(String),
    #[error("received set lacks symbol (segment {segment}, pass {pass})")]
    MissingSymbols { segment: usize, pass: usize },
    #[error("maximum-likelihood search over 2^{n} candidates is not supported (n <= {limit})")]
    Infeasible { n: usize, limit: usize },
    #[error("symbol (segment {segment}, pass {pass}) arrived before pass {expected}")]
    OutOfOrderSymbol {
        segment: usize,
        pass: usize,
        expected: usize,
    },
    #[error("quadrature failed to converge: {0}")]
    NonConvergent(String),
    #[error("optimizer exceeded {cap} symbols without reaching the target error rate")]
    NoConvergence { cap: usize },
    #[error("channel capacity is zero")]
    DegenerateChannel,
    #[error("order vector is not a permutation of 1..={0}")]
    BadPermutation(usize),
    #[error("plan carries no symbols")]
    EmptyPlan,
    #[error("trial exceeded the {cap}-symbol cap without acknowledgement")]
    Timeout { cap: usize },
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
