use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid modulus {0}: must be an odd prime below 2^31")]
    InvalidModulus(u64),
    #[error("value {0} exceeds the supported range")]
    Overflow(u64),
    #[error("window length {0} out of range (1..=24)")]
    WindowOutOfRange(usize),
    #[error("pattern of length {len} does not fit in S_p for p = {p}")]
    PatternTooLong { len: usize, p: u64 },
    #[error("no result among primes up to {max_p}")]
    SearchLimit { max_p: u64 },
    #[error("enumeration of {required} evaluations exceeds the budget of {budget}")]
    Budget { required: u128, budget: u128 },
    #[error("input {value} is outside the domain of player {player}")]
    Domain { player: usize, value: u64 },
    #[error("randomness {0:?} is not an element of the randomness space")]
    Randomness(Vec<u64>),
    #[error("expected {expected} inputs, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("g does not embed f: inputs {0:?} and {1:?} collide in g but differ in f")]
    EmbeddingViolation(Vec<u8>, Vec<u8>),
    #[error("{0} is not a nonzero quadratic residue")]
    NotResidue(u64),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
