use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("field order {0} is not a prime power")]
    NotPrimePower(u32),
    #[error("field order {0} is outside the supported range [2, 65536]")]
    FieldOrderOutOfRange(u32),
    #[error("code length {n} exceeds field order {q}")]
    LengthExceedsField { n: usize, q: u32 },
    #[error("invalid code dimensions n={n}, k={k}")]
    InvalidCodeDimensions { n: usize, k: usize },
    #[error("dimension mismatch: expected {expected} symbols, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("need {needed} distinct positions to decode, got {got}")]
    InsufficientSymbols { needed: usize, got: usize },
    #[error("received symbols are not consistent with any codeword")]
    InconsistentSymbols,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("event for slot {got} arrived out of order (expected slot {expected})")]
    OutOfOrder { expected: usize, got: usize },
    #[error("erasure pattern violates the sliding-window budget")]
    InadmissiblePattern,
    #[error("subpacket for message {time} exceeds its scheduled size")]
    ScheduleOverrun { time: usize },
    #[error("message {time} has only {have} of {need} estimates at parity time")]
    IncompleteEstimates { time: usize, have: usize, need: usize },
    #[error("relay packet at slot {slot} has {got} symbols, expected {expected}")]
    MalformedPacket { slot: usize, expected: usize, got: usize },
    #[error("interference references message {time}, which is not decoded")]
    MissingDependency { time: usize },
    #[error("horizon {horizon} too large for exhaustive enumeration (limit {limit})")]
    HorizonTooLarge { horizon: usize, limit: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
