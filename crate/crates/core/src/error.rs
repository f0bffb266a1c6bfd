use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid segment [{lo}, {hi}): need 2 <= lo < hi")]
    InvalidSegment { lo: u64, hi: u64 },
    #[error("base primes stop below {missing}, which is a prime <= sqrt({hi} - 1)")]
    InsufficientBasePrimes { hi: u64, missing: u64 },
    #[error("{0} is not a terminal digit of a walk prime (expected 1, 3, 7 or 9)")]
    InvalidDigit(u64),
    #[error("uniform draw {0} is outside [0, 1)")]
    UniformOutOfRange(f64),
    #[error("lattice position overflowed 64-bit coordinates")]
    PositionOverflow,
    #[error("checkpoint at n = {got} does not follow the last checkpoint n = {last}")]
    NonMonotoneCheckpoint { last: u64, got: u64 },
    #[error("checkpoint row ({n}, {n_p}, {area}) decreases n_p or area")]
    DecreasingCheckpoint { n: u64, n_p: u64, area: u64 },
    #[error("visit map has no recorded steps")]
    EmptyMap,
    #[error("run histogram is empty")]
    EmptyHistogram,
    #[error("no values to tabulate")]
    EmptySample,
    #[error("leading digit is undefined for 0")]
    LeadingDigitOfZero,
    #[error("{0} is not a decimal leading digit (1..=9)")]
    DigitOutOfRange(u8),
    #[error("the angle is undefined at the origin")]
    OriginHasNoAngle,
    #[error("histogram needs at least one bin")]
    ZeroBins,
    #[error("xs has {xs} values but ys has {ys}")]
    LengthMismatch { xs: usize, ys: usize },
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("all x values are equal; the slope is undefined")]
    ZeroVariance,
    #[error("box size {0} is not in (0, 1]")]
    InvalidScale(f64),
    #[error("observer failed: {0}")]
    Observer(String),
}
