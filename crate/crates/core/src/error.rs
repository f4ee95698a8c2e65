use num_bigint::BigUint;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid parameters (a={a}, b={b}): {reason}")]
    InvalidParams {
        a: u64,
        b: u64,
        reason: &'static str,
    },

    #[error("block B_{level} has height {height}, above the materialization cap of {cap} symbols")]
    CapExceeded {
        level: usize,
        height: BigUint,
        cap: u64,
    },

    #[error("position {pos} is outside B_{level} (height {height})")]
    PositionOutOfRange {
        level: usize,
        pos: BigUint,
        height: BigUint,
    },

    #[error("block B_{level} is not materialized")]
    NotMaterialized { level: usize },

    #[error("word must be nonempty and over {{0,1}}: {0}")]
    InvalidWord(String),

    #[error("needle of length {needle} is longer than the haystack B_{level} (height {height})")]
    NeedleTooLong {
        needle: usize,
        level: usize,
        height: u64,
    },

    #[error("needle does not occur in B_{level}")]
    NoOccurrences { level: usize },

    #[error("event span {span} exceeds the period h_{level} = {height}")]
    SpanExceedsPeriod {
        span: u64,
        level: usize,
        height: BigUint,
    },

    #[error("event has no atoms")]
    EmptyEvent,

    #[error("cannot parse event: {0}")]
    EventSyntax(String),

    #[error("shift t = {t} must be below h_{level} = {height}")]
    ShiftTooLarge {
        t: u64,
        level: usize,
        height: BigUint,
    },

    #[error("level {level} not supported here: {reason}")]
    LevelOutOfRange { level: usize, reason: &'static str },

    #[error("b = {b} and q = {q} are not coprime")]
    NotCoprime { b: u64, q: u64 },

    #[error("modulus must be at least {min}, got {q}")]
    ModulusTooSmall { q: u64, min: u64 },

    #[error("residue ({x}, {y}) is not a valid state modulo {q}")]
    InvalidState { x: u64, y: u64, q: u64 },

    #[error("no k <= {k_max} with h_(k+1) = 1 mod {q}")]
    NoWitness { q: u64, k_max: u64 },

    #[error("level {n} is not in N_{q}: h_{n} mod {q} = {residue}")]
    NotInNq { n: usize, q: u64, residue: u64 },

    #[error("power q = {q} must be at least 2")]
    PowerTooSmall { q: u64 },

    #[error("scan level {m} must be at least N + 2 = {min}")]
    ScanTooShallow { m: usize, min: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
