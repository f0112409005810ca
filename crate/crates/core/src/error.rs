use thiserror::Error;

/// Errors raised by instance handling, the integrator and the exact solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("spin index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("self-coupling on spin {0}")]
    SelfLoop(usize),

    #[error("duplicate coupling between spins {0} and {1}")]
    DuplicateEdge(usize, usize),

    #[error("expected {expected} entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("assignment entry {index} is {value}, expected +1 or -1")]
    NotASpin { index: usize, value: i8 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("simulation diverged at t = {t}: {reason}")]
    Diverged { t: f64, reason: String },

    #[error("brute force limited to {cap} spins, instance has {n}")]
    TooManySpins { n: usize, cap: usize },

    #[error("elimination width {width} exceeds cap {cap}")]
    WidthExceeded { width: usize, cap: usize },

    #[error("elimination order is not a permutation of 0..{0}")]
    BadOrder(usize),

    #[error("expected an {expected}-spin instance, got {got}")]
    WrongInstanceSize { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
