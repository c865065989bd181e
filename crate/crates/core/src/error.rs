use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("{got} entries cannot fill a {rows}x{cols} matrix")]
    ShapeMismatch { rows: usize, cols: usize, got: usize },

    #[error("not a density matrix: {0}")]
    InvalidState(StateDefect),

    #[error("qubit index {index} out of range for a {qubits}-qubit register")]
    QubitOutOfRange { index: usize, qubits: usize },

    #[error("qubit index {0} listed more than once")]
    DuplicateQubit(usize),

    #[error("post-selected event has probability {probability:e}")]
    NullOutcome { probability: f64 },

    #[error("normalization {denominator:e} vanishes")]
    DegenerateOutcome { denominator: f64 },

    #[error("{name} = {value} lies outside [{min}, {max}]")]
    RangeViolation {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("not an X state: entry ({row}, {col}) has magnitude {magnitude:e}")]
    NotXState { row: usize, col: usize, magnitude: f64 },

    #[error("state vector has norm {norm}, expected 1")]
    NormViolation { norm: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid facet inequality: {0}")]
    InvalidFacet(FacetDefect),

    #[error("[{lo}, {hi}] does not bracket a violation crossing (max values {value_lo}, {value_hi})")]
    Bracket { lo: f64, hi: f64, value_lo: f64, value_hi: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),

    #[error("invalid wiring: {0}")]
    InvalidWiring(&'static str),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateDefect {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension {0} is not 2^n for 1 <= n <= 10")]
    NotQubitRegister(usize),
    #[error("M - M† has max deviation {0:e}")]
    NotHermitian(f64),
    #[error("trace is {0}")]
    Trace(f64),
    #[error("minimum eigenvalue is {0:e}")]
    NotPositive(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FacetDefect {
    #[error("no terms")]
    Empty,
    #[error("monomial {0} appears twice")]
    DuplicateMonomial(alloc::string::String),
    #[error("non-finite coefficient or bound")]
    NonFinite,
    #[error("id {0} outside 0..=185")]
    BadId(u32),
}
