use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids (L = {left_length}, n = {left_n} vs L = {right_length}, n = {right_n})")]
    GridMismatch {
        left_length: f64,
        left_n: usize,
        right_length: f64,
        right_n: usize,
    },

    #[error("field has {got} samples, grid has {expected} nodes")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("field does not decay at the domain edges: edge/max ratio {ratio:.3e} exceeds {tol:.1e}")]
    EdgeDecay { ratio: f64, tol: f64 },

    #[error("the zero field is not a valid input here")]
    ZeroDatum,

    #[error("empty ledger")]
    EmptyLedger,

    #[error("baseline: {0}")]
    Baseline(String),
}
