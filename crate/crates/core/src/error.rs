use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid has {seats} seats, exact oracle limit is {limit}")]
    OracleLimit { seats: usize, limit: usize },

    #[error("seat (row {row}, column {col}) listed more than once")]
    OverlappingSeat { row: u8, col: i64 },

    #[error("row index {0} out of range, only rows 0 and 1 exist")]
    BadRow(u8),

    #[error("grid text line {line}, column {col}: unexpected character {ch:?}")]
    GridParse { line: usize, col: usize, ch: char },

    #[error("grid text must have one or two lines, found {0}")]
    GridLineCount(usize),

    #[error("seat (row {row}, column {col}) is not free")]
    SeatNotFree { row: u8, col: i64 },

    #[error("grid has no seats")]
    EmptyGrid,

    #[error("series constant term is not invertible")]
    NotInvertible,

    #[error("t = {t} lies on the branch cut of rho_{k}")]
    CutViolation { k: i64, t: String },

    #[error("Lambert W branch {k} failed to converge at z = {z}")]
    NoConvergence { k: i64, z: String },

    #[error("coefficient sequence has no decay bound")]
    MissingDecayBound,

    #[error("precision escalation failed at n = {n} after {digits} digits")]
    PrecisionEscalation { n: usize, digits: usize },

    #[error("adaptive quadrature did not reach tolerance {0:e}")]
    Quadrature(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
