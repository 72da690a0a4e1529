use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("non-finite initial value at (x = {x}, v = {v})")]
    NonFiniteInitialValue { x: f64, v: f64 },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("time step {dt} exceeds the explicit stability bound {max_dt}")]
    CflViolation { dt: f64, max_dt: f64 },
    #[error("transport is not an exact index shift on this grid")]
    InexactTransport,
    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
