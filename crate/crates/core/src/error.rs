use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("{0} is not a perfect square")]
    NotPerfectSquare(usize),
    #[error("invalid index: {0}")]
    InvalidIndex(String),
    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),
    #[error("zero input: {0}")]
    ZeroInput(String),
    #[error("matrices do not commute: relative residual {residual:.3e} exceeds {tol:.3e}")]
    NotCommuting { residual: f64, tol: f64 },
    #[error("stale eigenvalue: pencil has trivial null space at the claimed eigenvalue")]
    StaleEigenvalue,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("internal failure: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
