use thiserror::Error;

use crate::repcore::HalfInt;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("null space has dimension {dimension}, expected exactly 1")]
    NullSpaceDimension { dimension: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("invalid quantum numbers: {0}")]
    QuantumNumberMismatch(String),

    #[error("alpha = {0} is a degenerate point (alpha = +-1 has no finite mu)")]
    DegenerateAlpha(f64),

    #[error("beta = {0} is a degenerate point for this parameter map")]
    DegenerateBeta(f64),

    #[error("2l = {twice_ell} exceeds the limit {max} for this dense construction")]
    DimensionTooLarge { twice_ell: i32, max: i32 },

    #[error("cannot parse half-integer from {0:?}")]
    InvalidHalfInt(String),

    #[error("eigen-residual {residual:e} exceeds tolerance {tolerance:e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },

    #[error("zero vector cannot be normalized")]
    ZeroNorm,

    #[error("non-finite value: {0}")]
    NonFinite(String),
}

impl Error {
    pub(crate) fn qn(msg: impl Into<String>) -> Self {
        Error::QuantumNumberMismatch(msg.into())
    }

    pub(crate) fn ell_mismatch(what: &str, ell: HalfInt, m: HalfInt) -> Self {
        Error::qn(format!("{what}: m = {m} is not a valid projection for l = {ell}"))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
