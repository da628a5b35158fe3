use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {left}x{left} against {right}x{right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("unsupported operator dimension {rows}x{cols} (expected 3x3 or 4x4)")]
    UnsupportedDimension { rows: usize, cols: usize },

    #[error("matrix is not Hermitian: max |M - M^dagger| = {defect:e}")]
    NotHermitian { defect: f64 },

    #[error("matrix is not unitary: max |U^dagger U - I| = {defect:e}")]
    NotUnitary { defect: f64 },

    #[error("eigendecomposition failed to converge")]
    EigenFailure,

    #[error("phase aliasing at sample {index}: consecutive jump {jump:.4} rad exceeds guard {guard:.4} rad; sample more densely")]
    Aliasing { index: usize, jump: f64, guard: f64 },

    #[error("sample {index} has zero magnitude; its phase is undefined")]
    ZeroSample { index: usize },

    #[error("invalid {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("integration failure: norm defect {defect:e} exceeds {limit:e}")]
    IntegrationFailure { defect: f64, limit: f64 },

    #[error("numerical derivative failure: imaginary residue {residue:e} exceeds {limit:e}")]
    DerivativeFailure { residue: f64, limit: f64 },

    #[error("{0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, Error>;
