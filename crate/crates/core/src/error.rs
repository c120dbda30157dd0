use thiserror::Error;

/// Errors raised by the library. Variants map onto the CLI exit-code contract:
/// everything here is an input or structure problem (exit 3).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("structure error: {0}")]
    Structure(String),

    #[error("exponent {beta:?} is not in the affine hull of the positive support")]
    NoBarycentric { beta: Vec<f64> },

    #[error("range error: exponent argument {0} exceeds the overflow limit")]
    Range(f64),

    #[error("point is not in the image of the moment map (residual {residual:.3e})")]
    NotInImage { residual: f64 },

    #[error("unsupported region: {0}")]
    UnsupportedRegion(String),

    #[error("objective is not finite at atom {index}: {atom:?}")]
    NonFiniteAtom { index: usize, atom: Vec<f64> },

    #[error("decomposition failed: {0}")]
    Decomposition(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
