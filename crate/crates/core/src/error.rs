use thiserror::Error;

use crate::sdp::SolveStatus;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index {index} out of range (bound {bound})")]
    IndexOutOfRange { index: usize, bound: usize },

    #[error("degree {degree} exceeds the admissible degree {max}")]
    DegreeOverflow { degree: u32, max: u32 },

    #[error("determinant of a {0}x{0} polynomial matrix is not supported (max 8)")]
    MatrixTooLarge(usize),

    #[error("point is infeasible: smallest eigenvalue of G(u) is {min_eig:e}")]
    InfeasiblePoint { min_eig: f64 },

    #[error("no nonsingular {rank}x{rank} principal block of G(u)")]
    NoPivotBlock { rank: usize },

    #[error("atom extraction failed: moment mismatch {residual:e}")]
    ExtractionFailed { residual: f64 },

    #[error("not certified: {0}")]
    NotCertified(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("SDP solver finished with status {0:?}")]
    Solver(SolveStatus),

    #[error("backend error: {0}")]
    Backend(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
