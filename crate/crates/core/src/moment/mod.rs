//! Truncated moment sequences, the Riesz functional, and moment/localizing
//! matrices.

mod localizing;
mod tms;

pub use localizing::{
    block_pattern, localizing_block, localizing_scalar, moment_matrix, scalar_pattern,
    LinearPattern,
};
pub use tms::{riesz, tms_from_atoms, AtomicMeasure, Tms, WEIGHT_SUM_TOL};
