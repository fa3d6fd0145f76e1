//! Sparse multivariate polynomials and symmetric polynomial matrices.

mod matrix;
mod monomial;
mod polynomial;

pub use matrix::{poly_matmul, poly_transpose, PolyMatrix, MAX_DET_SIZE};
pub use monomial::{basis_len, binomial, Monomial, MonomialBasis};
pub use polynomial::{Polynomial, PRUNE_RTOL};
