//! Polynomial matrix optimization with the matrix Moment-SOS hierarchy.
//!
//! Minimizes a polynomial `f(x)` subject to a symmetric polynomial matrix
//! inequality `G(x) ⪰ 0`. The crate provides polynomial arithmetic, moment
//! and localizing matrices, an SDP interior-point solver, the hierarchy
//! driver with flat-truncation detection and minimizer extraction, an
//! optimality-condition auditor, and an SOS-convex fast path.

pub mod error;
pub mod hierarchy;
pub mod linalg;
pub mod moment;
pub mod optimality;
pub mod polyalg;
pub mod sdp;
pub mod sosconvex;

pub use error::{Error, Result};
pub use polyalg::{Monomial, MonomialBasis, PolyMatrix, Polynomial};
