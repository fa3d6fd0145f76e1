//! First- and second-order optimality conditions at a candidate point, and
//! the Schur-complement reduction of the constraint.

mod kkt;
mod schur;

pub use kkt::{
    check_ndc, check_scc, check_sosc, gradient_at, h_term, kernel_basis, kernel_basis_with,
    ndc_matrix, solve_multiplier, sym_dim, sym_rank, Multiplier, NdcEvidence, Sosc, FEAS_TOL,
    RANK_TOL,
};
pub use schur::{schur_reduce, SchurReduction};

use nalgebra::DMatrix;

use crate::error::Result;
use crate::linalg::singular_values;
use crate::polyalg::{PolyMatrix, Polynomial};

/// Agreement required between the original and reduced stationarity maps.
pub const REDUCED_TOL: f64 = 1e-6;

/// Cross-check of the reduced constraint `T(x) ⪰ 0` at the point.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedCheck {
    pub reduction: SchurReduction,
    /// `X ↦ (⟨∂_iT(u), X⟩)_i` is injective.
    pub regular: bool,
    /// `Λ_CC / p(u)²`.
    pub theta: DMatrix<f64>,
    /// `‖∇T(u)*Θ − ∇G(u)*Λ‖`.
    pub mismatch: f64,
}

impl ReducedCheck {
    pub fn consistent(&self, ndc: bool) -> bool {
        self.regular == ndc && self.mismatch <= REDUCED_TOL
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimalityReport {
    pub point: Vec<f64>,
    pub rank: usize,
    /// Orthonormal kernel basis `E` of `G(u)`.
    pub kernel: DMatrix<f64>,
    pub multiplier: Multiplier,
    pub ndc: bool,
    pub ndc_evidence: NdcEvidence,
    pub scc: bool,
    pub lambda_rank: usize,
    pub sosc: Sosc,
    /// Present when the NDC holds and a pivot block exists.
    pub reduced: Option<ReducedCheck>,
    pub reduced_error: Option<String>,
}

impl OptimalityReport {
    /// `(NDC, SCC, SOSC)` where each later condition is only reported when
    /// the earlier ones hold.
    pub fn verdict(&self) -> (bool, Option<bool>, Option<bool>) {
        let scc = self.ndc.then_some(self.scc);
        let sosc = (self.ndc && self.scc).then_some(self.sosc.holds);
        (self.ndc, scc, sosc)
    }
}

pub fn audit(f: &Polynomial, g: &PolyMatrix, u: &[f64]) -> Result<OptimalityReport> {
    audit_with(f, g, u, RANK_TOL)
}

pub fn audit_with(
    f: &Polynomial,
    g: &PolyMatrix,
    u: &[f64],
    rank_tol: f64,
) -> Result<OptimalityReport> {
    let (rank, kernel) = kernel_basis(g, u, rank_tol)?;
    let (ndc, ndc_evidence) = check_ndc(g, u, rank_tol)?;
    let multiplier = solve_multiplier(f, g, u, rank_tol)?;
    let lambda_rank = sym_rank(&multiplier.lambda, rank_tol);
    let scc = check_scc(g, u, &multiplier.lambda, rank_tol)?;
    let sosc = check_sosc(f, g, u, &multiplier.lambda, rank_tol)?;
    let (reduced, reduced_error) = if ndc {
        match reduced_check(g, u, &multiplier.lambda, rank_tol) {
            Ok(c) => (Some(c), None),
            Err(e) => (None, Some(e.to_string())),
        }
    } else {
        (None, None)
    };
    Ok(OptimalityReport {
        point: u.to_vec(),
        rank,
        kernel,
        multiplier,
        ndc,
        ndc_evidence,
        scc,
        lambda_rank,
        sosc,
        reduced,
        reduced_error,
    })
}

fn reduced_check(
    g: &PolyMatrix,
    u: &[f64],
    lambda: &DMatrix<f64>,
    rank_tol: f64,
) -> Result<ReducedCheck> {
    let reduction = schur_reduce(g, u, rank_tol)?;
    let rest = reduction.rest().to_vec();
    let d = rest.len();
    let pu = reduction.p.eval(u)?;
    let theta = DMatrix::from_fn(d, d, |i, j| lambda[(rest[i], rest[j])] / (pu * pu));

    let map = ndc_matrix(&reduction.t, u, &DMatrix::identity(d, d))?;
    let s = singular_values(&map);
    let top = s.first().copied().unwrap_or(0.0);
    let rank = s.iter().filter(|&&v| v > rank_tol * top.max(1.0)).count();
    let regular = rank == sym_dim(d);

    let reduced = reduction.t.grad_adjoint(u, &theta)?;
    let original = g.grad_adjoint(u, lambda)?;
    Ok(ReducedCheck {
        reduction,
        regular,
        theta,
        mismatch: (reduced - original).norm(),
    })
}
