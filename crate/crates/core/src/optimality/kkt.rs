use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{min_eigenvalue, null_space_below, singular_values, smat, svec, sym_eigen};
use crate::polyalg::{PolyMatrix, Polynomial};

/// Relative eigenvalue threshold for the rank of `G(u)` and `Λ`.
pub const RANK_TOL: f64 = 1e-6;
/// Most negative admissible eigenvalue of `G(u)`.
pub const FEAS_TOL: f64 = 1e-6;

/// `d(d+1)/2`, the dimension of `S^d`.
pub fn sym_dim(d: usize) -> usize {
    d * (d + 1) / 2
}

/// Values above `tol·max(top, 1)` count as nonzero. The floor keeps roundoff
/// in a numerically zero matrix from registering as rank.
pub(crate) fn cutoff(top: f64, tol: f64) -> f64 {
    tol * top.max(1.0)
}

/// Numerical rank of a symmetric PSD-ish matrix.
pub fn sym_rank(a: &DMatrix<f64>, tol: f64) -> usize {
    let (vals, _) = sym_eigen(a);
    let top = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    vals.iter().filter(|v| v.abs() > cutoff(top, tol)).count()
}

/// `(r, E)`: the numerical rank of `G(u)` and an orthonormal basis of its
/// numerical kernel as the columns of `E`.
pub fn kernel_basis(g: &PolyMatrix, u: &[f64], rank_tol: f64) -> Result<(usize, DMatrix<f64>)> {
    kernel_basis_with(g, u, rank_tol, FEAS_TOL)
}

pub fn kernel_basis_with(
    g: &PolyMatrix,
    u: &[f64],
    rank_tol: f64,
    feas_tol: f64,
) -> Result<(usize, DMatrix<f64>)> {
    let gu = g.eval(u)?;
    let (vals, vecs) = sym_eigen(&gu);
    let m = g.size();
    if m > 0 && vals[0] < -feas_tol {
        return Err(Error::InfeasiblePoint { min_eig: vals[0] });
    }
    let top = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let zero: Vec<usize> = (0..m)
        .filter(|&k| vals[k] <= cutoff(top, rank_tol))
        .collect();
    let e = DMatrix::from_fn(m, zero.len(), |i, c| vecs[(i, zero[c])]);
    Ok((m - zero.len(), e))
}

/// The `n × σ(m−r)` matrix of `h ↦ Eᵀ(∇G(u)[h])E`: row `i` is
/// `svec(Eᵀ ∂_iG(u) E)`.
pub fn ndc_matrix(g: &PolyMatrix, u: &[f64], e: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let parts = g.eval_partials(u)?;
    let d = sym_dim(e.ncols());
    let mut out = DMatrix::zeros(parts.len(), d);
    for (i, p) in parts.iter().enumerate() {
        let v = svec(&(e.transpose() * p * e));
        out.row_mut(i).copy_from(&v.transpose());
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct NdcEvidence {
    pub rank: usize,
    pub kernel_dim: usize,
    /// `σ(m − r)`, the rank needed for the NDC.
    pub required: usize,
    pub map_rank: usize,
    pub singular_values: Vec<f64>,
}

/// The NDC holds iff `h ↦ Eᵀ(∇G(u)[h])E` maps onto `S^{m−r}`.
pub fn check_ndc(g: &PolyMatrix, u: &[f64], rank_tol: f64) -> Result<(bool, NdcEvidence)> {
    let (rank, e) = kernel_basis(g, u, rank_tol)?;
    let a = ndc_matrix(g, u, &e)?;
    let s = singular_values(&a);
    let top = s.first().copied().unwrap_or(0.0);
    let map_rank = s.iter().filter(|&&v| v > cutoff(top, rank_tol)).count();
    let required = sym_dim(e.ncols());
    Ok((
        map_rank == required,
        NdcEvidence {
            rank,
            kernel_dim: e.ncols(),
            required,
            map_rank,
            singular_values: s,
        },
    ))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Multiplier {
    pub lambda: DMatrix<f64>,
    /// `‖∇f(u) − ∇G(u)*Λ‖`.
    pub residual: f64,
    /// False when the least-squares problem has a nontrivial null space, so
    /// that `Λ` is one of many solutions.
    pub unique: bool,
}

/// Least-squares `Λ = E M Eᵀ` for `∇f(u) = ∇G(u)*Λ`.
pub fn solve_multiplier(
    f: &Polynomial,
    g: &PolyMatrix,
    u: &[f64],
    rank_tol: f64,
) -> Result<Multiplier> {
    let (_, e) = kernel_basis(g, u, rank_tol)?;
    let grad = gradient_at(f, u)?;
    let m = g.size();
    if e.ncols() == 0 {
        return Ok(Multiplier {
            lambda: DMatrix::zeros(m, m),
            residual: grad.norm(),
            unique: true,
        });
    }
    let a = ndc_matrix(g, u, &e)?;
    let svd = a.clone().svd(true, true);
    let top = svd.singular_values.max();
    let eps = cutoff(top, 1e-12);
    let coef = svd
        .solve(&grad, eps)
        .map_err(|e| Error::Backend(e.to_string()))?;
    let unique = svd
        .singular_values
        .iter()
        .filter(|&&v| v > cutoff(top, rank_tol))
        .count()
        == a.ncols();
    let lambda = &e * smat(coef.as_slice(), e.ncols()) * e.transpose();
    let residual = (&grad - &a * &coef).norm();
    Ok(Multiplier {
        lambda: (&lambda + lambda.transpose()) * 0.5,
        residual,
        unique,
    })
}

pub fn gradient_at(f: &Polynomial, u: &[f64]) -> Result<DVector<f64>> {
    let vals: Result<Vec<f64>> = f.gradient().iter().map(|p| p.eval(u)).collect();
    Ok(DVector::from_vec(vals?))
}

/// Strict complementarity: `rank G(u) + rank Λ = m`.
pub fn check_scc(g: &PolyMatrix, u: &[f64], lambda: &DMatrix<f64>, rank_tol: f64) -> Result<bool> {
    let gu = g.eval(u)?;
    Ok(sym_rank(&gu, rank_tol) + sym_rank(lambda, rank_tol) == g.size())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sosc {
    pub holds: bool,
    /// `λ_min(BᵀWB)`; `None` when `N(u) = {0}`.
    pub min_eig: Option<f64>,
    pub tol: f64,
    /// Orthonormal basis `B` of `N(u)` as columns.
    pub tangent: DMatrix<f64>,
    /// `∇²f(u) − Σ Λ_ij ∇²G_ij(u) + H(u, Λ)`.
    pub hessian: DMatrix<f64>,
}

/// `H(u, Λ)_ij = 2⟨Λ, ∂_iG(u) G(u)† ∂_jG(u)⟩`.
pub fn h_term(
    g: &PolyMatrix,
    u: &[f64],
    lambda: &DMatrix<f64>,
    rank_tol: f64,
) -> Result<DMatrix<f64>> {
    let parts = g.eval_partials(u)?;
    let gu = g.eval(u)?;
    let pinv = pinv_rank(&gu, rank_tol);
    let n = parts.len();
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n {
        let left = &parts[i] * &pinv;
        for j in 0..n {
            h[(i, j)] = 2.0 * lambda.dot(&(&left * &parts[j]));
        }
    }
    Ok((&h + h.transpose()) * 0.5)
}

/// Pseudoinverse inverting only the eigenvalues counted by [`sym_rank`].
fn pinv_rank(a: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let (vals, vecs) = sym_eigen(a);
    let top = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut out = DMatrix::zeros(a.nrows(), a.ncols());
    for k in 0..vals.len() {
        if vals[k].abs() > cutoff(top, tol) {
            let v = vecs.column(k);
            out += (v * v.transpose()) / vals[k];
        }
    }
    out
}

/// The Lagrangian Hessian plus H-term restricted to
/// `N(u) = {h : Σ h_i Eᵀ∂_iG(u)E = 0}`.
pub fn check_sosc(
    f: &Polynomial,
    g: &PolyMatrix,
    u: &[f64],
    lambda: &DMatrix<f64>,
    rank_tol: f64,
) -> Result<Sosc> {
    let (_, e) = kernel_basis(g, u, rank_tol)?;
    let a = ndc_matrix(g, u, &e)?;
    let s = singular_values(&a);
    let top = s.first().copied().unwrap_or(0.0);
    let tangent = null_space_below(&a.transpose(), cutoff(top, rank_tol));

    let hf = f.hessian().eval(u)?;
    let hg = g.contract(lambda)?.hessian().eval(u)?;
    let w = hf - hg + h_term(g, u, lambda, rank_tol)?;
    let tol = 1e-7 * (1.0 + w.norm());
    if tangent.ncols() == 0 {
        return Ok(Sosc {
            holds: true,
            min_eig: None,
            tol,
            tangent,
            hessian: w,
        });
    }
    let reduced = tangent.transpose() * &w * &tangent;
    let min_eig = min_eigenvalue(&reduced);
    Ok(Sosc {
        holds: min_eig > tol,
        min_eig: Some(min_eig),
        tol,
        tangent,
        hessian: w,
    })
}
