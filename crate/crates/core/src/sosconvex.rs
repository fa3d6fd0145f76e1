//! SOS-convexity tests and the lowest-order solve for SOS-convex instances.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hierarchy::min_order;
use crate::linalg::{min_eigenvalue, psd_clip};
use crate::moment::Tms;
use crate::polyalg::{Monomial, MonomialBasis, PolyMatrix, Polynomial};
use crate::sdp::{
    assemble_moment_relaxation, solve, EqConstraints, PsdBlock, SdpProblem, SolveOptions,
    SolveStatus,
};

/// A Gram representation `p = bᵀ Q b`, `Q ⪰ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct GramWitness {
    pub basis: Vec<Monomial>,
    pub gram: DMatrix<f64>,
    /// Largest coefficient of `bᵀQb − p` after clipping `Q` to the PSD cone.
    pub residual: f64,
}

/// Expands `bᵀ Q b`.
pub fn gram_polynomial(basis: &[Monomial], q: &DMatrix<f64>, nvars: usize) -> Polynomial {
    let mut terms: BTreeMap<Monomial, f64> = BTreeMap::new();
    for (i, bi) in basis.iter().enumerate() {
        for (j, bj) in basis.iter().enumerate() {
            if q[(i, j)] != 0.0 {
                *terms.entry(bi.mul(bj)).or_default() += q[(i, j)];
            }
        }
    }
    Polynomial::from_terms(
        nvars,
        terms.into_iter().map(|(m, c)| (m.exps().to_vec(), c)),
    )
    .expect("basis monomials share the variable count")
}

/// Searches for a PSD Gram matrix of `p` over a fixed monomial basis.
///
/// Returns `None` when the SDP is infeasible, when `p` has a monomial that no
/// product of basis elements produces, or when the clipped Gram matrix does
/// not reproduce `p` to `1e-6·(1 + max|coeff p|)`.
pub fn find_gram(p: &Polynomial, basis: &[Monomial], opts: &SolveOptions) -> Option<GramWitness> {
    let n = basis.len();
    let mut rows: BTreeMap<Monomial, usize> = BTreeMap::new();
    let mut a = Vec::new();
    let mut var = 0;
    let mut block = PsdBlock::new(n);
    for i in 0..n {
        for j in i..n {
            let m = basis[i].mul(&basis[j]);
            let next = rows.len();
            let row = *rows.entry(m).or_insert(next);
            a.push((row, var, if i == j { 1.0 } else { 2.0 }));
            block.fj.push((var, i, j, 1.0));
            var += 1;
        }
    }
    let mut b = vec![0.0; rows.len()];
    for (m, c) in p.terms() {
        b[*rows.get(m)?] = c;
    }
    let mut problem = SdpProblem::new(var);
    problem.psd_blocks.push(block);
    problem.eq = EqConstraints { a, b };
    let sol = solve(&problem, opts);
    if matches!(sol.status, SolveStatus::Infeasible | SolveStatus::Unbounded) {
        return None;
    }
    let gram = psd_clip(&PsdBlock::eval(&problem.psd_blocks[0], &sol.y));
    let recon = gram_polynomial(basis, &gram, p.nvars());
    let residual = (&recon - p).max_abs_coeff();
    let tol = 1e-6 * (1.0 + p.max_abs_coeff());
    (residual <= tol).then(|| GramWitness {
        basis: basis.to_vec(),
        gram,
        residual,
    })
}

/// Monomials `v_i·m` for the `count` variables starting at `offset` and `m` in `base`.
fn tensor_basis(base: &[Monomial], offset: usize, count: usize, nvars: usize) -> Vec<Monomial> {
    let mut out = Vec::with_capacity(base.len() * count);
    for i in 0..count {
        let e = Monomial::var(nvars, offset + i);
        out.extend(base.iter().map(|m| e.mul(m)));
    }
    out
}

/// `hᵀ ∇²f(x) h` in the variables `(x, h)`.
fn hessian_form(f: &Polynomial) -> Polynomial {
    let n = f.nvars();
    let hess = f.hessian();
    let mut out = Polynomial::zero(2 * n);
    for i in 0..n {
        for j in 0..n {
            let hij = hess.get(i, j).embed(2 * n, 0);
            out = out + &(&hij * &Polynomial::var(2 * n, n + i)) * &Polynomial::var(2 * n, n + j);
        }
    }
    out
}

/// Whether `∇²f(x) = P(x)ᵀP(x)`, tested as `hᵀ∇²f(x)h` being a sum of
/// squares over the basis `h ⊗ [x]_{d−1}`, `2d = deg f`.
pub fn is_sos_convex_poly(f: &Polynomial) -> Result<(bool, Option<GramWitness>)> {
    is_sos_convex_poly_with(f, &SolveOptions::default())
}

pub fn is_sos_convex_poly_with(
    f: &Polynomial,
    opts: &SolveOptions,
) -> Result<(bool, Option<GramWitness>)> {
    let deg = f.degree();
    if deg < 2 || deg % 2 == 1 {
        return Err(Error::PreconditionViolated(format!(
            "SOS-convexity needs an even degree of at least 2, got {deg}"
        )));
    }
    let n = f.nvars();
    let base: Vec<Monomial> = MonomialBasis::new(n, deg / 2 - 1)
        .iter()
        .map(|m| m.embed(2 * n, 0))
        .collect();
    let basis = tensor_basis(&base, n, n, 2 * n);
    let witness = find_gram(&hessian_form(f), &basis, opts);
    Ok((witness.is_some(), witness))
}

/// Certificate that `−G` is SOS-convex: `‖ξ‖^{2·xi_power}·q(x, ξ, h)` is a
/// sum of squares, where `q = −hᵀ∇²_x(ξᵀG(x)ξ)h`.
#[derive(Clone, Debug, PartialEq)]
pub struct NegGWitness {
    pub xi_power: u32,
    pub gram: GramWitness,
}

/// Sufficient test for SOS-convexity of `−G`.
///
/// First tries `q(x, ξ, h) = −hᵀ∇²_x(ξᵀG(x)ξ)h` over the basis
/// `ξ ⊗ h ⊗ [x]_{d_G−1}`, then `‖ξ‖²·q` over `(ξ ⊗ ξ) ⊗ h ⊗ [x]_{d_G−1}`.
/// Fixing `ξ ≠ 0` in either identity gives an SOS decomposition of `q` in
/// `(x, h)`, hence `−∇²(ξᵀGξ) = F_ξ(x)ᵀF_ξ(x)`. `false` means not certified.
/// A zero `q` (linear `G`) is certified with no witness.
pub fn is_sos_convex_neg_g(g: &PolyMatrix) -> Result<(bool, Option<NegGWitness>)> {
    is_sos_convex_neg_g_with(g, &SolveOptions::default())
}

pub fn is_sos_convex_neg_g_with(
    g: &PolyMatrix,
    opts: &SolveOptions,
) -> Result<(bool, Option<NegGWitness>)> {
    let n = g.nvars();
    let m = g.size();
    let total = n + m + n;
    let xi = |a: usize| Polynomial::var(total, n + a);
    let h = |i: usize| Polynomial::var(total, n + m + i);

    let mut form = Polynomial::zero(total);
    for a in 0..m {
        for b in 0..m {
            let q = g.get(a, b).embed(total, 0);
            if q.degree() < 2 {
                continue;
            }
            let w = &xi(a) * &xi(b);
            for i in 0..n {
                for j in 0..n {
                    let d2 = q.partial(i).partial(j);
                    if !d2.is_zero() {
                        form = form - &(&(&d2 * &w) * &h(i)) * &h(j);
                    }
                }
            }
        }
    }
    if form.is_zero() {
        return Ok((true, None));
    }
    let x_deg = g.d_g().saturating_sub(1);
    let base: Vec<Monomial> = MonomialBasis::new(n, x_deg)
        .iter()
        .map(|mo| mo.embed(total, 0))
        .collect();
    let with_h = tensor_basis(&base, n + m, n, total);
    let basis = tensor_basis(&with_h, n, m, total);
    if let Some(gram) = find_gram(&form, &basis, opts) {
        return Ok((true, Some(NegGWitness { xi_power: 0, gram })));
    }

    let norm = (0..m).fold(Polynomial::zero(total), |acc, a| acc + &xi(a) * &xi(a));
    let mut basis2 = Vec::new();
    for a in 0..m {
        for b in a..m {
            let e = Monomial::var(total, n + a).mul(&Monomial::var(total, n + b));
            basis2.extend(with_h.iter().map(|mo| e.mul(mo)));
        }
    }
    let witness =
        find_gram(&(&norm * &form), &basis2, opts).map(|gram| NegGWitness { xi_power: 1, gram });
    Ok((witness.is_some(), witness))
}

#[derive(Clone, Debug)]
pub struct ConvexSolution {
    pub value: f64,
    pub minimizer: Vec<f64>,
    pub order: u32,
    pub y: Tms,
}

/// Solves the lowest-order moment relaxation of an SOS-convex instance and
/// reads the minimizer off the first-order moments.
pub fn solve_convex(f: &Polynomial, g: &PolyMatrix) -> Result<ConvexSolution> {
    solve_convex_with(f, g, &SolveOptions::default())
}

pub fn solve_convex_with(
    f: &Polynomial,
    g: &PolyMatrix,
    opts: &SolveOptions,
) -> Result<ConvexSolution> {
    if !is_sos_convex_poly_with(f, opts)?.0 {
        return Err(Error::PreconditionViolated(
            "f is not certified SOS-convex".into(),
        ));
    }
    if !is_sos_convex_neg_g_with(g, opts)?.0 {
        return Err(Error::PreconditionViolated(
            "−G is not certified SOS-convex".into(),
        ));
    }
    let order = min_order(f, g);
    let relax = assemble_moment_relaxation(f, g, order)?;
    let sol = solve(&relax.problem, opts);
    if sol.status != SolveStatus::Optimal {
        return Err(Error::Solver(sol.status));
    }
    let y = relax.tms(&sol.y);
    let minimizer = y.first_moments();
    let value = sol.primal_objective;
    let lam = min_eigenvalue(&g.eval(&minimizer)?);
    if lam < -1e-6 {
        return Err(Error::InfeasiblePoint { min_eig: lam });
    }
    let fu = f.eval(&minimizer)?;
    if fu > value + 1e-6 {
        return Err(Error::PreconditionViolated(format!(
            "f at the first-order moments is {fu:e}, above the bound {value:e}"
        )));
    }
    Ok(ConvexSolution {
        value,
        minimizer,
        order,
        y,
    })
}
