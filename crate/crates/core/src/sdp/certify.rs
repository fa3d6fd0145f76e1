use nalgebra::DMatrix;

use crate::error::{check_dim, Error, Result};
use crate::linalg::psd_clip;
use crate::polyalg::{MonomialBasis, PolyMatrix, Polynomial};
use crate::sdp::{assemble_sos_feasibility, Backend, BuiltinBackend, SolveOptions, SolveStatus};

/// Witness of `f − γ = σ + Σ_t v_tᵀ G v_t` with `σ = [x]_kᵀ Q_0 [x]_k` and
/// `Σ_t v_tᵀ G v_t = ⟨Q_1, G ⊗ [x]_t[x]_tᵀ⟩`, `t = k − d_G`.
#[derive(Clone, Debug, PartialEq)]
pub struct QmCertificate {
    pub order: u32,
    pub gamma: f64,
    pub q0: DMatrix<f64>,
    pub q1: DMatrix<f64>,
    /// Largest coefficient of `σ + ⟨Q_1, …⟩ − (f − γ)`.
    pub residual: f64,
    pub tolerance: f64,
}

impl QmCertificate {
    /// Re-checks the certificate with independent polynomial arithmetic.
    pub fn verify(&self, f: &Polynomial, g: &PolyMatrix) -> Result<f64> {
        let recon = reconstruct(&self.q0, &self.q1, g, self.order)?;
        let target = f - Polynomial::constant(f.nvars(), self.gamma);
        Ok(max_coeff_diff(&recon, &target))
    }
}

fn max_coeff_diff(p: &Polynomial, q: &Polynomial) -> f64 {
    let mut worst = 0.0f64;
    for (m, c) in p.terms() {
        worst = worst.max((c - q.coeff(m)).abs());
    }
    for (m, c) in q.terms() {
        if p.coeff(m) == 0.0 {
            worst = worst.max(c.abs());
        }
    }
    worst
}

/// `[x]_kᵀ Q_0 [x]_k + ⟨Q_1, G ⊗ [x]_t[x]_tᵀ⟩` expanded as a polynomial.
pub fn reconstruct(
    q0: &DMatrix<f64>,
    q1: &DMatrix<f64>,
    g: &PolyMatrix,
    k: u32,
) -> Result<Polynomial> {
    let n = g.nvars();
    let bk = MonomialBasis::new(n, k);
    check_dim(bk.len(), q0.nrows())?;
    let t = k.checked_sub(g.d_g()).ok_or(Error::DegreeOverflow {
        degree: 2 * g.d_g(),
        max: 2 * k,
    })?;
    let bt = MonomialBasis::new(n, t);
    let s = bt.len();
    check_dim(g.size() * s, q1.nrows())?;

    let mono = |b: &MonomialBasis, i: usize| Polynomial::term(b.get(i).clone(), 1.0);
    let mut out = Polynomial::zero(n);
    for i in 0..bk.len() {
        let pi = mono(&bk, i);
        for j in 0..bk.len() {
            if q0[(i, j)] != 0.0 {
                out = out + (&pi * &mono(&bk, j)).scale(q0[(i, j)]);
            }
        }
    }
    for bi in 0..q1.nrows() {
        let vi = mono(&bt, bi % s);
        for bj in 0..q1.ncols() {
            let w = q1[(bi, bj)];
            if w != 0.0 {
                let gij = g.get(bi / s, bj / s);
                out = out + (&(&vi * &mono(&bt, bj % s)) * gij).scale(w);
            }
        }
    }
    Ok(out)
}

/// Default certificate tolerance `1e-6·(1 + max|coeff f|)`.
pub fn default_certificate_tol(f: &Polynomial) -> f64 {
    1e-6 * (1.0 + f.max_abs_coeff())
}

pub fn certify_qm_membership(
    f: &Polynomial,
    gamma: f64,
    g: &PolyMatrix,
    k: u32,
    tol: Option<f64>,
) -> Result<QmCertificate> {
    certify_qm_membership_with(
        &BuiltinBackend,
        &SolveOptions::default(),
        f,
        gamma,
        g,
        k,
        tol,
    )
}

pub fn certify_qm_membership_with(
    backend: &dyn Backend,
    opts: &SolveOptions,
    f: &Polynomial,
    gamma: f64,
    g: &PolyMatrix,
    k: u32,
    tol: Option<f64>,
) -> Result<QmCertificate> {
    let tol = tol.unwrap_or_else(|| default_certificate_tol(f));
    let relax = assemble_sos_feasibility(f, gamma, g, k)?;
    let sol = backend.solve(&relax.problem, opts)?;
    if matches!(sol.status, SolveStatus::Infeasible | SolveStatus::Unbounded) {
        return Err(Error::NotCertified(format!(
            "Gram feasibility problem at order {k} is infeasible"
        )));
    }
    let (q0, q1) = relax.grams(&sol.y);
    let cert = QmCertificate {
        order: k,
        gamma,
        q0: psd_clip(&q0),
        q1: psd_clip(&q1),
        residual: 0.0,
        tolerance: tol,
    };
    let residual = cert.verify(f, g)?;
    if residual > tol {
        return Err(Error::NotCertified(format!(
            "reconstruction residual {residual:.3e} exceeds {tol:.3e} at order {k} (solver status {:?})",
            sol.status
        )));
    }
    Ok(QmCertificate { residual, ..cert })
}
