use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hierarchy::FlatTruncation;
use crate::linalg::pivoted_cholesky;
use crate::moment::{moment_matrix, AtomicMeasure, Tms};
use crate::polyalg::{Monomial, MonomialBasis};

/// Largest admissible moment mismatch, relative to `max(1, max|y_α|)`.
pub const ATOM_TOL: f64 = 1e-5;

/// Recovers the atomic measure behind a flat moment sequence.
///
/// A pivoted Cholesky factorization of `M_{t−d}[y]` selects `r` monomials
/// `B`; the multiplication matrices `N_i = M_B⁻¹ M_{B,x_iB}` commute and
/// share eigenvectors. The real Schur vectors `q_j` of a seeded random convex
/// combination give the atoms as `u_{j,i} = q_jᵀ N_i q_j`. Weights come from a
/// least-squares match of all moments of degree `≤ 2t`.
pub fn extract_atoms(y: &Tms, flat: &FlatTruncation, seed: u64) -> Result<AtomicMeasure> {
    extract_atoms_with_tol(y, flat, seed, ATOM_TOL)
}

pub fn extract_atoms_with_tol(
    y: &Tms,
    flat: &FlatTruncation,
    seed: u64,
    atom_tol: f64,
) -> Result<AtomicMeasure> {
    let n = y.nvars();
    let r = flat.rank_lower;
    let lower = flat.t - flat.shift;
    let m_lo = moment_matrix(y, lower)?;
    let basis = MonomialBasis::new(n, lower);
    let pivots = pivoted_cholesky(&m_lo, r, 1e-12);
    let fail = |residual: f64| Error::ExtractionFailed { residual };
    if pivots.len() < r || r == 0 {
        return Err(fail(f64::INFINITY));
    }
    let b: Vec<&Monomial> = pivots.iter().map(|&p| basis.get(p)).collect();
    let mb = DMatrix::from_fn(r, r, |i, j| y.get(&b[i].mul(b[j])));
    let Some(lu) = mb.clone().cholesky() else {
        return Err(fail(f64::INFINITY));
    };

    let mut mult = Vec::with_capacity(n);
    for i in 0..n {
        let xi = Monomial::var(n, i);
        let shifted = DMatrix::from_fn(r, r, |a, c| y.get(&b[a].mul(b[c]).mul(&xi)));
        mult.push(lu.solve(&shifted));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut comb = DMatrix::zeros(r, r);
    for (ni, w) in mult.iter().zip(&weights) {
        comb += ni * (w / total);
    }
    let (q, _) = comb.schur().unpack();

    let mut atoms: Vec<Vec<f64>> = (0..r)
        .map(|j| {
            let qj = q.column(j);
            mult.iter().map(|ni| qj.dot(&(ni * qj))).collect()
        })
        .collect();
    atoms.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let full = MonomialBasis::new(n, 2 * flat.t);
    let v = DMatrix::from_fn(full.len(), r, |a, j| full.get(a).eval(&atoms[j]));
    let rhs = DVector::from_iterator(full.len(), full.iter().map(|m| y.get(m)));
    let w = v
        .clone()
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|_| fail(f64::INFINITY))?;
    let sum = w.sum();
    if !(sum > 0.0) {
        return Err(fail(f64::INFINITY));
    }
    let w = w / sum;
    let scale = rhs.amax().max(1.0);
    let residual = (&v * &w - &rhs).amax() / scale;
    if residual > atom_tol || w.iter().any(|&x| x <= 0.0) || !residual.is_finite() {
        return Err(fail(residual));
    }
    AtomicMeasure::new(atoms, w.iter().copied().collect())
}
