use crate::error::{Error, Result};
use crate::linalg::{min_eigenvalue, pivoted_cholesky};
use crate::optimality::kkt::{cutoff, kernel_basis};
use crate::polyalg::{poly_matmul, poly_transpose, PolyMatrix, Polynomial};

/// `T(x) = p(x)²C(x) − p(x)·B(x)ᵀ adj(A(x)) B(x)` for the partition
/// `PᵀGP = [[A, B], [Bᵀ, C]]` with `A` the pivot block.
#[derive(Clone, Debug, PartialEq)]
pub struct SchurReduction {
    /// Pivot indices first, then the remaining indices in ascending order.
    pub permutation: Vec<usize>,
    pub rank: usize,
    /// `det A`.
    pub p: Polynomial,
    pub t: PolyMatrix,
}

impl SchurReduction {
    pub fn pivots(&self) -> &[usize] {
        &self.permutation[..self.rank]
    }

    pub fn rest(&self) -> &[usize] {
        &self.permutation[self.rank..]
    }
}

/// Picks an `r×r` principal pivot block by pivoted Cholesky of `G(u)` and
/// forms the polynomial Schur complement. With `r = 0` the pivot block is
/// empty, `p = 1` and `T = G`.
pub fn schur_reduce(g: &PolyMatrix, u: &[f64], rank_tol: f64) -> Result<SchurReduction> {
    let (r, _) = kernel_basis(g, u, rank_tol)?;
    let gu = g.eval(u)?;
    let m = g.size();
    let top = gu.amax();
    let pivots = pivoted_cholesky(&gu, r, 0.0);
    if pivots.len() < r {
        return Err(Error::NoPivotBlock { rank: r });
    }
    let au = g.principal(&pivots).eval(u)?;
    if r > 0 && min_eigenvalue(&au) <= cutoff(top, rank_tol) {
        return Err(Error::NoPivotBlock { rank: r });
    }
    let mut rest: Vec<usize> = (0..m).filter(|i| !pivots.contains(i)).collect();
    rest.sort_unstable();

    let n = g.nvars();
    if r == 0 {
        return Ok(SchurReduction {
            permutation: rest,
            rank: 0,
            p: Polynomial::constant(n, 1.0),
            t: g.clone(),
        });
    }
    let a = g.principal(&pivots);
    let (p, adj) = a.det_adjugate()?;
    let b = g.block(&pivots, &rest);
    let adj_rows = adj.block(&(0..r).collect::<Vec<_>>(), &(0..r).collect::<Vec<_>>());
    let bt_adj_b = poly_matmul(&poly_matmul(&poly_transpose(&b), &adj_rows, n), &b, n);
    let p2 = &p * &p;
    let t = PolyMatrix::from_fn(rest.len(), n, |i, j| {
        &(&p2 * g.get(rest[i], rest[j])) - &(&p * &bt_adj_b[i][j])
    });
    let mut permutation = pivots;
    permutation.extend(rest);
    Ok(SchurReduction {
        permutation,
        rank: r,
        p,
        t,
    })
}
