//! Dense symmetric linear-algebra helpers shared by the numerical modules.

use nalgebra::{DMatrix, DVector};

/// Eigen-decomposition of a symmetric matrix with eigenvalues ascending.
pub fn sym_eigen(a: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = a.nrows();
    if n == 0 {
        return (DVector::zeros(0), DMatrix::zeros(0, 0));
    }
    let sym = (a + a.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn min_eigenvalue(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 {
        return f64::INFINITY;
    }
    sym_eigen(a).0[0]
}

/// Singular values in descending order.
pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = a
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// `#{σ_i > tol·σ_1}`; zero for the zero matrix.
pub fn numerical_rank(a: &DMatrix<f64>, tol: f64) -> usize {
    rank_of_values(&singular_values(a), tol)
}

/// Relative rank count on a descending list of nonnegative values.
pub fn rank_of_values(s: &[f64], tol: f64) -> usize {
    match s.first() {
        Some(&top) if top > 0.0 => s.iter().take_while(|&&v| v > tol * top).count(),
        _ => 0,
    }
}

/// Moore–Penrose pseudoinverse of a symmetric matrix, inverting eigenvalues
/// whose magnitude exceeds `tol·max(|λ|)`.
pub fn pinv_sym(a: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let n = a.nrows();
    let (vals, vecs) = sym_eigen(a);
    let top = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut out = DMatrix::zeros(n, n);
    for k in 0..n {
        if top > 0.0 && vals[k].abs() > tol * top {
            let v = vecs.column(k);
            out += (v * v.transpose()) / vals[k];
        }
    }
    out
}

/// Orthonormal basis of the null space of `a` (columns), at relative
/// tolerance `tol` on singular values.
pub fn null_space(a: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let top = singular_values(a).first().copied().unwrap_or(0.0);
    null_space_below(a, tol * top)
}

/// Orthonormal basis of the right singular vectors of `a` whose singular
/// values are at most `cutoff`.
pub fn null_space_below(a: &DMatrix<f64>, cutoff: f64) -> DMatrix<f64> {
    let (rows, cols) = a.shape();
    if cols == 0 {
        return DMatrix::zeros(0, 0);
    }
    if rows == 0 {
        return DMatrix::identity(cols, cols);
    }
    let svd = a.clone().svd(false, true);
    let vt = svd.v_t.expect("right singular vectors requested");
    let mut keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] <= cutoff)
        .collect();
    let mut basis: Vec<DVector<f64>> = keep.drain(..).map(|k| vt.row(k).transpose()).collect();
    // Thin SVDs omit the directions beyond min(rows, cols).
    if rows < cols {
        let have = DMatrix::from_fn(cols, vt.nrows(), |r, c| vt[(c, r)]);
        let proj = DMatrix::identity(cols, cols) - &have * have.transpose();
        let (vals, vecs) = sym_eigen(&proj);
        for k in 0..cols {
            if vals[k] > 0.5 {
                basis.push(vecs.column(k).clone_owned());
            }
        }
    }
    if basis.is_empty() {
        return DMatrix::zeros(cols, 0);
    }
    DMatrix::from_columns(&basis)
}

/// Symmetric part, `(A + Aᵀ)/2`.
pub fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

/// Projection onto the PSD cone by clipping negative eigenvalues.
pub fn psd_clip(a: &DMatrix<f64>) -> DMatrix<f64> {
    let (vals, vecs) = sym_eigen(a);
    let mut out = symmetrize(a);
    for (i, &v) in vals.iter().enumerate() {
        if v < 0.0 {
            let u = vecs.column(i);
            out -= (u * u.transpose()) * v;
        }
    }
    symmetrize(&out)
}

/// `svec` of a symmetric matrix: upper triangle row by row with off-diagonal
/// entries scaled by √2, so that `⟨svec A, svec B⟩ = ⟨A, B⟩`.
pub fn svec(a: &DMatrix<f64>) -> DVector<f64> {
    let n = a.nrows();
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            out.push(if i == j {
                a[(i, i)]
            } else {
                std::f64::consts::SQRT_2 * 0.5 * (a[(i, j)] + a[(j, i)])
            });
        }
    }
    DVector::from_vec(out)
}

/// Inverse of [`svec`].
pub fn smat(v: &[f64], n: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            if i == j {
                out[(i, i)] = v[k];
            } else {
                let x = v[k] / std::f64::consts::SQRT_2;
                out[(i, j)] = x;
                out[(j, i)] = x;
            }
            k += 1;
        }
    }
    out
}

/// Greedy diagonal pivoting of a PSD matrix: the indices chosen by a
/// pivoted Cholesky factorization, at most `max_rank` of them, stopping once
/// the largest remaining Schur-complement diagonal drops to `tol` times the
/// largest diagonal of `a`.
pub fn pivoted_cholesky(a: &DMatrix<f64>, max_rank: usize, tol: f64) -> Vec<usize> {
    let n = a.nrows();
    let top = (0..n).map(|i| a[(i, i)]).fold(0.0f64, f64::max);
    let mut s = symmetrize(a);
    let mut pivots = Vec::new();
    if top <= 0.0 {
        return pivots;
    }
    while pivots.len() < max_rank.min(n) {
        let (p, d) = (0..n)
            .filter(|i| !pivots.contains(i))
            .map(|i| (i, s[(i, i)]))
            .fold((usize::MAX, f64::NEG_INFINITY), |b, c| {
                if c.1 > b.1 {
                    c
                } else {
                    b
                }
            });
        if p == usize::MAX || d <= tol * top {
            break;
        }
        let col = s.column(p).clone_owned();
        s -= &col * col.transpose() / d;
        pivots.push(p);
    }
    pivots
}
