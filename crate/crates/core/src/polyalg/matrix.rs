use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::polyalg::Polynomial;

/// Largest size accepted by [`PolyMatrix::det_adjugate`].
pub const MAX_DET_SIZE: usize = 8;

/// Symmetric `m×m` matrix of polynomials, stored as its upper triangle.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyMatrix {
    size: usize,
    nvars: usize,
    // Row-major upper triangle: (i, j) with i <= j.
    upper: Vec<Polynomial>,
}

fn packed(m: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * m - i * (i + 1) / 2 + j
}

impl PolyMatrix {
    pub fn zeros(size: usize, nvars: usize) -> Self {
        Self {
            size,
            nvars,
            upper: vec![Polynomial::zero(nvars); size * (size + 1) / 2],
        }
    }

    pub fn identity(size: usize, nvars: usize) -> Self {
        Self::from_fn(size, nvars, |i, j| {
            Polynomial::constant(nvars, if i == j { 1.0 } else { 0.0 })
        })
    }

    /// Builds from a function evaluated on the upper triangle only.
    pub fn from_fn<F>(size: usize, nvars: usize, mut f: F) -> Self
    where
        F: FnMut(usize, usize) -> Polynomial,
    {
        let mut upper = Vec::with_capacity(size * (size + 1) / 2);
        for i in 0..size {
            for j in i..size {
                let p = f(i, j);
                assert_eq!(p.nvars(), nvars, "entry ({i},{j}) has the wrong arity");
                upper.push(p);
            }
        }
        Self { size, nvars, upper }
    }

    /// Diagonal matrix with the given entries.
    pub fn diag(nvars: usize, entries: &[Polynomial]) -> Self {
        Self::from_fn(entries.len(), nvars, |i, j| {
            if i == j {
                entries[i].clone()
            } else {
                Polynomial::zero(nvars)
            }
        })
    }

    /// Constant matrix; only the upper triangle of `c` is read.
    pub fn constant(nvars: usize, c: &DMatrix<f64>) -> Self {
        Self::from_fn(c.nrows(), nvars, |i, j| {
            Polynomial::constant(nvars, c[(i, j)])
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn get(&self, i: usize, j: usize) -> &Polynomial {
        assert!(
            i < self.size && j < self.size,
            "index ({i},{j}) out of range"
        );
        &self.upper[packed(self.size, i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, p: Polynomial) {
        assert!(
            i < self.size && j < self.size,
            "index ({i},{j}) out of range"
        );
        assert_eq!(p.nvars(), self.nvars);
        let k = packed(self.size, i, j);
        self.upper[k] = p;
    }

    /// Maximum entry degree.
    pub fn degree(&self) -> u32 {
        self.upper.iter().map(Polynomial::degree).max().unwrap_or(0)
    }

    /// `d_G = max ⌈deg G_ij / 2⌉`.
    pub fn d_g(&self) -> u32 {
        self.upper
            .iter()
            .map(|p| p.degree().div_ceil(2))
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, u: &[f64]) -> Result<DMatrix<f64>> {
        check_dim(self.nvars, u.len())?;
        let mut out = DMatrix::zeros(self.size, self.size);
        for i in 0..self.size {
            for j in i..self.size {
                let v = self.get(i, j).eval(u)?;
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        Ok(out)
    }

    /// Entrywise `∂/∂x_i` (0-based).
    pub fn partial_matrix(&self, i: usize) -> Result<PolyMatrix> {
        if i >= self.nvars {
            return Err(Error::IndexOutOfRange {
                index: i,
                bound: self.nvars,
            });
        }
        Ok(self.map(|p| p.partial(i)))
    }

    /// `∇G(u)[d] = Σ d_i ∂_iG(u)`.
    pub fn grad_apply(&self, u: &[f64], d: &[f64]) -> Result<DMatrix<f64>> {
        check_dim(self.nvars, d.len())?;
        let mut out = DMatrix::zeros(self.size, self.size);
        for (i, &di) in d.iter().enumerate() {
            if di != 0.0 {
                out += self.partial_matrix(i)?.eval(u)? * di;
            }
        }
        Ok(out)
    }

    /// `∇G(u)*[X]`, with component `i` equal to `⟨∂_iG(u), X⟩`.
    pub fn grad_adjoint(&self, u: &[f64], x: &DMatrix<f64>) -> Result<DVector<f64>> {
        check_dim(self.size, x.nrows())?;
        check_dim(self.size, x.ncols())?;
        let mut out = DVector::zeros(self.nvars);
        for i in 0..self.nvars {
            out[i] = self.partial_matrix(i)?.eval(u)?.dot(x);
        }
        Ok(out)
    }

    /// Evaluated partial derivatives `∂_1G(u), …, ∂_nG(u)`.
    pub fn eval_partials(&self, u: &[f64]) -> Result<Vec<DMatrix<f64>>> {
        (0..self.nvars)
            .map(|i| self.partial_matrix(i)?.eval(u))
            .collect()
    }

    /// The polynomial `⟨C, G(x)⟩` for a constant symmetric `C`.
    pub fn contract(&self, c: &DMatrix<f64>) -> Result<Polynomial> {
        check_dim(self.size, c.nrows())?;
        let mut out = Polynomial::zero(self.nvars);
        for i in 0..self.size {
            for j in i..self.size {
                let w = if i == j {
                    c[(i, i)]
                } else {
                    c[(i, j)] + c[(j, i)]
                };
                if w != 0.0 {
                    out = out + self.get(i, j).scale(w);
                }
            }
        }
        Ok(out)
    }

    pub fn map<F>(&self, f: F) -> PolyMatrix
    where
        F: Fn(&Polynomial) -> Polynomial,
    {
        PolyMatrix {
            size: self.size,
            nvars: self.nvars,
            upper: self.upper.iter().map(f).collect(),
        }
    }

    pub fn scale_poly(&self, p: &Polynomial) -> PolyMatrix {
        self.map(|q| q * p)
    }

    /// Lifts every entry into `total` variables starting at `offset`.
    pub fn embed(&self, total: usize, offset: usize) -> PolyMatrix {
        PolyMatrix {
            size: self.size,
            nvars: total,
            upper: self.upper.iter().map(|p| p.embed(total, offset)).collect(),
        }
    }

    /// Principal submatrix on the given indices, in the given order.
    pub fn principal(&self, idx: &[usize]) -> PolyMatrix {
        Self::from_fn(idx.len(), self.nvars, |a, b| {
            self.get(idx[a], idx[b]).clone()
        })
    }

    /// Rectangular block with the given row and column indices.
    pub fn block(&self, rows: &[usize], cols: &[usize]) -> Vec<Vec<Polynomial>> {
        rows.iter()
            .map(|&i| cols.iter().map(|&j| self.get(i, j).clone()).collect())
            .collect()
    }

    /// `(det A, adj A)` by cofactor expansion.
    pub fn det_adjugate(&self) -> Result<(Polynomial, PolyMatrix)> {
        let m = self.size;
        if m > MAX_DET_SIZE {
            return Err(Error::MatrixTooLarge(m));
        }
        let all: Vec<usize> = (0..m).collect();
        let det = minor_det(self, &all, &all, self.nvars);
        if m == 0 {
            return Ok((det, PolyMatrix::zeros(0, self.nvars)));
        }
        // adj(A)_ij = (-1)^(i+j) det(A with row j and column i removed); symmetric.
        let adj = Self::from_fn(m, self.nvars, |i, j| {
            let rows: Vec<usize> = all.iter().copied().filter(|&r| r != j).collect();
            let cols: Vec<usize> = all.iter().copied().filter(|&c| c != i).collect();
            let d = minor_det(self, &rows, &cols, self.nvars);
            if (i + j) % 2 == 0 {
                d
            } else {
                -d
            }
        });
        Ok((det, adj))
    }
}

/// Determinant of the submatrix on `rows × cols` via Laplace expansion with
/// memoized column subsets.
fn minor_det(a: &PolyMatrix, rows: &[usize], cols: &[usize], nvars: usize) -> Polynomial {
    let k = rows.len();
    debug_assert_eq!(k, cols.len());
    let mut table: Vec<Option<Polynomial>> = vec![None; 1 << k];
    table[0] = Some(Polynomial::constant(nvars, 1.0));
    for mask in 1usize..(1 << k) {
        let r = mask.count_ones() as usize - 1;
        let mut acc = Polynomial::zero(nvars);
        let mut pos = 0;
        for c in 0..k {
            if mask & (1 << c) == 0 {
                continue;
            }
            let entry = a.get(rows[r], cols[c]);
            if !entry.is_zero() {
                let sub = table[mask ^ (1 << c)].as_ref().expect("subset computed");
                if !sub.is_zero() {
                    let term = entry * sub;
                    acc = if (r + pos) % 2 == 0 {
                        acc + term
                    } else {
                        acc - term
                    };
                }
            }
            pos += 1;
        }
        table[mask] = Some(acc);
    }
    table[(1 << k) - 1].take().expect("full set computed")
}

/// Product of rectangular polynomial matrices given as row vectors.
pub fn poly_matmul(
    a: &[Vec<Polynomial>],
    b: &[Vec<Polynomial>],
    nvars: usize,
) -> Vec<Vec<Polynomial>> {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            debug_assert_eq!(row.len(), inner);
            (0..cols)
                .map(|j| {
                    (0..inner).fold(Polynomial::zero(nvars), |acc, l| acc + &row[l] * &b[l][j])
                })
                .collect()
        })
        .collect()
}

pub fn poly_transpose(a: &[Vec<Polynomial>]) -> Vec<Vec<Polynomial>> {
    let cols = a.first().map_or(0, Vec::len);
    (0..cols)
        .map(|j| a.iter().map(|row| row[j].clone()).collect())
        .collect()
}
