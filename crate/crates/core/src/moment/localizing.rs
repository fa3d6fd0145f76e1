use nalgebra::DMatrix;

use crate::error::{check_dim, Error, Result};
use crate::moment::Tms;
use crate::polyalg::{MonomialBasis, PolyMatrix, Polynomial};

/// Symmetric matrix whose entries are linear forms in a moment vector.
///
/// Each upper-triangle entry `(i, j)` lists `(variable, coefficient)` pairs,
/// where variables index the graded-lex basis the pattern was built against.
#[derive(Clone, Debug)]
pub struct LinearPattern {
    pub size: usize,
    pub entries: Vec<(usize, usize, Vec<(usize, f64)>)>,
}

impl LinearPattern {
    pub fn eval(&self, values: &[f64]) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.size, self.size);
        for (i, j, terms) in &self.entries {
            let v: f64 = terms.iter().map(|&(k, c)| c * values[k]).sum();
            out[(*i, *j)] = v;
            out[(*j, *i)] = v;
        }
        out
    }
}

fn overflow(degree: u32, max: u32) -> Error {
    Error::DegreeOverflow { degree, max }
}

/// Entries `(α, β) ↦ Σ_γ q_γ y_{α+β+γ}` over `[x]_t`.
fn scalar_entries(
    q: &Polynomial,
    rows: &MonomialBasis,
    index: &MonomialBasis,
    row_off: usize,
    col_off: usize,
    diagonal_block: bool,
    out: &mut Vec<(usize, usize, Vec<(usize, f64)>)>,
) -> Result<()> {
    let s = rows.len();
    for a in 0..s {
        let b0 = if diagonal_block { a } else { 0 };
        for b in b0..s {
            let ab = rows.get(a).mul(rows.get(b));
            let mut terms = Vec::with_capacity(q.num_terms());
            for (g, c) in q.terms() {
                let m = ab.mul(g);
                let k = index
                    .index_of(&m)
                    .ok_or_else(|| overflow(m.degree(), index.degree()))?;
                terms.push((k, c));
            }
            out.push((row_off + a, col_off + b, terms));
        }
    }
    Ok(())
}

/// Pattern of `ℒ_y(q·[x]_t[x]_tᵀ)` against the moment basis `index`.
pub fn scalar_pattern(q: &Polynomial, t: u32, index: &MonomialBasis) -> Result<LinearPattern> {
    check_dim(index.nvars(), q.nvars())?;
    let rows = MonomialBasis::new(q.nvars(), t);
    let mut entries = Vec::new();
    scalar_entries(q, &rows, index, 0, 0, true, &mut entries)?;
    Ok(LinearPattern {
        size: rows.len(),
        entries,
    })
}

/// Pattern of the block localizing matrix of `G` at order `k`: block `(i, j)`
/// is the scalar localizing matrix of `G_ij` on the common basis `[x]_{k−d_G}`.
pub fn block_pattern(g: &PolyMatrix, k: u32, index: &MonomialBasis) -> Result<LinearPattern> {
    check_dim(index.nvars(), g.nvars())?;
    let dg = g.d_g();
    if dg > k {
        return Err(overflow(2 * dg, 2 * k));
    }
    let rows = MonomialBasis::new(g.nvars(), k - dg);
    let s = rows.len();
    let mut entries = Vec::new();
    for i in 0..g.size() {
        for j in i..g.size() {
            scalar_entries(
                g.get(i, j),
                &rows,
                index,
                i * s,
                j * s,
                i == j,
                &mut entries,
            )?;
        }
    }
    Ok(LinearPattern {
        size: g.size() * s,
        entries,
    })
}

/// `M_k[y]`, indexed by `[x]_k`.
pub fn moment_matrix(y: &Tms, k: u32) -> Result<DMatrix<f64>> {
    y.require_order(2 * k)?;
    let one = Polynomial::constant(y.nvars(), 1.0);
    Ok(scalar_pattern(&one, k, y.basis())?.eval(y.values()))
}

/// `L_q^{(k)}[y]` on `[x]_t` with `t = k − ⌈deg q / 2⌉`.
pub fn localizing_scalar(y: &Tms, q: &Polynomial, k: u32) -> Result<DMatrix<f64>> {
    if q.degree() > 2 * k {
        return Err(overflow(q.degree(), 2 * k));
    }
    y.require_order(2 * k)?;
    let t = k - q.degree().div_ceil(2);
    Ok(scalar_pattern(q, t, y.basis())?.eval(y.values()))
}

/// `L_G^{(k)}[y]`, the `m×m` block matrix on the uniform basis `[x]_{k−d_G}`.
pub fn localizing_block(y: &Tms, g: &PolyMatrix, k: u32) -> Result<DMatrix<f64>> {
    y.require_order(2 * k)?;
    Ok(block_pattern(g, k, y.basis())?.eval(y.values()))
}
