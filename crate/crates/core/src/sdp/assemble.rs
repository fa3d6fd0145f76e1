use nalgebra::DMatrix;

use crate::error::{check_dim, Error, Result};
use crate::moment::{block_pattern, scalar_pattern, LinearPattern, Tms};
use crate::polyalg::{MonomialBasis, PolyMatrix, Polynomial};
use crate::sdp::{EqConstraints, PsdBlock, SdpProblem};

fn check_degrees(f: &Polynomial, g: &PolyMatrix, k: u32) -> Result<()> {
    check_dim(f.nvars(), g.nvars())?;
    if f.degree() > 2 * k {
        return Err(Error::DegreeOverflow {
            degree: f.degree(),
            max: 2 * k,
        });
    }
    if g.d_g() > k {
        return Err(Error::DegreeOverflow {
            degree: 2 * g.d_g(),
            max: 2 * k,
        });
    }
    Ok(())
}

fn pattern_block(p: &LinearPattern) -> PsdBlock {
    let mut blk = PsdBlock::new(p.size);
    for (i, j, terms) in &p.entries {
        for &(var, c) in terms {
            if c != 0.0 {
                blk.fj.push((var, *i, *j, c));
            }
        }
    }
    blk
}

/// The order-`k` moment relaxation in y-form.
///
/// Variable `j` is the moment `y_α` of the `j`-th monomial of the degree-`2k`
/// graded-lex basis; block 0 is `M_k[y]` and block 1 is `L_G^{(k)}[y]`.
#[derive(Clone, Debug)]
pub struct MomentRelaxation {
    pub problem: SdpProblem,
    pub basis: MonomialBasis,
    pub k: u32,
}

impl MomentRelaxation {
    pub fn tms(&self, y: &[f64]) -> Tms {
        Tms::new(self.basis.nvars(), self.basis.degree(), y.to_vec())
            .expect("solution length matches the moment basis")
    }

    /// Size of the blocks of `L_G` (the length of `[x]_{k−d_G}`).
    pub fn localizing_basis_len(&self, m: usize) -> usize {
        self.problem.psd_blocks[1].size / m.max(1)
    }
}

pub fn assemble_moment_relaxation(
    f: &Polynomial,
    g: &PolyMatrix,
    k: u32,
) -> Result<MomentRelaxation> {
    check_degrees(f, g, k)?;
    let n = f.nvars();
    let basis = MonomialBasis::new(n, 2 * k);
    let mut problem = SdpProblem::new(basis.len());
    for (m, c) in f.terms() {
        let j = basis.index_of(m).expect("degree checked");
        problem.objective[j] += c;
    }
    let one = Polynomial::constant(n, 1.0);
    problem
        .psd_blocks
        .push(pattern_block(&scalar_pattern(&one, k, &basis)?));
    problem
        .psd_blocks
        .push(pattern_block(&block_pattern(g, k, &basis)?));
    problem.eq = EqConstraints {
        a: vec![(0, 0, 1.0)],
        b: vec![1.0],
    };
    Ok(MomentRelaxation { problem, basis, k })
}

/// The order-`k` SOS relaxation in Gram form.
///
/// Variables are `γ` (when not fixed), then the upper triangle of `Q_0` over
/// `[x]_k`, then the upper triangle of `Q_1` over `e_i ⊗ [x]_t`,
/// `t = k − d_G`, ordered matrix-index major. Equalities match every
/// coefficient of degree `≤ 2k`.
#[derive(Clone, Debug)]
pub struct SosRelaxation {
    pub problem: SdpProblem,
    pub k: u32,
    pub gamma: Option<f64>,
    q0_size: usize,
    q1_size: usize,
    offset: usize,
}

fn upper_len(n: usize) -> usize {
    n * (n + 1) / 2
}

fn read_upper(y: &[f64], n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            m[(i, j)] = y[k];
            m[(j, i)] = y[k];
            k += 1;
        }
    }
    m
}

impl SosRelaxation {
    /// Gram matrices `(Q_0, Q_1)` read from a variable vector.
    pub fn grams(&self, y: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
        let q0 = read_upper(&y[self.offset..], self.q0_size);
        let q1 = read_upper(&y[self.offset + upper_len(self.q0_size)..], self.q1_size);
        (q0, q1)
    }

    /// `γ` from a variable vector, or the fixed value.
    pub fn gamma_value(&self, y: &[f64]) -> f64 {
        self.gamma.unwrap_or_else(|| y[0])
    }
}

/// `max γ  s.t.  f − γ = ⟨Q_0, [x]_k[x]_kᵀ⟩ + ⟨Q_1, G ⊗ [x]_t[x]_tᵀ⟩`, `Q_0, Q_1 ⪰ 0`.
pub fn assemble_sos_relaxation(f: &Polynomial, g: &PolyMatrix, k: u32) -> Result<SosRelaxation> {
    sos_problem(f, g, k, None)
}

/// Feasibility version with `γ` fixed (zero objective).
pub fn assemble_sos_feasibility(
    f: &Polynomial,
    gamma: f64,
    g: &PolyMatrix,
    k: u32,
) -> Result<SosRelaxation> {
    sos_problem(f, g, k, Some(gamma))
}

fn sos_problem(
    f: &Polynomial,
    g: &PolyMatrix,
    k: u32,
    gamma: Option<f64>,
) -> Result<SosRelaxation> {
    check_degrees(f, g, k)?;
    let n = f.nvars();
    let m = g.size();
    let rows = MonomialBasis::new(n, 2 * k);
    let bk = MonomialBasis::new(n, k);
    let bt = MonomialBasis::new(n, k - g.d_g());
    let q0_size = bk.len();
    let s = bt.len();
    let q1_size = m * s;
    let offset = usize::from(gamma.is_none());
    let vars = offset + upper_len(q0_size) + upper_len(q1_size);

    let mut problem = SdpProblem::new(vars);
    let mut a = Vec::new();
    let mut b = vec![0.0; rows.len()];
    for (mono, c) in f.terms() {
        b[rows.index_of(mono).expect("degree checked")] += c;
    }
    match gamma {
        None => {
            problem.objective[0] = -1.0;
            a.push((0, 0, 1.0));
        }
        Some(gv) => b[0] -= gv,
    }

    let mut var = offset;
    let mut q0 = PsdBlock::new(q0_size);
    for i in 0..q0_size {
        for j in i..q0_size {
            let mult = if i == j { 1.0 } else { 2.0 };
            let mono = bk.get(i).mul(bk.get(j));
            a.push((rows.index_of(&mono).expect("degree ≤ 2k"), var, mult));
            q0.fj.push((var, i, j, 1.0));
            var += 1;
        }
    }
    let mut q1 = PsdBlock::new(q1_size);
    for big_i in 0..q1_size {
        for big_j in big_i..q1_size {
            let (gi, ai) = (big_i / s, big_i % s);
            let (gj, aj) = (big_j / s, big_j % s);
            let mult = if big_i == big_j { 1.0 } else { 2.0 };
            let base = bt.get(ai).mul(bt.get(aj));
            for (mono, c) in g.get(gi, gj).terms() {
                let row = rows.index_of(&base.mul(mono)).expect("degree ≤ 2k");
                a.push((row, var, mult * c));
            }
            q1.fj.push((var, big_i, big_j, 1.0));
            var += 1;
        }
    }
    problem.psd_blocks = vec![q0, q1];
    problem.eq = EqConstraints { a, b };
    Ok(SosRelaxation {
        problem,
        k,
        gamma,
        q0_size,
        q1_size,
        offset,
    })
}
