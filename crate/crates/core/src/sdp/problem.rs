use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::min_eigenvalue;

/// Affine PSD constraint `F0 + Σ_j y_j F_j ⪰ 0`.
///
/// Matrices are stored as upper-triangle triplets `(i, j, v)` with `i ≤ j`;
/// an off-diagonal triplet stands for both `(i, j)` and `(j, i)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsdBlock {
    pub size: usize,
    #[serde(rename = "F0")]
    pub f0: Vec<(usize, usize, f64)>,
    /// `(variable, i, j, v)`.
    #[serde(rename = "Fj")]
    pub fj: Vec<(usize, usize, usize, f64)>,
}

impl PsdBlock {
    pub fn new(size: usize) -> Self {
        Self {
            size,
            f0: Vec::new(),
            fj: Vec::new(),
        }
    }

    /// Dense `F0 + Σ y_j F_j`.
    pub fn eval(&self, y: &[f64]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.size, self.size);
        for &(i, j, v) in &self.f0 {
            add_sym(&mut m, i, j, v);
        }
        for &(var, i, j, v) in &self.fj {
            add_sym(&mut m, i, j, v * y[var]);
        }
        m
    }
}

pub(crate) fn add_sym(m: &mut DMatrix<f64>, i: usize, j: usize, v: f64) {
    m[(i, j)] += v;
    if i != j {
        m[(j, i)] += v;
    }
}

/// `⟨F, Z⟩` for a triplet-encoded symmetric `F`.
pub(crate) fn sparse_dot(t: &[(usize, usize, f64)], z: &DMatrix<f64>) -> f64 {
    t.iter()
        .map(|&(i, j, v)| {
            if i == j {
                v * z[(i, i)]
            } else {
                v * (z[(i, j)] + z[(j, i)])
            }
        })
        .sum()
}

/// Sparse equality constraints `A y = b`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EqConstraints {
    /// `(row, variable, value)`.
    #[serde(rename = "A")]
    pub a: Vec<(usize, usize, f64)>,
    pub b: Vec<f64>,
}

impl EqConstraints {
    pub fn rows(&self) -> usize {
        self.b.len()
    }

    pub fn dense(&self, vars: usize) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.b.len(), vars);
        for &(r, c, v) in &self.a {
            a[(r, c)] += v;
        }
        a
    }
}

/// `min cᵀy` over free `y ∈ R^N` subject to PSD blocks and `A y = b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdpProblem {
    pub vars: usize,
    pub objective: Vec<f64>,
    pub psd_blocks: Vec<PsdBlock>,
    pub eq: EqConstraints,
}

impl SdpProblem {
    pub fn new(vars: usize) -> Self {
        Self {
            vars,
            objective: vec![0.0; vars],
            psd_blocks: Vec::new(),
            eq: EqConstraints::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::PreconditionViolated(msg));
        if self.objective.len() != self.vars {
            return bad(format!(
                "objective has {} entries for {} variables",
                self.objective.len(),
                self.vars
            ));
        }
        for (b, blk) in self.psd_blocks.iter().enumerate() {
            let in_range = |i: usize, j: usize| i <= j && j < blk.size;
            if blk.f0.iter().any(|&(i, j, _)| !in_range(i, j))
                || blk
                    .fj
                    .iter()
                    .any(|&(var, i, j, _)| !in_range(i, j) || var >= self.vars)
            {
                return bad(format!("block {b} has an entry outside its upper triangle"));
            }
        }
        let rows = self.eq.b.len();
        if self
            .eq
            .a
            .iter()
            .any(|&(r, c, _)| r >= rows || c >= self.vars)
        {
            return bad("equality matrix entry out of range".into());
        }
        let finite = self.objective.iter().all(|v| v.is_finite())
            && self.eq.b.iter().all(|v| v.is_finite())
            && self.eq.a.iter().all(|t| t.2.is_finite())
            && self.psd_blocks.iter().all(|blk| {
                blk.f0.iter().all(|t| t.2.is_finite()) && blk.fj.iter().all(|t| t.3.is_finite())
            });
        if !finite {
            return bad("problem data contains non-finite values".into());
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("problem serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: SdpProblem = serde_json::from_str(s)
            .map_err(|e| Error::Backend(format!("bad problem JSON: {e}")))?;
        p.validate()?;
        Ok(p)
    }

    /// Reported residuals of a candidate primal-dual pair.
    pub fn residuals(&self, y: &[f64], z: &[DMatrix<f64>], nu: &[f64]) -> Residuals {
        let a = self.eq.dense(self.vars);
        let yv = DVector::from_column_slice(y);
        let bv = DVector::from_column_slice(&self.eq.b);
        let primal_eq = if self.eq.rows() == 0 {
            0.0
        } else {
            (&a * &yv - &bv).norm() / (1.0 + bv.norm())
        };
        let mut primal_psd = 0.0f64;
        let mut dual_psd = 0.0f64;
        let mut compl = 0.0;
        let mut dual_vec = DVector::from_column_slice(&self.objective);
        let mut f0z = 0.0;
        for (blk, zb) in self.psd_blocks.iter().zip(z) {
            let fb = blk.eval(y);
            primal_psd = primal_psd.max((-min_eigenvalue(&fb)).max(0.0) / (1.0 + fb.norm()));
            dual_psd = dual_psd.max((-min_eigenvalue(zb)).max(0.0) / (1.0 + zb.norm()));
            compl += fb.dot(zb);
            f0z += sparse_dot(&blk.f0, zb);
            for &(var, i, j, v) in &blk.fj {
                dual_vec[var] -= sparse_dot(&[(i, j, v)], zb);
            }
        }
        if self.eq.rows() > 0 {
            dual_vec -= a.transpose() * DVector::from_column_slice(nu);
        }
        let cv = DVector::from_column_slice(&self.objective);
        let dual_eq = dual_vec.norm() / (1.0 + cv.norm());
        let pobj = cv.dot(&yv);
        let dobj = -f0z + bv.dot(&DVector::from_column_slice(nu));
        let scale = 1.0 + pobj.abs() + dobj.abs();
        Residuals {
            primal: primal_eq.max(primal_psd),
            dual: dual_eq.max(dual_psd),
            gap: ((pobj - dobj).abs() / scale).max(compl.abs() / scale),
            primal_objective: pobj,
            dual_objective: dobj,
        }
    }
}

/// Relative residuals as reported in an [`SdpSolution`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// `max(‖Ay − b‖/(1+‖b‖), max_b λ⁻(F_b(y))/(1+‖F_b(y)‖))`.
    pub primal: f64,
    /// `max(‖c − 𝒜*Z − Aᵀν‖/(1+‖c‖), max_b λ⁻(Z_b)/(1+‖Z_b‖))`.
    pub dual: f64,
    /// Larger of the relative objective gap and relative complementarity.
    pub gap: f64,
    pub primal_objective: f64,
    pub dual_objective: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.primal.max(self.dual).max(self.gap)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    MaxIter,
    NumericalTrouble,
}

/// Primal `y`, block multipliers `Z_b ⪰ 0` and equality multipliers `ν`
/// with `c_j = Σ_b ⟨F_j^{(b)}, Z_b⟩ + (Aᵀν)_j` at optimality.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdpSolution {
    pub status: SolveStatus,
    pub y: Vec<f64>,
    #[serde(with = "dense_list")]
    pub z: Vec<DMatrix<f64>>,
    pub nu: Vec<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub residuals: Residuals,
    pub iterations: usize,
}

impl SdpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("solution serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Backend(format!("bad solution JSON: {e}")))
    }
}

/// Dense matrices as nested row arrays.
mod dense_list {
    use nalgebra::DMatrix;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[DMatrix<f64>], s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<Vec<f64>>> = v
            .iter()
            .map(|m| {
                (0..m.nrows())
                    .map(|i| m.row(i).iter().copied().collect())
                    .collect()
            })
            .collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<DMatrix<f64>>, D::Error> {
        let rows: Vec<Vec<Vec<f64>>> = Vec::deserialize(d)?;
        rows.into_iter()
            .map(|m| {
                let n = m.len();
                if m.iter().any(|r| r.len() != n) {
                    return Err(serde::de::Error::custom("block matrix is not square"));
                }
                Ok(DMatrix::from_fn(n, n, |i, j| m[i][j]))
            })
            .collect()
    }
}

/// Solver options shared by all backends.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Whether selector-structured problems may be solved through their dual.
    pub dualize: Dualize,
    pub verbose: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dualize {
    Auto,
    Never,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 200,
            dualize: Dualize::Auto,
            verbose: false,
        }
    }
}
