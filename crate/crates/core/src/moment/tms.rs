use crate::error::{check_dim, Error, Result};
use crate::polyalg::{Monomial, MonomialBasis, Polynomial};

/// Truncated multi-sequence `y ∈ R^{N^n_d}`, dense over all `|α| ≤ d`.
#[derive(Clone, Debug)]
pub struct Tms {
    basis: MonomialBasis,
    values: Vec<f64>,
}

impl Tms {
    /// Values are given in graded lex order of the degree-`order` basis.
    pub fn new(nvars: usize, order: u32, values: Vec<f64>) -> Result<Self> {
        let basis = MonomialBasis::new(nvars, order);
        check_dim(basis.len(), values.len())?;
        Ok(Self { basis, values })
    }

    pub fn zeros(nvars: usize, order: u32) -> Self {
        let basis = MonomialBasis::new(nvars, order);
        let values = vec![0.0; basis.len()];
        Self { basis, values }
    }

    pub fn from_fn<F: FnMut(&Monomial) -> f64>(nvars: usize, order: u32, f: F) -> Self {
        let basis = MonomialBasis::new(nvars, order);
        let values = basis.iter().map(f).collect();
        Self { basis, values }
    }

    pub fn nvars(&self) -> usize {
        self.basis.nvars()
    }

    /// Truncation degree `2k`.
    pub fn order(&self) -> u32 {
        self.basis.degree()
    }

    pub fn basis(&self) -> &MonomialBasis {
        &self.basis
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `y_α`; panics if `|α|` exceeds the order.
    pub fn get(&self, alpha: &Monomial) -> f64 {
        match self.basis.index_of(alpha) {
            Some(i) => self.values[i],
            None => panic!(
                "moment {alpha} outside truncation of order {}",
                self.order()
            ),
        }
    }

    pub fn get_exps(&self, exps: &[u32]) -> f64 {
        self.get(&Monomial::new(exps.to_vec()))
    }

    /// Restriction to `|α| ≤ order`.
    pub fn truncate(&self, order: u32) -> Result<Tms> {
        self.require_order(order)?;
        let basis = MonomialBasis::new(self.nvars(), order);
        let values = self.values[..basis.len()].to_vec();
        Ok(Tms { basis, values })
    }

    /// First-order moments `(y_{e_1}, …, y_{e_n})`.
    pub fn first_moments(&self) -> Vec<f64> {
        let n = self.nvars();
        (0..n).map(|i| self.get(&Monomial::var(n, i))).collect()
    }

    pub(crate) fn require_order(&self, order: u32) -> Result<()> {
        if order > self.order() {
            Err(Error::DegreeOverflow {
                degree: order,
                max: self.order(),
            })
        } else {
            Ok(())
        }
    }
}

/// Finitely atomic probability measure `Σ γ_j δ_{u_j}`.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomicMeasure {
    atoms: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

pub const WEIGHT_SUM_TOL: f64 = 1e-8;

impl AtomicMeasure {
    pub fn new(atoms: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        check_dim(atoms.len(), weights.len())?;
        if atoms.is_empty() {
            return Err(Error::PreconditionViolated("measure has no atoms".into()));
        }
        let n = atoms[0].len();
        for a in &atoms {
            check_dim(n, a.len())?;
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::PreconditionViolated(
                "weights must be positive".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::PreconditionViolated(format!(
                "weights sum to {total}, not 1"
            )));
        }
        Ok(Self { atoms, weights })
    }

    pub fn dirac(u: Vec<f64>) -> Self {
        Self {
            atoms: vec![u],
            weights: vec![1.0],
        }
    }

    pub fn atoms(&self) -> &[Vec<f64>] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn nvars(&self) -> usize {
        self.atoms[0].len()
    }

    pub fn integrate(&self, p: &Polynomial) -> Result<f64> {
        let mut s = 0.0;
        for (u, w) in self.atoms.iter().zip(&self.weights) {
            s += w * p.eval(u)?;
        }
        Ok(s)
    }
}

/// Moments `y_α = Σ_j γ_j u_j^α` up to degree `order`.
pub fn tms_from_atoms(mu: &AtomicMeasure, order: u32) -> Tms {
    Tms::from_fn(mu.nvars(), order, |alpha| {
        mu.atoms
            .iter()
            .zip(&mu.weights)
            .map(|(u, w)| w * alpha.eval(u))
            .sum()
    })
}

/// `ℒ_y(p) = Σ_α p_α y_α`.
pub fn riesz(y: &Tms, p: &Polynomial) -> Result<f64> {
    check_dim(y.nvars(), p.nvars())?;
    y.require_order(p.degree())?;
    Ok(p.terms().map(|(m, c)| c * y.get(m)).sum())
}
