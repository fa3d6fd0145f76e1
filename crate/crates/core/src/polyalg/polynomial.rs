use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{check_dim, Result};
use crate::polyalg::{Monomial, PolyMatrix};

/// Relative threshold below which floating-point results are dropped.
pub const PRUNE_RTOL: f64 = 1e-12;

/// Sparse multivariate polynomial with real coefficients.
///
/// The term map never stores zero coefficients; the zero polynomial has no
/// terms. Arithmetic between polynomials in different numbers of variables
/// panics.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Monomial, f64>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        Self::term(Monomial::one(nvars), c)
    }

    /// The coordinate polynomial `x_i` (0-based).
    pub fn var(nvars: usize, i: usize) -> Self {
        Self::term(Monomial::var(nvars, i), 1.0)
    }

    pub fn term(m: Monomial, c: f64) -> Self {
        let nvars = m.nvars();
        let mut terms = BTreeMap::new();
        if c != 0.0 {
            terms.insert(m, c);
        }
        Self { nvars, terms }
    }

    /// Builds from `(exponents, coefficient)` pairs, summing duplicates.
    pub fn from_terms<I>(nvars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, f64)>,
    {
        let mut p = Self::zero(nvars);
        for (exps, c) in terms {
            check_dim(nvars, exps.len())?;
            *p.terms.entry(Monomial::new(exps)).or_insert(0.0) += c;
        }
        p.terms.retain(|_, c| *c != 0.0);
        Ok(p)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; 0 for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, m: &Monomial) -> f64 {
        self.terms.get(m).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, f64)> + '_ {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |a, c| a.max(c.abs()))
    }

    pub fn eval(&self, u: &[f64]) -> Result<f64> {
        check_dim(self.nvars, u.len())?;
        Ok(self.terms.iter().map(|(m, c)| c * m.eval(u)).sum())
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        if s == 0.0 {
            return Self::zero(self.nvars);
        }
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * s)).collect(),
        }
    }

    /// `∂p/∂x_i`.
    pub fn partial(&self, i: usize) -> Polynomial {
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            if let Some((k, dm)) = m.derivative(i) {
                *out.terms.entry(dm).or_insert(0.0) += k * c;
            }
        }
        out.terms.retain(|_, c| *c != 0.0);
        out
    }

    pub fn gradient(&self) -> Vec<Polynomial> {
        (0..self.nvars).map(|i| self.partial(i)).collect()
    }

    pub fn hessian(&self) -> PolyMatrix {
        let grad = self.gradient();
        PolyMatrix::from_fn(self.nvars, self.nvars, |i, j| grad[i].partial(j))
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut out = Self::constant(self.nvars, 1.0);
        for _ in 0..e {
            out = &out * self;
        }
        out
    }

    /// Lifts into `total` variables with the current ones starting at `offset`.
    pub fn embed(&self, total: usize, offset: usize) -> Polynomial {
        Polynomial {
            nvars: total,
            terms: self
                .terms
                .iter()
                .map(|(m, &c)| (m.embed(total, offset), c))
                .collect(),
        }
    }

    /// Drops coefficients below `rtol * max|coeff|`.
    pub fn pruned(mut self, rtol: f64) -> Polynomial {
        let cutoff = rtol * self.max_abs_coeff();
        self.terms.retain(|_, c| c.abs() > cutoff && *c != 0.0);
        self
    }

    fn combine(&self, other: &Polynomial, sign: f64) -> Polynomial {
        assert_eq!(
            self.nvars, other.nvars,
            "polynomials live in different rings"
        );
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            *terms.entry(m.clone()).or_insert(0.0) += sign * c;
        }
        Polynomial {
            nvars: self.nvars,
            terms,
        }
        .pruned(PRUNE_RTOL)
    }

    fn product(&self, other: &Polynomial) -> Polynomial {
        assert_eq!(
            self.nvars, other.nvars,
            "polynomials live in different rings"
        );
        let mut terms: BTreeMap<Monomial, f64> = BTreeMap::new();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                *terms.entry(a.mul(b)).or_insert(0.0) += ca * cb;
            }
        }
        Polynomial {
            nvars: self.nvars,
            terms,
        }
        .pruned(PRUNE_RTOL)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " {} ", if *c < 0.0 { '-' } else { '+' })?;
            } else if *c < 0.0 {
                write!(f, "-")?;
            }
            if m.is_one() {
                write!(f, "{}", c.abs())?;
            } else if c.abs() == 1.0 {
                write!(f, "{m}")?;
            } else {
                write!(f, "{}*{m}", c.abs())?;
            }
        }
        Ok(())
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<&Polynomial> for &Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: &Polynomial) -> Polynomial {
                $body(self, rhs)
            }
        }
        impl $trait<Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: Polynomial) -> Polynomial {
                $body(&self, &rhs)
            }
        }
        impl $trait<&Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: &Polynomial) -> Polynomial {
                $body(&self, rhs)
            }
        }
        impl $trait<Polynomial> for &Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: Polynomial) -> Polynomial {
                $body(self, &rhs)
            }
        }
    };
}

forward_binop!(Add, add, |a: &Polynomial, b: &Polynomial| a.combine(b, 1.0));
forward_binop!(Sub, sub, |a: &Polynomial, b: &Polynomial| a
    .combine(b, -1.0));
forward_binop!(Mul, mul, |a: &Polynomial, b: &Polynomial| a.product(b));

impl Mul<f64> for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: f64) -> Polynomial {
        self.scale(rhs)
    }
}

impl Mul<f64> for Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: f64) -> Polynomial {
        self.scale(rhs)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(n: usize, i: usize) -> Polynomial {
        Polynomial::var(n, i)
    }

    #[test]
    fn constant_evaluates_to_itself() {
        let p = Polynomial::constant(3, 1.0);
        assert_eq!(p.eval(&[0.3, -2.0, 7.0]).unwrap(), 1.0);
    }

    #[test]
    fn eval_rejects_wrong_dimension() {
        let p = x(2, 0);
        assert!(p.eval(&[1.0]).is_err());
    }

    #[test]
    fn zero_polynomial_has_no_terms() {
        let p = x(2, 0) - x(2, 0);
        assert!(p.is_zero());
        assert_eq!(p.degree(), 0);
    }

    #[test]
    fn gradient_and_hessian_of_sum_of_squares() {
        let p = &x(2, 0) * &x(2, 0) + &x(2, 1) * &x(2, 1);
        let g = p.gradient();
        assert_eq!(g[0], x(2, 0).scale(2.0));
        assert_eq!(g[1], x(2, 1).scale(2.0));
        let h = p.hessian();
        for i in 0..2 {
            for j in 0..2 {
                let expected = if i == j { 2.0 } else { 0.0 };
                assert_eq!(h.get(i, j).eval(&[0.5, 0.1]).unwrap(), expected);
            }
        }
    }

    #[test]
    fn saddle_hessian_eigenvalues() {
        // x1*x3 - x2^2 has constant Hessian with H13 = 1, H22 = -2.
        let p = &x(3, 0) * &x(3, 2) - &x(3, 1) * &x(3, 1);
        let h = p.hessian().eval(&[0.2, -1.0, 3.0]).unwrap();
        let mut eig: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        let expected = [-2.0, -1.0, 1.0];
        for (a, b) in eig.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn pruning_drops_relative_noise() {
        let p = Polynomial::from_terms(1, vec![(vec![0], 1.0), (vec![1], 1e-14)]).unwrap();
        let q = p.pruned(PRUNE_RTOL);
        assert_eq!(q.num_terms(), 1);
    }

    #[test]
    fn display_is_readable() {
        let p = Polynomial::from_terms(2, vec![(vec![0, 0], 1.0), (vec![1, 1], -1.0)]).unwrap();
        assert_eq!(p.to_string(), "1 - x1*x2");
    }
}
