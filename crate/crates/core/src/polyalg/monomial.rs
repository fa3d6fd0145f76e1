use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Exponent vector `α ∈ N^n`, ordered graded lexicographically with
/// `x1 > x2 > … > xn`, so `[x]_d = (1, x1, …, xn, x1², x1x2, …)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Monomial {
    exps: Vec<u32>,
}

impl Monomial {
    pub fn new(exps: Vec<u32>) -> Self {
        Self { exps }
    }

    pub fn one(nvars: usize) -> Self {
        Self {
            exps: vec![0; nvars],
        }
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut exps = vec![0; nvars];
        exps[i] = 1;
        Self { exps }
    }

    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    pub fn nvars(&self) -> usize {
        self.exps.len()
    }

    pub fn degree(&self) -> u32 {
        self.exps.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.nvars(), other.nvars());
        Monomial {
            exps: self
                .exps
                .iter()
                .zip(&other.exps)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// `other / self` when `self` divides `other`.
    pub fn quotient_of(&self, other: &Monomial) -> Option<Monomial> {
        let mut exps = Vec::with_capacity(self.nvars());
        for (a, b) in self.exps.iter().zip(&other.exps) {
            if a > b {
                return None;
            }
            exps.push(b - a);
        }
        Some(Monomial { exps })
    }

    pub fn eval(&self, u: &[f64]) -> f64 {
        self.exps
            .iter()
            .zip(u)
            .fold(1.0, |acc, (&e, &x)| acc * x.powi(e as i32))
    }

    /// `∂/∂x_i` as `(multiplier, monomial)`, or `None` when the result is 0.
    pub fn derivative(&self, i: usize) -> Option<(f64, Monomial)> {
        let e = self.exps[i];
        if e == 0 {
            return None;
        }
        let mut exps = self.exps.clone();
        exps[i] -= 1;
        Some((e as f64, Monomial { exps }))
    }

    /// Re-embeds into `total` variables, placing the current ones at `offset`.
    pub fn embed(&self, total: usize, offset: usize) -> Monomial {
        let mut exps = vec![0; total];
        exps[offset..offset + self.nvars()].copy_from_slice(&self.exps);
        Monomial { exps }
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.exps.cmp(&self.exps))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        let mut first = true;
        for (i, &e) in self.exps.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            write!(f, "x{}", i + 1)?;
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Number of monomials of degree at most `d` in `n` variables.
pub fn basis_len(n: usize, d: usize) -> usize {
    binomial(n + d, d)
}

/// All monomials of degree `<= degree` in graded lex order.
#[derive(Clone, Debug)]
pub struct MonomialBasis {
    nvars: usize,
    degree: u32,
    monomials: Vec<Monomial>,
    index: HashMap<Monomial, usize>,
}

impl MonomialBasis {
    pub fn new(nvars: usize, degree: u32) -> Self {
        let mut monomials = Vec::with_capacity(basis_len(nvars, degree as usize));
        let mut current = vec![0u32; nvars];
        for d in 0..=degree {
            push_degree(&mut monomials, &mut current, 0, d);
        }
        monomials.sort();
        let index = monomials
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();
        Self {
            nvars,
            degree,
            monomials,
            index,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn get(&self, i: usize) -> &Monomial {
        &self.monomials[i]
    }

    pub fn index_of(&self, m: &Monomial) -> Option<usize> {
        self.index.get(m).copied()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Monomial> {
        self.monomials.iter()
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    /// `[u]_d`, the basis evaluated at a point.
    pub fn eval(&self, u: &[f64]) -> Vec<f64> {
        self.monomials.iter().map(|m| m.eval(u)).collect()
    }
}

fn push_degree(out: &mut Vec<Monomial>, current: &mut Vec<u32>, pos: usize, remaining: u32) {
    let n = current.len();
    if n == 0 {
        if remaining == 0 {
            out.push(Monomial::new(Vec::new()));
        }
        return;
    }
    if pos == n - 1 {
        current[pos] = remaining;
        out.push(Monomial::new(current.clone()));
        current[pos] = 0;
        return;
    }
    for e in (0..=remaining).rev() {
        current[pos] = e;
        push_degree(out, current, pos + 1, remaining - e);
    }
    current[pos] = 0;
}
