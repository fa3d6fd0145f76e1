#![allow(dead_code)]

use nalgebra::DMatrix;
use pmo_core::moment::Tms;
use pmo_core::{PolyMatrix, Polynomial};

pub fn x(n: usize, i: usize) -> Polynomial {
    Polynomial::var(n, i)
}

pub fn c(n: usize, v: f64) -> Polynomial {
    Polynomial::constant(n, v)
}

pub fn poly(n: usize, terms: &[(&[u32], f64)]) -> Polynomial {
    Polynomial::from_terms(n, terms.iter().map(|(e, c)| (e.to_vec(), *c))).unwrap()
}

/// `1 − ‖x‖²`.
pub fn ball(n: usize) -> Polynomial {
    (0..n).fold(c(n, 1.0), |acc, i| acc - &x(n, i) * &x(n, i))
}

/// Block-diagonal `diag(1 − ‖x‖², [[x1, x2], [x2, x3]])`.
pub fn hankel_ball_g() -> PolyMatrix {
    let n = 3;
    PolyMatrix::from_fn(3, n, |i, j| match (i, j) {
        (0, 0) => ball(n),
        (1, 1) => x(n, 0),
        (1, 2) => x(n, 1),
        (2, 2) => x(n, 2),
        _ => Polynomial::zero(n),
    })
}

/// Objective `x1x3 − x2² + x1 + x3` with the Hankel/ball constraint.
pub fn sucex2() -> (Polynomial, PolyMatrix) {
    let n = 3;
    let f = &x(n, 0) * &x(n, 2) - &x(n, 1) * &x(n, 1) + x(n, 0) + x(n, 2);
    (f, hankel_ball_g())
}

pub fn exmdet_i() -> (Polynomial, PolyMatrix) {
    let n = 3;
    let f = x(n, 0).scale(3.0) + x(n, 1).scale(2.0);
    let sq = (0..n).fold(Polynomial::zero(n), |acc, i| acc + &x(n, i) * &x(n, i));
    let g22 = &x(n, 0) * &x(n, 0) - &x(n, 1) * &x(n, 1) - &sq * &sq;
    let g = PolyMatrix::from_fn(2, n, |i, j| match (i, j) {
        (0, 0) => x(n, 0),
        (0, 1) => x(n, 2),
        _ => g22.clone(),
    });
    (f, g)
}

pub fn exmdet_ii() -> (Polynomial, PolyMatrix) {
    let n = 3;
    let f = &x(n, 0) * &x(n, 2) - &x(n, 1) * &x(n, 1);
    (f, hankel_ball_g())
}

pub fn exmdet_iii() -> (Polynomial, PolyMatrix) {
    let n = 4;
    let p = |e: [u32; 4], v: f64| poly(n, &[(&e, v)]);
    let f = p([4, 2, 0, 0], 1.0)
        + p([2, 4, 0, 0], 1.0)
        + p([0, 0, 6, 0], 1.0)
        + p([0, 0, 0, 6], 1.0)
        + p([2, 2, 2, 0], -3.0)
        + p([6, 0, 0, 0], 0.01)
        + p([0, 6, 0, 0], 0.01)
        + p([0, 0, 6, 0], 0.01);
    let g = PolyMatrix::from_fn(2, n, |i, j| match (i, j) {
        (0, 0) => c(n, 1.0) - &x(n, 3) * &x(n, 3),
        (0, 1) => &x(n, 2) * &x(n, 3),
        _ => ball(n),
    });
    (f, g)
}

pub fn elliptope() -> PolyMatrix {
    let n = 3;
    PolyMatrix::from_fn(3, n, |i, j| match (i, j) {
        (0, 1) => x(n, 0),
        (0, 2) => x(n, 1),
        (1, 2) => x(n, 2),
        _ => c(n, 1.0),
    })
}

/// The SOS-convex instance with optimal value ≈ 1.1321.
pub fn sosconvex_example() -> (Polynomial, PolyMatrix) {
    let n = 3;
    let sq = |i: usize| &x(n, i) * &x(n, i);
    let mut f = (sq(0) * sq(0) + sq(1) * sq(1) + sq(2) * sq(2)).scale(1.0 / 3.0) + sq(0) * sq(1);
    for i in 0..n {
        let d = x(n, i) - c(n, 1.0);
        f = f + &d * &d;
    }
    let g = PolyMatrix::from_fn(3, n, |i, j| match (i, j) {
        (0, 0) => c(n, 2.0) - sq(0) - sq(2).scale(2.0),
        (0, 1) => c(n, 1.0) + &x(n, 0) * &x(n, 1),
        (0, 2) => &x(n, 0) * &x(n, 2),
        (1, 1) => c(n, 2.0) - sq(1) - sq(0).scale(2.0),
        (1, 2) => c(n, 1.0) + &x(n, 1) * &x(n, 2),
        _ => c(n, 2.0) - sq(2) - sq(1).scale(2.0),
    });
    (f, g)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Exponent vectors of degree `≤ d` in graded order, descending lex within a
/// degree, built independently of the library enumeration.
pub fn oracle_basis(n: usize, d: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for deg in 0..=d {
        let mut level = Vec::new();
        let mut cur = vec![0u32; n];
        fill(&mut level, &mut cur, 0, deg);
        level.sort_by(|a, b| b.cmp(a));
        out.extend(level);
    }
    out
}

fn fill(out: &mut Vec<Vec<u32>>, cur: &mut Vec<u32>, pos: usize, left: u32) {
    if pos + 1 == cur.len() {
        cur[pos] = left;
        out.push(cur.clone());
        return;
    }
    if cur.is_empty() {
        if left == 0 {
            out.push(Vec::new());
        }
        return;
    }
    for e in 0..=left {
        cur[pos] = e;
        fill(out, cur, pos + 1, left - e);
    }
}

pub fn power(u: &[f64], e: &[u32]) -> f64 {
    u.iter().zip(e).map(|(x, &k)| x.powi(k as i32)).product()
}

fn y2(y: &Tms) -> impl Fn(u32, u32) -> f64 + '_ {
    move |a, b| y.get_exps(&[a, b])
}

fn from_rows(rows: [[f64; 3]; 3]) -> DMatrix<f64> {
    DMatrix::from_fn(3, 3, |i, j| rows[i][j])
}

/// The 2×2 matrix with entries `1 − x1x2`, `x1 + x2`, `x1² − x2²`.
pub fn displayed_g() -> PolyMatrix {
    let n = 2;
    PolyMatrix::from_fn(2, n, |i, j| match (i, j) {
        (0, 0) => c(n, 1.0) - &x(n, 0) * &x(n, 1),
        (0, 1) => x(n, 0) + x(n, 1),
        _ => &x(n, 0) * &x(n, 0) - &x(n, 1) * &x(n, 1),
    })
}

/// `L_{1−x1x2}`, `L_{x1+x2}`, `L_{x1²−x2²}` at order 2, written out entry by entry.
pub fn displayed_blocks(y: &Tms) -> [DMatrix<f64>; 3] {
    let y = y2(y);
    let l11 = from_rows([
        [y(0, 0) - y(1, 1), y(1, 0) - y(2, 1), y(0, 1) - y(1, 2)],
        [y(1, 0) - y(2, 1), y(2, 0) - y(3, 1), y(1, 1) - y(2, 2)],
        [y(0, 1) - y(1, 2), y(1, 1) - y(2, 2), y(0, 2) - y(1, 3)],
    ]);
    let l12 = from_rows([
        [y(1, 0) + y(0, 1), y(2, 0) + y(1, 1), y(1, 1) + y(0, 2)],
        [y(2, 0) + y(1, 1), y(3, 0) + y(2, 1), y(2, 1) + y(1, 2)],
        [y(1, 1) + y(0, 2), y(2, 1) + y(1, 2), y(1, 2) + y(0, 3)],
    ]);
    let l22 = from_rows([
        [y(2, 0) - y(0, 2), y(3, 0) - y(1, 2), y(2, 1) - y(0, 3)],
        [y(3, 0) - y(1, 2), y(4, 0) - y(2, 2), y(3, 1) - y(1, 3)],
        [y(2, 1) - y(0, 3), y(3, 1) - y(1, 3), y(2, 2) - y(0, 4)],
    ]);
    [l11, l12, l22]
}

pub mod strategies {
    use super::*;
    use proptest::prelude::*;

    /// Polynomial in `n` variables with up to `terms` terms of degree `≤ deg`.
    pub fn poly(n: usize, deg: u32, terms: usize) -> impl Strategy<Value = Polynomial> {
        prop::collection::vec((prop::collection::vec(0..=deg, n), -2.0f64..2.0), 0..=terms)
            .prop_map(move |ts| {
                let ts = ts.into_iter().filter(|(e, _)| e.iter().sum::<u32>() <= deg);
                Polynomial::from_terms(n, ts).unwrap()
            })
    }

    /// Integer coefficients in `[−3, 3]`, so that arithmetic is exact.
    pub fn int_poly(n: usize, deg: u32, terms: usize) -> impl Strategy<Value = Polynomial> {
        prop::collection::vec((prop::collection::vec(0..=deg, n), -3i32..=3), 0..=terms).prop_map(
            move |ts| {
                let ts = ts
                    .into_iter()
                    .filter(|(e, _)| e.iter().sum::<u32>() <= deg)
                    .map(|(e, c)| (e, c as f64));
                Polynomial::from_terms(n, ts).unwrap()
            },
        )
    }

    pub fn poly_matrix(
        m: usize,
        n: usize,
        deg: u32,
        terms: usize,
    ) -> impl Strategy<Value = PolyMatrix> {
        prop::collection::vec(poly(n, deg, terms), m * (m + 1) / 2).prop_map(move |entries| {
            let mut it = entries.into_iter();
            let mut g = PolyMatrix::zeros(m, n);
            for i in 0..m {
                for j in i..m {
                    g.set(i, j, it.next().unwrap());
                }
            }
            g
        })
    }

    pub fn int_poly_matrix(
        m: usize,
        n: usize,
        deg: u32,
        terms: usize,
    ) -> impl Strategy<Value = PolyMatrix> {
        prop::collection::vec(int_poly(n, deg, terms), m * m).prop_map(move |entries| {
            let mut g = PolyMatrix::zeros(m, n);
            for i in 0..m {
                for j in i..m {
                    g.set(i, j, entries[i * m + j].clone());
                }
            }
            g
        })
    }

    pub fn point(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-1.0f64..1.0, n)
    }

    pub fn symmetric(m: usize) -> impl Strategy<Value = nalgebra::DMatrix<f64>> {
        prop::collection::vec(-1.0f64..1.0, m * m).prop_map(move |v| {
            let a = nalgebra::DMatrix::from_vec(m, m, v);
            (&a + a.transpose()) * 0.5
        })
    }
}
