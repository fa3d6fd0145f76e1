mod common;

use common::strategies;
use common::*;
use nalgebra::DMatrix;
use pmo_core::moment::{
    block_pattern, localizing_block, localizing_scalar, moment_matrix, riesz, scalar_pattern,
    tms_from_atoms, AtomicMeasure, Tms,
};
use pmo_core::polyalg::{MonomialBasis, PolyMatrix, Polynomial};
use proptest::prelude::*;

fn random_tms(n: usize, order: u32, values: &[f64]) -> Tms {
    Tms::new(n, order, values.to_vec()).unwrap()
}

fn tms_len(n: usize, order: u32) -> usize {
    oracle_basis(n, order).len()
}

/// `Σ_γ q_γ · (y_{α+β+γ})_{α,β}` over `[x]_t`, built entry by entry.
fn shifted_oracle(y: &Tms, q: &Polynomial, t: u32) -> DMatrix<f64> {
    let b = oracle_basis(y.nvars(), t);
    let mut out = DMatrix::zeros(b.len(), b.len());
    for (m, coeff) in q.terms() {
        for (i, a) in b.iter().enumerate() {
            for (j, bb) in b.iter().enumerate() {
                let e: Vec<u32> = (0..y.nvars()).map(|v| a[v] + bb[v] + m.exps()[v]).collect();
                out[(i, j)] += coeff * y.get_exps(&e);
            }
        }
    }
    out
}

fn outer(v: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(v.len(), v.len(), |i, j| v[i] * v[j])
}

fn numeric_rank(m: &DMatrix<f64>, rel: f64) -> usize {
    let s = m.singular_values();
    let top = s.max();
    s.iter().filter(|&&v| v > rel * top).count()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn displayed_localizing_matrices(values in prop::collection::vec(-1.0f64..1.0, 15)) {
        let y = random_tms(2, 4, &values);
        let g = displayed_g();
        let [l11, l12, l22] = displayed_blocks(&y);
        prop_assert!((localizing_scalar(&y, g.get(0, 0), 2).unwrap() - &l11).amax() <= 1e-12);
        prop_assert!((localizing_scalar(&y, g.get(0, 1), 2).unwrap() - &l12).amax() <= 1e-12);
        prop_assert!((localizing_scalar(&y, g.get(1, 1), 2).unwrap() - &l22).amax() <= 1e-12);

        let full = localizing_block(&y, &g, 2).unwrap();
        let mut expect = DMatrix::zeros(6, 6);
        expect.view_mut((0, 0), (3, 3)).copy_from(&l11);
        expect.view_mut((0, 3), (3, 3)).copy_from(&l12);
        expect.view_mut((3, 0), (3, 3)).copy_from(&l12);
        expect.view_mut((3, 3), (3, 3)).copy_from(&l22);
        prop_assert!((&full - &expect).amax() <= 1e-12);

        let index = MonomialBasis::new(2, 4);
        let pattern = block_pattern(&g, 2, &index).unwrap().eval(y.values());
        prop_assert!((&pattern - &expect).amax() <= 1e-12);
        let scalar = scalar_pattern(g.get(0, 1), 1, &index).unwrap().eval(y.values());
        prop_assert!((&scalar - &l12).amax() <= 1e-12);
    }

    #[test]
    fn localizing_equals_shifted_sum(
        (q, values, n) in (1usize..=3).prop_flat_map(|n| (strategies::poly(n, 3, 4), prop::collection::vec(-1.0f64..1.0, tms_len(n, 6)), Just(n))),
    ) {
        let y = random_tms(n, 6, &values);
        let t = 3 - q.degree().div_ceil(2);
        let lib = localizing_scalar(&y, &q, 3).unwrap();
        prop_assert!((&lib - shifted_oracle(&y, &q, t)).amax() <= 1e-12);
    }

    #[test]
    fn riesz_matches_moment_matrix(
        (p, q, values) in (1usize..=3).prop_flat_map(|n| (strategies::poly(n, 2, 4), strategies::poly(n, 2, 4), prop::collection::vec(-1.0f64..1.0, tms_len(n, 4)))),
    ) {
        let n = p.nvars();
        let y = random_tms(n, 4, &values);
        let basis = MonomialBasis::new(n, 2);
        let vec_of = |r: &Polynomial| nalgebra::DVector::from_iterator(basis.len(), basis.iter().map(|m| r.coeff(m)));
        let mk = moment_matrix(&y, 2).unwrap();
        let lhs = riesz(&y, &(&p * &q)).unwrap();
        let rhs = vec_of(&p).dot(&(&mk * vec_of(&q)));
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
    }

    #[test]
    fn riesz_is_linear(
        (p, q, values) in (1usize..=3).prop_flat_map(|n| (strategies::poly(n, 4, 5), strategies::poly(n, 4, 5), prop::collection::vec(-1.0f64..1.0, tms_len(n, 4)))),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
    ) {
        let y = random_tms(p.nvars(), 4, &values);
        let lhs = riesz(&y, &(p.scale(a) + q.scale(b))).unwrap();
        let rhs = a * riesz(&y, &p).unwrap() + b * riesz(&y, &q).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn atomic_measures_give_psd_matrices(
        (atoms, w) in (1usize..=4).prop_flat_map(|r| (prop::collection::vec(prop::collection::vec(-0.7f64..0.7, 2), r), prop::collection::vec(0.1f64..1.0, r))),
    ) {
        let total: f64 = w.iter().sum();
        let w: Vec<f64> = w.iter().map(|v| v / total).collect();
        let mu = AtomicMeasure::new(atoms, w).unwrap();
        let g = PolyMatrix::diag(2, &[ball(2), c(2, 1.0) - &x(2, 0) * &x(2, 0)]);
        for k in 1..=3 {
            let y = tms_from_atoms(&mu, 2 * k);
            let mk = moment_matrix(&y, k).unwrap();
            prop_assert!(mk.symmetric_eigenvalues().min() >= -1e-10);
            let lg = localizing_block(&y, &g, k).unwrap();
            prop_assert!(lg.symmetric_eigenvalues().min() >= -1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn dirac_moment_matrix_is_outer_product((u, k) in (1usize..=3, 1u32..=3).prop_flat_map(|(n, k)| (strategies::point(n), Just(k)))) {
        let y = tms_from_atoms(&AtomicMeasure::dirac(u.clone()), 2 * k);
        let v: Vec<f64> = oracle_basis(u.len(), k).iter().map(|e| power(&u, e)).collect();
        let mk = moment_matrix(&y, k).unwrap();
        prop_assert!((&mk - outer(&v)).amax() <= 1e-12);
    }

    #[test]
    fn dirac_riesz_is_evaluation((p, u) in (1usize..=3).prop_flat_map(|n| (strategies::poly(n, 4, 6), strategies::point(n)))) {
        let y = tms_from_atoms(&AtomicMeasure::dirac(u.clone()), 4);
        let v = p.eval(&u).unwrap();
        prop_assert!((riesz(&y, &p).unwrap() - v).abs() <= 1e-12 * (1.0 + v.abs()));
    }

    #[test]
    fn distinct_atoms_give_full_rank(
        (atoms, w) in (1usize..=6).prop_flat_map(|r| (prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 2), r), prop::collection::vec(0.1f64..1.0, r))),
    ) {
        let separated = atoms.iter().enumerate().all(|(i, a)| {
            atoms[..i].iter().all(|b| max_abs_diff(a, b) > 0.1)
        });
        prop_assume!(separated);
        let total: f64 = w.iter().sum();
        let w: Vec<f64> = w.iter().map(|v| v / total).collect();
        let r = atoms.len();
        let mu = AtomicMeasure::new(atoms, w).unwrap();
        let y = tms_from_atoms(&mu, 6);
        prop_assert_eq!(numeric_rank(&moment_matrix(&y, 3).unwrap(), 1e-8), r);
    }
}

#[test]
fn dirac_localizing_block_is_kronecker() {
    let u = [0.3, -0.4];
    let g = displayed_g();
    let y = tms_from_atoms(&AtomicMeasure::dirac(u.to_vec()), 4);
    let v: Vec<f64> = oracle_basis(2, 1).iter().map(|e| power(&u, e)).collect();
    let expect = g.eval(&u).unwrap().kronecker(&outer(&v));
    assert!((localizing_block(&y, &g, 2).unwrap() - expect).amax() < 1e-14);
}

#[test]
fn constant_one_localizes_to_moment_matrix() {
    let values: Vec<f64> = (0..tms_len(2, 4))
        .map(|i| (i as f64 * 0.37).sin())
        .collect();
    let y = random_tms(2, 4, &values);
    let one = c(2, 1.0);
    assert_eq!(
        localizing_scalar(&y, &one, 2).unwrap(),
        moment_matrix(&y, 2).unwrap()
    );
    let g = PolyMatrix::identity(1, 2);
    assert_eq!(
        localizing_block(&y, &g, 2).unwrap(),
        moment_matrix(&y, 2).unwrap()
    );
}

#[test]
fn univariate_moment_matrix() {
    let y = random_tms(1, 2, &[1.0, 0.0, 1.0]);
    assert_eq!(moment_matrix(&y, 1).unwrap(), DMatrix::identity(2, 2));
}

#[test]
fn hankel_structure() {
    let values: Vec<f64> = (0..tms_len(2, 4)).map(|i| (i as f64 * 1.3).cos()).collect();
    let y = random_tms(2, 4, &values);
    let b = oracle_basis(2, 2);
    let mk = moment_matrix(&y, 2).unwrap();
    for (i, a) in b.iter().enumerate() {
        for (j, bb) in b.iter().enumerate() {
            let e = [a[0] + bb[0], a[1] + bb[1]];
            assert_eq!(mk[(i, j)], y.get_exps(&e));
        }
    }
}

#[test]
fn two_point_symmetric_measure() {
    let mu = AtomicMeasure::new(vec![vec![1.0], vec![-1.0]], vec![0.5, 0.5]).unwrap();
    let y = tms_from_atoms(&mu, 4);
    assert!(max_abs_diff(y.values(), &[1.0, 0.0, 1.0, 0.0, 1.0]) < 1e-15);
}

#[test]
fn atom_at_origin() {
    let y = tms_from_atoms(&AtomicMeasure::dirac(vec![0.0; 3]), 4);
    assert_eq!(y.values()[0], 1.0);
    assert!(y.values()[1..].iter().all(|&v| v == 0.0));
}

#[test]
fn riesz_of_one_is_mass() {
    let mu = AtomicMeasure::new(vec![vec![0.2, 0.1], vec![-0.5, 0.9]], vec![0.25, 0.75]).unwrap();
    let y = tms_from_atoms(&mu, 2);
    assert!((riesz(&y, &c(2, 1.0)).unwrap() - 1.0).abs() < 1e-15);
}

#[test]
fn degree_overflow_is_rejected() {
    let y = random_tms(2, 2, &vec![0.0; tms_len(2, 2)]);
    assert!(riesz(&y, &(&x(2, 0) * &(&x(2, 0) * &x(2, 0)))).is_err());
    assert!(moment_matrix(&y, 2).is_err());
    assert!(localizing_scalar(&y, &(&x(2, 0) * &(&x(2, 0) * &x(2, 0))), 1).is_err());
    assert!(localizing_block(&y, &displayed_g(), 2).is_err());
}

#[test]
fn invalid_measures_are_rejected() {
    assert!(AtomicMeasure::new(vec![vec![0.0]], vec![0.5]).is_err());
    assert!(AtomicMeasure::new(vec![vec![0.0], vec![1.0]], vec![1.5, -0.5]).is_err());
    assert!(Tms::new(2, 2, vec![0.0; 3]).is_err());
}
