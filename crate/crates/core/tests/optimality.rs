mod common;

use common::strategies;
use common::*;
use nalgebra::{DMatrix, DVector};
use pmo_core::linalg::min_eigenvalue;
use pmo_core::optimality::{
    audit, check_ndc, check_scc, check_sosc, gradient_at, h_term, kernel_basis, ndc_matrix,
    schur_reduce, solve_multiplier, sym_dim, RANK_TOL,
};
use pmo_core::polyalg::{PolyMatrix, Polynomial};
use pmo_core::Error;
use proptest::prelude::*;

fn diag_x() -> PolyMatrix {
    PolyMatrix::diag(2, &[x(2, 0), x(2, 1)])
}

fn ones_kernel_projector() -> DMatrix<f64> {
    DMatrix::identity(3, 3) - DMatrix::from_element(3, 3, 1.0 / 3.0)
}

/// `G(x) = R(x) − R(u) + VVᵀ`, so that `G(u) = VVᵀ`.
fn anchored(r: &PolyMatrix, u: &[f64], v: &DMatrix<f64>) -> PolyMatrix {
    let ru = r.eval(u).unwrap();
    let p = v * v.transpose();
    let n = r.nvars();
    PolyMatrix::from_fn(r.size(), n, |i, j| {
        r.get(i, j) - c(n, ru[(i, j)]) + c(n, p[(i, j)])
    })
}

fn well_conditioned_rank(v: &DMatrix<f64>) -> bool {
    v.ncols() == 0 || v.clone().singular_values().min() > 0.2
}

/// Basis of `S^d` as symmetric matrices.
fn sym_basis(d: usize) -> Vec<DMatrix<f64>> {
    let mut out = Vec::new();
    for i in 0..d {
        for j in i..d {
            let mut b = DMatrix::zeros(d, d);
            b[(i, j)] = 1.0;
            b[(j, i)] = 1.0;
            out.push(b);
        }
    }
    out
}

/// Least-squares stationarity solve over `Λ = E'ME'ᵀ` with its own basis.
fn oracle_multiplier(f: &Polynomial, g: &PolyMatrix, u: &[f64], e: &DMatrix<f64>) -> DMatrix<f64> {
    let basis = sym_basis(e.ncols());
    let grad = gradient_at(f, u).unwrap();
    let m = g.size();
    if basis.is_empty() {
        return DMatrix::zeros(m, m);
    }
    let cols: Vec<DVector<f64>> = basis
        .iter()
        .map(|b| g.grad_adjoint(u, &(e * b * e.transpose())).unwrap())
        .collect();
    let a = DMatrix::from_columns(&cols);
    let coef = a.svd(true, true).solve(&grad, 1e-10).unwrap();
    let mut lam = DMatrix::zeros(m, m);
    for (b, cf) in basis.iter().zip(coef.iter()) {
        lam += e * b * e.transpose() * *cf;
    }
    lam
}

fn random_orthogonal(d: usize, seed: &[f64]) -> DMatrix<f64> {
    let a = DMatrix::from_fn(d, d, |i, j| {
        seed[(i * d + j) % seed.len()] + if i == j { 0.5 } else { 0.0 }
    });
    a.qr().q()
}

#[test]
fn kernel_of_positive_definite_is_empty() {
    let g = PolyMatrix::identity(3, 2);
    let (r, e) = kernel_basis(&g, &[0.1, 0.2], RANK_TOL).unwrap();
    assert_eq!(r, 3);
    assert_eq!(e.ncols(), 0);
}

#[test]
fn kernel_of_elliptope_corner() {
    let (r, e) = kernel_basis(&elliptope(), &[1.0, 1.0, 1.0], RANK_TOL).unwrap();
    assert_eq!(r, 1);
    assert_eq!(e.ncols(), 2);
    assert!((&e * e.transpose() - ones_kernel_projector()).amax() < 1e-12);
}

#[test]
fn kernel_of_diagonal_at_origin() {
    let (r, e) = kernel_basis(&diag_x(), &[0.0, 0.0], RANK_TOL).unwrap();
    assert_eq!(r, 0);
    assert!((&e * e.transpose() - DMatrix::<f64>::identity(2, 2)).amax() < 1e-12);
}

#[test]
fn kernel_rejects_infeasible_point() {
    assert!(matches!(
        kernel_basis(&diag_x(), &[-0.5, 1.0], RANK_TOL),
        Err(Error::InfeasiblePoint { .. })
    ));
}

#[test]
fn ndc_examples() {
    assert!(!check_ndc(&diag_x(), &[0.0, 0.0], RANK_TOL).unwrap().0);
    let (ok, ev) = check_ndc(&elliptope(), &[1.0, 1.0, 1.0], RANK_TOL).unwrap();
    assert!(ok);
    assert_eq!((ev.rank, ev.required, ev.map_rank), (1, 3, 3));
    let (_, g) = exmdet_i();
    assert!(!check_ndc(&g, &[0.0; 3], RANK_TOL).unwrap().0);
}

#[test]
fn multiplier_vanishes_for_exmdet_ii() {
    let (f, g) = exmdet_ii();
    let m = solve_multiplier(&f, &g, &[0.0; 3], RANK_TOL).unwrap();
    assert!(m.lambda.amax() < 1e-12);
    assert!(m.residual < 1e-12);
}

#[test]
fn multiplier_forced_zero_in_interior() {
    let n = 2;
    let f = &x(n, 0) * &x(n, 0) + x(n, 1).scale(3.0);
    let g = PolyMatrix::diag(n, &[ball(n)]);
    let u = [0.2, -0.1];
    let m = solve_multiplier(&f, &g, &u, RANK_TOL).unwrap();
    assert_eq!(m.lambda, DMatrix::zeros(1, 1));
    assert!((m.residual - gradient_at(&f, &u).unwrap().norm()).abs() < 1e-14);
}

#[test]
fn multiplier_recovered_by_construction() {
    let g = elliptope();
    let u = [1.0, 1.0, 1.0];
    let (_, e) = kernel_basis(&g, &u, RANK_TOL).unwrap();
    let mm = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 0.7]);
    let lam = &e * mm * e.transpose();
    let f = g.contract(&lam).unwrap() + c(3, 3.0);
    let m = solve_multiplier(&f, &g, &u, RANK_TOL).unwrap();
    assert!(m.unique);
    assert!(m.residual <= 1e-8);
    assert!((&m.lambda - &lam).amax() <= 1e-8);
}

#[test]
fn scc_examples() {
    let (f, g) = exmdet_ii();
    let u = [0.0; 3];
    let m = solve_multiplier(&f, &g, &u, RANK_TOL).unwrap();
    assert!(!check_scc(&g, &u, &m.lambda, RANK_TOL).unwrap());

    let (f, g) = exmdet_iii();
    let u = [0.0; 4];
    let m = solve_multiplier(&f, &g, &u, RANK_TOL).unwrap();
    assert!(check_scc(&g, &u, &m.lambda, RANK_TOL).unwrap());

    let g = PolyMatrix::identity(2, 1);
    assert!(check_scc(&g, &[0.0], &DMatrix::zeros(2, 2), RANK_TOL).unwrap());
}

#[test]
fn sosc_examples() {
    let (f, g) = exmdet_iii();
    let u = [0.0; 4];
    let m = solve_multiplier(&f, &g, &u, RANK_TOL).unwrap();
    assert!(!check_sosc(&f, &g, &u, &m.lambda, RANK_TOL).unwrap().holds);

    let (f, g) = sucex2();
    let u = [0.0; 3];
    let m = solve_multiplier(&f, &g, &u, RANK_TOL).unwrap();
    let s = check_sosc(&f, &g, &u, &m.lambda, RANK_TOL).unwrap();
    assert!(s.holds, "{s:?}");

    let n = 2;
    let f = &x(n, 0) * &x(n, 0) + (&x(n, 1) * &x(n, 1)).scale(2.0) + &x(n, 0) * &x(n, 1);
    let g = PolyMatrix::identity(1, n);
    let s = check_sosc(&f, &g, &[0.0, 0.0], &DMatrix::zeros(1, 1), RANK_TOL).unwrap();
    assert!(s.holds);
    assert_eq!(s.tangent.ncols(), 2);
}

#[test]
fn schur_of_diagonal() {
    let n = 2;
    let g1 = c(n, 1.0) + &x(n, 0) * &x(n, 0);
    let g2 = x(n, 1);
    let g = PolyMatrix::diag(n, &[g1.clone(), g2.clone()]);
    let red = schur_reduce(&g, &[0.0, 0.0], RANK_TOL).unwrap();
    assert_eq!(red.permutation, vec![0, 1]);
    assert_eq!(red.p, g1);
    assert_eq!(red.t.size(), 1);
    assert_eq!(red.t.get(0, 0), &(&(&g1 * &g1) * &g2));
}

#[test]
fn schur_of_elliptope_corner() {
    let n = 3;
    let red = schur_reduce(&elliptope(), &[1.0, 1.0, 1.0], RANK_TOL).unwrap();
    assert_eq!(red.pivots(), &[0]);
    assert_eq!(red.p, c(n, 1.0));
    let t = &red.t;
    assert_eq!(t.get(0, 0), &(c(n, 1.0) - &x(n, 0) * &x(n, 0)));
    assert_eq!(t.get(0, 1), &(x(n, 2) - &x(n, 0) * &x(n, 1)));
    assert_eq!(t.get(1, 1), &(c(n, 1.0) - &x(n, 1) * &x(n, 1)));
}

#[test]
fn schur_without_pivots_keeps_g() {
    let red = schur_reduce(&diag_x(), &[0.0, 0.0], RANK_TOL).unwrap();
    assert_eq!(red.rank, 0);
    assert_eq!(red.t, diag_x());
    assert_eq!(red.p, c(2, 1.0));
}

#[test]
fn audit_verdicts() {
    let (f, g) = exmdet_i();
    assert_eq!(
        audit(&f, &g, &[0.0; 3]).unwrap().verdict(),
        (false, None, None)
    );
    let (f, g) = exmdet_ii();
    assert_eq!(
        audit(&f, &g, &[0.0; 3]).unwrap().verdict(),
        (true, Some(false), None)
    );
    let (f, g) = exmdet_iii();
    assert_eq!(
        audit(&f, &g, &[0.0; 4]).unwrap().verdict(),
        (true, Some(true), Some(false))
    );
    let (f, g) = sucex2();
    let rep = audit(&f, &g, &[0.0; 3]).unwrap();
    assert_eq!(rep.verdict(), (true, Some(true), Some(true)));
    let red = rep.reduced.expect("reduced check");
    assert!(red.consistent(true), "{red:?}");
}

#[test]
fn audit_interior_minimum() {
    let n = 2;
    let f = &x(n, 0) * &x(n, 0) + &x(n, 1) * &x(n, 1);
    let g = PolyMatrix::diag(n, &[ball(n)]);
    assert_eq!(
        audit(&f, &g, &[0.0, 0.0]).unwrap().verdict(),
        (true, Some(true), Some(true))
    );
}

#[test]
fn audit_elliptope_corner() {
    let g = elliptope();
    let f = x(3, 0) + x(3, 1) + x(3, 2);
    let rep = audit(&f, &g, &[1.0, 1.0, 1.0]).unwrap();
    assert!(rep.ndc);
    assert_eq!(rep.rank, 1);
    let (det, _) = g.det_adjugate().unwrap();
    assert!(gradient_at(&det, &[1.0, 1.0, 1.0]).unwrap().norm() <= 1e-8);
}

#[test]
fn audit_rejects_infeasible_point() {
    let (f, g) = sucex2();
    assert!(matches!(
        audit(&f, &g, &[2.0, 0.0, 0.0]),
        Err(Error::InfeasiblePoint { .. })
    ));
}

/// `(G, f, u)` with `G(u) = VVᵀ` of rank `r`.
fn instance() -> impl Strategy<Value = (PolyMatrix, Polynomial, Vec<f64>, DMatrix<f64>)> {
    (1usize..=3, 2usize..=3)
        .prop_flat_map(|(n, m)| (Just(n), Just(m), 0..=m))
        .prop_flat_map(|(n, m, r)| {
            (
                strategies::poly_matrix(m, n, 2, 3),
                strategies::poly(n, 3, 5),
                strategies::point(n),
                prop::collection::vec(-1.0f64..1.0, m * r)
                    .prop_map(move |v| DMatrix::from_vec(m, r, v)),
            )
        })
        .prop_map(|(r, f, u, v)| (anchored(&r, &u, &v), f, u, v))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn report_invariants((g, q, u, v) in instance(), seed in prop::collection::vec(-1.0f64..1.0, 9)) {
        prop_assume!(well_conditioned_rank(&v));
        let (r, e) = kernel_basis(&g, &u, RANK_TOL).unwrap();
        prop_assert_eq!(r, v.ncols());
        // f = ⟨Λ₀, G⟩ + q − ∇q(u)·x makes u a KKT point with multiplier Λ₀ ⪰ 0.
        let d = e.ncols();
        let w = DMatrix::from_fn(d, d, |i, j| seed[(3 * i + j) % 9]);
        let lam0 = &e * (&w * w.transpose()) * e.transpose();
        let n = g.nvars();
        let gq = gradient_at(&q, &u).unwrap();
        let lin = (0..n).fold(Polynomial::zero(n), |acc, i| acc + x(n, i).scale(gq[i]));
        let f = g.contract(&lam0).unwrap() + q - lin;

        let rep = audit(&f, &g, &u).unwrap();
        let e = &rep.kernel;
        let gu = g.eval(&u).unwrap();
        prop_assert!((e.transpose() * e - DMatrix::<f64>::identity(e.ncols(), e.ncols())).amax() <= 1e-10);
        prop_assert!((&gu * e).amax() <= 1e-8 * (1.0 + gu.amax()));
        let lam = &rep.multiplier.lambda;
        prop_assert!(lam.dot(&gu).abs() <= 1e-8 * (1.0 + lam.norm() * gu.norm()));
        prop_assert!(rep.multiplier.residual <= 1e-8 * (1.0 + lam0.norm()));
        if rep.ndc {
            prop_assert!(min_eigenvalue(lam) >= -1e-8 * (1.0 + lam.norm()));
            prop_assert!((lam - &lam0).amax() <= 1e-8 * (1.0 + lam0.amax()));
        }
    }

    #[test]
    fn ndc_map_matches_direct_assembly((g, _f, u, v) in instance(), seed in prop::collection::vec(-1.0f64..1.0, 9)) {
        prop_assume!(well_conditioned_rank(&v));
        let (_, e) = kernel_basis(&g, &u, RANK_TOL).unwrap();
        let d = e.ncols();
        let map = ndc_matrix(&g, &u, &e).unwrap();
        prop_assert_eq!(map.ncols(), sym_dim(d));
        let s = DMatrix::from_fn(d, d, |i, j| seed[(i + j) % 9]);
        let via_map = &map * pmo_core::linalg::svec(&s);
        for i in 0..g.nvars() {
            let mut h = vec![0.0; g.nvars()];
            h[i] = 1.0;
            let direct = (e.transpose() * g.grad_apply(&u, &h).unwrap() * &e).dot(&s);
            prop_assert!((via_map[i] - direct).abs() <= 1e-12 * (1.0 + direct.abs()));
        }
    }

    #[test]
    fn multiplier_independent_of_kernel_basis((g, f, u, v) in instance(), seed in prop::collection::vec(-1.0f64..1.0, 9)) {
        prop_assume!(well_conditioned_rank(&v));
        let (ndc, _) = check_ndc(&g, &u, RANK_TOL).unwrap();
        prop_assume!(ndc);
        let lib = solve_multiplier(&f, &g, &u, RANK_TOL).unwrap();
        prop_assert!(lib.unique);
        let (_, e) = kernel_basis(&g, &u, RANK_TOL).unwrap();
        let rotated = &e * random_orthogonal(e.ncols(), &seed);
        let other = oracle_multiplier(&f, &g, &u, &rotated);
        prop_assert!((&lib.lambda - &other).norm() <= 1e-8 * (1.0 + other.norm()));
    }

    #[test]
    fn schur_identity_at_random_points((g, _f, u, v) in instance(), pts in prop::collection::vec(strategies::point(3), 5)) {
        prop_assume!(well_conditioned_rank(&v));
        let red = schur_reduce(&g, &u, RANK_TOL).unwrap();
        let r = red.rank;
        let m = g.size();
        let perm = &red.permutation;
        for pt in &pts {
            let x = &pt[..g.nvars()];
            let gx = g.eval(x).unwrap();
            let pg = DMatrix::from_fn(m, m, |i, j| gx[(perm[i], perm[j])]);
            let a = pg.view((0, 0), (r, r)).into_owned();
            let b = pg.view((0, r), (r, m - r)).into_owned();
            let p = if r == 0 { 1.0 } else { a.clone().lu().determinant() };
            prop_assume!(p.abs() > 1e-3);
            let adj = if r == 0 { a.clone() } else { a.clone().try_inverse().unwrap() * p };
            let mut q = DMatrix::zeros(m, m);
            q.view_mut((0, 0), (r, r)).copy_from(&(DMatrix::identity(r, r) * p));
            q.view_mut((0, r), (r, m - r)).copy_from(&(-(&adj * &b)));
            q.view_mut((r, r), (m - r, m - r)).copy_from(&(DMatrix::identity(m - r, m - r) * p));
            let lhs = q.transpose() * &pg * &q;
            let mut rhs = DMatrix::zeros(m, m);
            rhs.view_mut((0, 0), (r, r)).copy_from(&(&a * (p * p)));
            rhs.view_mut((r, r), (m - r, m - r)).copy_from(&red.t.eval(x).unwrap());
            prop_assert!((red.p.eval(x).unwrap() - p).abs() <= 1e-8 * (1.0 + p.abs()));
            prop_assert!((&lhs - &rhs).amax() <= 1e-8 * (1.0 + lhs.amax()));
        }
    }

    #[test]
    fn reduced_gradient_matches_finite_differences((g, _f, u, v) in instance(), seed in prop::collection::vec(-1.0f64..1.0, 9)) {
        prop_assume!(well_conditioned_rank(&v));
        let red = schur_reduce(&g, &u, RANK_TOL).unwrap();
        let d = red.t.size();
        let xm = DMatrix::from_fn(d, d, |i, j| seed[(i + j) % 9]);
        let sym = red.t.grad_adjoint(&u, &xm).unwrap();
        let h = 1e-6;
        for i in 0..g.nvars() {
            let mut a = u.clone();
            let mut b = u.clone();
            a[i] += h;
            b[i] -= h;
            let fd = (red.t.eval(&a).unwrap() - red.t.eval(&b).unwrap()).dot(&xm) / (2.0 * h);
            prop_assert!((sym[i] - fd).abs() <= 1e-4 * (1.0 + sym[i].abs()), "{} vs {}", sym[i], fd);
        }
    }

    #[test]
    fn lagrangian_hessian_matches_finite_differences((g, f, u, v) in instance(), seed in prop::collection::vec(-1.0f64..1.0, 9)) {
        prop_assume!(well_conditioned_rank(&v));
        let m = g.size();
        let lam = DMatrix::from_fn(m, m, |i, j| seed[(i + j) % 9]);
        let sosc = check_sosc(&f, &g, &u, &lam, RANK_TOL).unwrap();
        let curv = h_term(&g, &u, &lam, RANK_TOL).unwrap();
        let lagr = &sosc.hessian - curv;
        let grad_l = |x: &[f64]| gradient_at(&f, x).unwrap() - g.grad_adjoint(x, &lam).unwrap();
        let h = 1e-6;
        let scale = 1.0 + lagr.amax();
        for j in 0..g.nvars() {
            let mut a = u.clone();
            let mut b = u.clone();
            a[j] += h;
            b[j] -= h;
            let col = (grad_l(&a) - grad_l(&b)) / (2.0 * h);
            for i in 0..g.nvars() {
                prop_assert!((lagr[(i, j)] - col[i]).abs() <= 1e-4 * scale);
            }
        }
    }
}
