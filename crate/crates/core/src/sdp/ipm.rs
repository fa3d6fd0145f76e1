//! Homogeneous self-dual interior-point method with Nesterov–Todd scaling.
//!
//! The y-form problem is mapped to the conic pair
//! `min cᵀx  s.t.  Gx + s = h, Ax = b, s ⪰ 0` with `G = −[F_1 … F_N]`,
//! `h = F0`; the conic multiplier of `Ax = b` is `−ν`.

use std::collections::BTreeMap;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, LU};

use crate::linalg::min_eigenvalue;
use crate::sdp::problem::{add_sym, sparse_dot};
use crate::sdp::{SdpProblem, SdpSolution, SolveOptions, SolveStatus};

const STEP: f64 = 0.99;
const REFINE: usize = 1;
const STALL_STEP: f64 = 1e-10;
const STALL_LIMIT: usize = 5;
const BACKTRACK: usize = 30;

type Triplets = Vec<(usize, usize, f64)>;

struct BlockData {
    size: usize,
    f0: Triplets,
    vars: Vec<(usize, Triplets)>,
}

struct Data {
    n: usize,
    c: DVector<f64>,
    b: DVector<f64>,
    a: DMatrix<f64>,
    blocks: Vec<BlockData>,
}

impl Data {
    fn new(p: &SdpProblem) -> Self {
        let blocks = p
            .psd_blocks
            .iter()
            .map(|blk| {
                let mut by_var: BTreeMap<usize, Triplets> = BTreeMap::new();
                for &(var, i, j, v) in &blk.fj {
                    by_var.entry(var).or_default().push((i, j, v));
                }
                BlockData {
                    size: blk.size,
                    f0: blk.f0.clone(),
                    vars: by_var.into_iter().collect(),
                }
            })
            .collect();
        Self {
            n: p.vars,
            c: DVector::from_column_slice(&p.objective),
            b: DVector::from_column_slice(&p.eq.b),
            a: p.eq.dense(p.vars),
            blocks,
        }
    }

    fn sizes(&self) -> impl Iterator<Item = usize> + '_ {
        self.blocks.iter().map(|b| b.size)
    }

    fn zero_blocks(&self) -> Vec<DMatrix<f64>> {
        self.sizes().map(|n| DMatrix::zeros(n, n)).collect()
    }

    /// `Gx = −Σ x_j F_j`.
    fn g(&self, x: &DVector<f64>) -> Vec<DMatrix<f64>> {
        self.blocks
            .iter()
            .map(|blk| {
                let mut m = DMatrix::zeros(blk.size, blk.size);
                for (var, t) in &blk.vars {
                    let xv = x[*var];
                    if xv != 0.0 {
                        for &(i, j, v) in t {
                            add_sym(&mut m, i, j, -v * xv);
                        }
                    }
                }
                m
            })
            .collect()
    }

    /// `Gᵀz = −(Σ_b ⟨F_j, z_b⟩)_j`.
    fn gt(&self, z: &[DMatrix<f64>]) -> DVector<f64> {
        let mut out = DVector::zeros(self.n);
        for (blk, zb) in self.blocks.iter().zip(z) {
            for (var, t) in &blk.vars {
                out[*var] -= sparse_dot(t, zb);
            }
        }
        out
    }

    fn h(&self) -> Vec<DMatrix<f64>> {
        self.blocks
            .iter()
            .map(|blk| {
                let mut m = DMatrix::zeros(blk.size, blk.size);
                for &(i, j, v) in &blk.f0 {
                    add_sym(&mut m, i, j, v);
                }
                m
            })
            .collect()
    }

    fn hdot(&self, z: &[DMatrix<f64>]) -> f64 {
        self.blocks
            .iter()
            .zip(z)
            .map(|(blk, zb)| sparse_dot(&blk.f0, zb))
            .sum()
    }
}

#[derive(Clone)]
struct Dir {
    x: DVector<f64>,
    nu: DVector<f64>,
    z: Vec<DMatrix<f64>>,
}

impl Dir {
    fn axpy(&mut self, a: f64, other: &Dir) {
        self.x.axpy(a, &other.x, 1.0);
        self.nu.axpy(a, &other.nu, 1.0);
        for (z, o) in self.z.iter_mut().zip(&other.z) {
            *z += o * a;
        }
    }
}

/// NT scaling of one block: `s = R Λ Rᵀ`, `z = R⁻ᵀ Λ R⁻¹`.
#[derive(Clone)]
struct Nt {
    r: DMatrix<f64>,
    rit: DMatrix<f64>,
    lambda: DVector<f64>,
}

impl Nt {
    /// Scaling point of `s, z ≻ 0`; `None` if either is not positive definite.
    fn new(s: &DMatrix<f64>, z: &DMatrix<f64>) -> Option<Nt> {
        let l1 = Cholesky::new(sym(s))?.l();
        let l2 = Cholesky::new(sym(z))?.l();
        let svd = (l2.transpose() * &l1).svd(true, true);
        let u = svd.u?;
        let v = svd.v_t?.transpose();
        let lambda = svd.singular_values;
        if lambda.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
            return None;
        }
        let inv_sqrt = DMatrix::from_diagonal(&lambda.map(|l| 1.0 / l.sqrt()));
        Some(Nt {
            r: l1 * v * &inv_sqrt,
            rit: l2 * u * &inv_sqrt,
            lambda,
        })
    }

    fn identity(n: usize) -> Nt {
        Nt {
            r: DMatrix::identity(n, n),
            rit: DMatrix::identity(n, n),
            lambda: DVector::from_element(n, 1.0),
        }
    }
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

enum SchurFactor {
    Empty,
    Chol(Cholesky<f64, Dyn>),
    Lu(LU<f64, Dyn, Dyn>),
}

enum Reduced {
    Chol {
        m: Cholesky<f64, Dyn>,
        minv_at: DMatrix<f64>,
        s: SchurFactor,
    },
    Lu(LU<f64, Dyn, Dyn>),
}

/// Factorization of `[0 Aᵀ Gᵀ; A 0 0; G 0 −𝒲]` with `𝒲(X) = W X W`, `W = R Rᵀ`.
struct Kkt<'a> {
    data: &'a Data,
    w: Vec<DMatrix<f64>>,
    v: Vec<DMatrix<f64>>,
    red: Reduced,
}

impl<'a> Kkt<'a> {
    fn new(data: &'a Data, nt: &[Nt]) -> Option<Self> {
        let w: Vec<_> = nt.iter().map(|s| sym(&(&s.r * s.r.transpose()))).collect();
        let v: Vec<_> = nt
            .iter()
            .map(|s| sym(&(&s.rit * s.rit.transpose())))
            .collect();
        let n = data.n;
        let p = data.b.len();
        // H_jl = Σ_b ⟨F_j, V F_l V⟩.
        let mut h: DMatrix<f64> = DMatrix::zeros(n, n);
        for (blk, vb) in data.blocks.iter().zip(&v) {
            let sz = blk.size;
            for (li, (l, fl)) in blk.vars.iter().enumerate() {
                let mut fv = DMatrix::zeros(sz, sz);
                for &(i, j, val) in fl {
                    for k in 0..sz {
                        fv[(i, k)] += val * vb[(j, k)];
                    }
                    if i != j {
                        for k in 0..sz {
                            fv[(j, k)] += val * vb[(i, k)];
                        }
                    }
                }
                let t = vb * fv;
                for (j, fj) in &blk.vars[li..] {
                    let hv = sparse_dot(fj, &t);
                    h[(*j, *l)] += hv;
                    if j != l {
                        h[(*l, *j)] += hv;
                    }
                }
            }
        }
        if !h.iter().all(|x| x.is_finite()) {
            return None;
        }
        let red = Self::factor(&h, &data.a, n, p)?;
        Some(Self { data, w, v, red })
    }

    fn factor(h: &DMatrix<f64>, a: &DMatrix<f64>, n: usize, p: usize) -> Option<Reduced> {
        let mut m = h + a.transpose() * a;
        let mut chol = Cholesky::new(m.clone());
        if chol.is_none() {
            let scale = (0..n).map(|i| m[(i, i)].abs()).fold(1e-300, f64::max);
            for i in 0..n {
                m[(i, i)] += 1e-13 * scale;
            }
            chol = Cholesky::new(m);
        }
        if let Some(mc) = chol {
            let minv_at = mc.solve(&a.transpose());
            let s = if p == 0 {
                SchurFactor::Empty
            } else {
                let s = sym(&(a * &minv_at));
                match Cholesky::new(s.clone()) {
                    Some(c) => SchurFactor::Chol(c),
                    None => SchurFactor::Lu(s.lu()),
                }
            };
            return Some(Reduced::Chol { m: mc, minv_at, s });
        }
        let mut k = DMatrix::zeros(n + p, n + p);
        k.view_mut((0, 0), (n, n)).copy_from(h);
        k.view_mut((n, 0), (p, n)).copy_from(a);
        k.view_mut((0, n), (n, p)).copy_from(&a.transpose());
        let lu = k.lu();
        if !lu.is_invertible() {
            return None;
        }
        Some(Reduced::Lu(lu))
    }

    fn solve_reduced(
        &self,
        r1: &DVector<f64>,
        r2: &DVector<f64>,
    ) -> Option<(DVector<f64>, DVector<f64>)> {
        let a = &self.data.a;
        let n = self.data.n;
        let out = match &self.red {
            Reduced::Chol { m, minv_at, s } => {
                let r1p = r1 + a.transpose() * r2;
                let x0 = m.solve(&r1p);
                let nu = match s {
                    SchurFactor::Empty => DVector::zeros(0),
                    SchurFactor::Chol(c) => c.solve(&(a * &x0 - r2)),
                    SchurFactor::Lu(lu) => lu.solve(&(a * &x0 - r2))?,
                };
                let x = x0 - minv_at * &nu;
                (x, nu)
            }
            Reduced::Lu(lu) => {
                let mut rhs = DVector::zeros(n + r2.len());
                rhs.rows_mut(0, n).copy_from(r1);
                rhs.rows_mut(n, r2.len()).copy_from(r2);
                let sol = lu.solve(&rhs)?;
                (
                    sol.rows(0, n).into_owned(),
                    sol.rows(n, r2.len()).into_owned(),
                )
            }
        };
        if out.0.iter().chain(out.1.iter()).all(|v| v.is_finite()) {
            Some(out)
        } else {
            None
        }
    }

    fn solve_once(&self, bx: &DVector<f64>, by: &DVector<f64>, bz: &[DMatrix<f64>]) -> Option<Dir> {
        let vbzv: Vec<_> = self.v.iter().zip(bz).map(|(v, b)| v * b * v).collect();
        let r1 = bx + self.data.gt(&vbzv);
        let (x, nu) = self.solve_reduced(&r1, by)?;
        let gx = self.data.g(&x);
        let z = self
            .v
            .iter()
            .zip(gx.iter().zip(bz))
            .map(|(v, (g, b))| sym(&(v * (g - b) * v)))
            .collect();
        Some(Dir { x, nu, z })
    }

    fn apply(&self, d: &Dir) -> (DVector<f64>, DVector<f64>, Vec<DMatrix<f64>>) {
        let data = self.data;
        let k1 = data.a.transpose() * &d.nu + data.gt(&d.z);
        let k2 = &data.a * &d.x;
        let gx = data.g(&d.x);
        let k3 = gx
            .iter()
            .zip(self.w.iter().zip(&d.z))
            .map(|(g, (w, z))| g - w * z * w)
            .collect();
        (k1, k2, k3)
    }

    fn solve(&self, bx: &DVector<f64>, by: &DVector<f64>, bz: &[DMatrix<f64>]) -> Option<Dir> {
        let mut d = self.solve_once(bx, by, bz)?;
        for _ in 0..REFINE {
            let (k1, k2, k3) = self.apply(&d);
            let e3: Vec<_> = bz.iter().zip(&k3).map(|(b, k)| b - k).collect();
            let corr = self.solve_once(&(bx - k1), &(by - k2), &e3)?;
            d.axpy(1.0, &corr);
        }
        Some(d)
    }
}

/// Largest `α` with `diag(λ) + α D ⪰ 0`.
fn max_step(lambda: &DVector<f64>, d: &DMatrix<f64>) -> f64 {
    let n = lambda.len();
    if n == 0 {
        return f64::INFINITY;
    }
    let m = DMatrix::from_fn(n, n, |i, j| d[(i, j)] / (lambda[i] * lambda[j]).sqrt());
    let e = min_eigenvalue(&sym(&m));
    if e >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / e
    }
}

/// Solves `λ ∘ X = R` for symmetric `X`, where `∘` is the Jordan product.
fn lyap_div(lambda: &DVector<f64>, r: &DMatrix<f64>) -> DMatrix<f64> {
    let n = lambda.len();
    DMatrix::from_fn(n, n, |i, j| 2.0 * r[(i, j)] / (lambda[i] + lambda[j]))
}

fn jordan(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    (a * b + b * a) * 0.5
}

struct Iterate {
    x: DVector<f64>,
    nu: DVector<f64>,
    tau: f64,
    kappa: f64,
    s: Vec<DMatrix<f64>>,
    z: Vec<DMatrix<f64>>,
}

fn blocks_norm(m: &[DMatrix<f64>]) -> f64 {
    m.iter().map(|b| b.norm_squared()).sum::<f64>().sqrt()
}

/// Shifts `m` into the interior of the cone as in the usual cold start.
fn shift_into_cone(m: &mut [DMatrix<f64>]) {
    let min = m.iter().map(min_eigenvalue).fold(f64::INFINITY, f64::min);
    if !min.is_finite() {
        return;
    }
    let nrm = blocks_norm(m);
    let ts = -min;
    if ts >= -1e-8 * nrm.max(1.0) {
        for b in m.iter_mut() {
            let n = b.nrows();
            *b += DMatrix::<f64>::identity(n, n) * (1.0 + ts);
        }
    }
}

fn solution_from(
    prob: &SdpProblem,
    status: SolveStatus,
    y: DVector<f64>,
    z: Vec<DMatrix<f64>>,
    nu: DVector<f64>,
    iterations: usize,
) -> SdpSolution {
    let y: Vec<f64> = y.iter().copied().collect();
    let nu: Vec<f64> = nu.iter().copied().collect();
    let residuals = prob.residuals(&y, &z, &nu);
    SdpSolution {
        status,
        primal_objective: residuals.primal_objective,
        dual_objective: residuals.dual_objective,
        y,
        z,
        nu,
        residuals,
        iterations,
    }
}

pub(crate) fn solve_ipm(prob: &SdpProblem, opts: &SolveOptions) -> SdpSolution {
    let data = Data::new(prob);
    let n = data.n;
    let p = data.b.len();
    let nb = data.blocks.len();
    let fail = |status, iterations| {
        solution_from(
            prob,
            status,
            DVector::zeros(n),
            data.zero_blocks(),
            DVector::zeros(p),
            iterations,
        )
    };

    let h = data.h();
    let hnorm = blocks_norm(&h);
    let cnorm = data.c.norm();
    let bnorm = data.b.norm();
    let degree = data.sizes().sum::<usize>() as f64 + 1.0;

    // Cold start from the two least-squares problems with identity scaling.
    let ident: Vec<Nt> = data.sizes().map(Nt::identity).collect();
    let Some(k0) = Kkt::new(&data, &ident) else {
        return fail(SolveStatus::NumericalTrouble, 0);
    };
    let Some(primal) = k0.solve(&DVector::zeros(n), &data.b, &h) else {
        return fail(SolveStatus::NumericalTrouble, 0);
    };
    let Some(dual) = k0.solve(&-&data.c, &DVector::zeros(p), &data.zero_blocks()) else {
        return fail(SolveStatus::NumericalTrouble, 0);
    };
    drop(k0);
    let mut s0: Vec<_> = primal.z.iter().map(|z| -z).collect();
    let mut z0 = dual.z.clone();
    shift_into_cone(&mut s0);
    shift_into_cone(&mut z0);
    let mut it = Iterate {
        x: primal.x,
        nu: dual.nu,
        tau: 1.0,
        kappa: 1.0,
        s: s0,
        z: z0,
    };

    let mut best: Option<(f64, SdpSolution)> = None;
    let mut stalls = 0;
    let finish =
        |status: SolveStatus, it: &Iterate, iters: usize, best: Option<(f64, SdpSolution)>| {
            let z: Vec<_> = it.z.iter().map(|b| b / it.tau).collect();
            let current = solution_from(prob, status, &it.x / it.tau, z, -&it.nu / it.tau, iters);
            match best {
                Some((score, mut sol))
                    if status != SolveStatus::Optimal && score < current.residuals.max() =>
                {
                    sol.status = status;
                    sol.iterations = iters;
                    sol
                }
                _ => current,
            }
        };

    for iter in 0..=opts.max_iter {
        let (s, z) = (&it.s, &it.z);
        let gx = data.g(&it.x);

        // Homogeneous residuals.
        let hrx = -(data.a.transpose() * &it.nu) - data.gt(z);
        let rx = -&hrx + &data.c * it.tau;
        let hry = &data.a * &it.x;
        let ry = &hry - &data.b * it.tau;
        let hrz: Vec<_> = gx.iter().zip(s).map(|(g, s)| g + s).collect();
        let rz: Vec<_> = hrz.iter().zip(&h).map(|(a, h)| a - h * it.tau).collect();
        let cx = data.c.dot(&it.x);
        let by = data.b.dot(&it.nu);
        let hz = data.hdot(z);
        let rt = it.kappa + cx + by + hz;

        // User-level termination test on the normalized point.
        let y = &it.x / it.tau;
        let zn: Vec<_> = z.iter().map(|b| b / it.tau).collect();
        let nu = -&it.nu / it.tau;
        let ys: Vec<f64> = y.iter().copied().collect();
        let nus: Vec<f64> = nu.iter().copied().collect();
        let res = prob.residuals(&ys, &zn, &nus);
        if opts.verbose {
            eprintln!(
                "{iter:3} pobj {:+.8e} dobj {:+.8e} pres {:.2e} dres {:.2e} gap {:.2e} tau {:.2e} kappa {:.2e}",
                res.primal_objective, res.dual_objective, res.primal, res.dual, res.gap, it.tau, it.kappa
            );
        }
        if res.max() <= opts.tol {
            return finish(SolveStatus::Optimal, &it, iter, None);
        }
        if best.as_ref().map_or(true, |(b, _)| res.max() < *b) {
            let sol = solution_from(prob, SolveStatus::MaxIter, y.clone(), zn, nu, iter);
            best = Some((res.max(), sol));
        }

        // Infeasibility certificates.
        if hz + by < 0.0 {
            let pinf = hrx.norm() / cnorm.max(1.0) / -(hz + by);
            if pinf <= opts.tol {
                let scale = -(hz + by);
                let zc: Vec<_> = z.iter().map(|b| b / scale).collect();
                return solution_from(
                    prob,
                    SolveStatus::Infeasible,
                    DVector::zeros(n),
                    zc,
                    -&it.nu / scale,
                    iter,
                );
            }
        }
        if cx < 0.0 {
            let dinf = (hry.norm() / bnorm.max(1.0)).max(blocks_norm(&hrz) / hnorm.max(1.0)) / -cx;
            if dinf <= opts.tol {
                return solution_from(
                    prob,
                    SolveStatus::Unbounded,
                    &it.x / -cx,
                    data.zero_blocks(),
                    DVector::zeros(p),
                    iter,
                );
            }
        }
        if iter == opts.max_iter {
            break;
        }

        let mut nt = Vec::with_capacity(nb);
        for (sb, zb) in s.iter().zip(z) {
            match Nt::new(sb, zb) {
                Some(v) => nt.push(v),
                None => return finish(SolveStatus::NumericalTrouble, &it, iter, best),
            }
        }
        let Some(kkt) = Kkt::new(&data, &nt) else {
            return finish(SolveStatus::NumericalTrouble, &it, iter, best);
        };
        let Some(sol1) = kkt.solve(&-&data.c, &data.b, &h) else {
            return finish(SolveStatus::NumericalTrouble, &it, iter, best);
        };
        if opts.verbose {
            let (k1, k2, k3) = kkt.apply(&sol1);
            let e1 = (k1 + &data.c).norm();
            let e2 = (k2 - &data.b).norm();
            let e3 = blocks_norm(&k3.iter().zip(&h).map(|(a, b)| a - b).collect::<Vec<_>>());
            eprintln!("    kkt err {e1:.2e} {e2:.2e} {e3:.2e}");
        }
        let c1 = data.c.dot(&sol1.x) + data.b.dot(&sol1.nu) + data.hdot(&sol1.z);
        let denom = c1 - it.kappa / it.tau;

        let lam2: Vec<DMatrix<f64>> = nt
            .iter()
            .map(|b| DMatrix::from_diagonal(&b.lambda.map(|l| l * l)))
            .collect();
        let mu = (lam2.iter().map(|m| m.trace()).sum::<f64>() + it.tau * it.kappa) / degree;

        let mut sigma = 0.0;
        let mut affine: Option<(Vec<DMatrix<f64>>, Vec<DMatrix<f64>>, f64, f64)> = None;
        let mut step = None;
        for phase in 0..2 {
            let (eta, rc, rk): (f64, Vec<DMatrix<f64>>, f64) = match &affine {
                None => (1.0, lam2.iter().map(|m| -m).collect(), -it.tau * it.kappa),
                Some((dsa, dza, dta, dka)) => (
                    1.0 - sigma,
                    lam2.iter()
                        .zip(dsa.iter().zip(dza))
                        .map(|(l2, (ds, dz))| {
                            let n = l2.nrows();
                            -l2 - jordan(ds, dz) + DMatrix::<f64>::identity(n, n) * (sigma * mu)
                        })
                        .collect(),
                    -it.tau * it.kappa - dta * dka + sigma * mu,
                ),
            };
            let v: Vec<_> = nt
                .iter()
                .zip(&rc)
                .map(|(b, r)| lyap_div(&b.lambda, r))
                .collect();
            let bx = &rx * -eta;
            let byv = &ry * -eta;
            let bz: Vec<_> = rz
                .iter()
                .zip(nt.iter().zip(&v))
                .map(|(r, (b, v))| r * -eta - &b.r * v * b.r.transpose())
                .collect();
            let b4 = -eta * rt - rk / it.tau;
            let Some(sol2) = kkt.solve(&bx, &byv, &bz) else {
                return finish(SolveStatus::NumericalTrouble, &it, iter, best);
            };
            let c2 = data.c.dot(&sol2.x) + data.b.dot(&sol2.nu) + data.hdot(&sol2.z);
            let dtau = (b4 - c2) / denom;
            let mut d = sol2;
            d.axpy(dtau, &sol1);
            let dkappa = (rk - it.kappa * dtau) / it.tau;
            // The slack step is taken from the linearized primal equation so
            // that the primal residual decreases exactly as modelled.
            let gdx = data.g(&d.x);
            let ds: Vec<_> = rz
                .iter()
                .zip(gdx.iter().zip(&h))
                .map(|(r, (g, hb))| sym(&(r * -eta - g + hb * dtau)))
                .collect();
            let dzs: Vec<_> = nt
                .iter()
                .zip(&d.z)
                .map(|(b, dz)| sym(&(b.r.transpose() * dz * &b.r)))
                .collect();
            let dss: Vec<_> = nt
                .iter()
                .zip(&ds)
                .map(|(b, ds)| sym(&(b.rit.transpose() * ds * &b.rit)))
                .collect();

            let mut amax = f64::INFINITY;
            for (b, (dsb, dzb)) in nt.iter().zip(dss.iter().zip(&dzs)) {
                amax = amax
                    .min(max_step(&b.lambda, dsb))
                    .min(max_step(&b.lambda, dzb));
            }
            if dtau < 0.0 {
                amax = amax.min(-it.tau / dtau);
            }
            if dkappa < 0.0 {
                amax = amax.min(-it.kappa / dkappa);
            }
            if amax.is_nan() {
                return finish(SolveStatus::NumericalTrouble, &it, iter, best);
            }
            if phase == 0 {
                let a = amax.min(1.0);
                sigma = (1.0 - a).powi(3);
                affine = Some((dss, dzs, dtau, dkappa));
            } else {
                step = Some((d, ds, dtau, dkappa, (STEP * amax).min(1.0)));
            }
        }
        let (d, ds, dtau, dkappa, mut alpha) = step.expect("combined step computed");
        if !(alpha > 0.0) || !alpha.is_finite() {
            return finish(SolveStatus::NumericalTrouble, &it, iter, best);
        }
        stalls = if alpha < STALL_STEP { stalls + 1 } else { 0 };
        if stalls >= STALL_LIMIT {
            return finish(SolveStatus::NumericalTrouble, &it, iter, best);
        }

        // Rounding can push an eigenvalue across zero on very long steps;
        // back off until both iterates stay positive definite.
        let mut accepted = None;
        for _ in 0..BACKTRACK {
            let sn: Vec<_> =
                it.s.iter()
                    .zip(&ds)
                    .map(|(s, d)| sym(&(s + d * alpha)))
                    .collect();
            let zn: Vec<_> =
                it.z.iter()
                    .zip(&d.z)
                    .map(|(z, d)| sym(&(z + d * alpha)))
                    .collect();
            let pd = sn
                .iter()
                .chain(&zn)
                .all(|m| Cholesky::new(m.clone()).is_some());
            if pd {
                accepted = Some((sn, zn));
                break;
            }
            alpha *= 0.8;
        }
        let Some((sn, zn)) = accepted else {
            return finish(SolveStatus::NumericalTrouble, &it, iter, best);
        };
        it.x.axpy(alpha, &d.x, 1.0);
        it.nu.axpy(alpha, &d.nu, 1.0);
        it.tau += alpha * dtau;
        it.kappa += alpha * dkappa;
        it.s = sn;
        it.z = zn;
    }
    finish(SolveStatus::MaxIter, &it, opts.max_iter, best)
}
