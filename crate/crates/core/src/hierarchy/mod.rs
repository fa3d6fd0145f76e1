//! The matrix Moment-SOS hierarchy: solve relaxations of increasing order,
//! detect flat truncation, extract minimizers.

mod extract;
mod flat;

pub use extract::{extract_atoms, extract_atoms_with_tol, ATOM_TOL};
pub use flat::{
    check_flat_truncation, check_flat_truncation_with_gap, decided_rank, FlatTruncation, GAP_RATIO,
    RANK_TOL,
};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{min_eigenvalue, psd_clip};
use crate::moment::{AtomicMeasure, Tms};
use crate::polyalg::{PolyMatrix, Polynomial};
use crate::sdp::{
    assemble_moment_relaxation, default_certificate_tol, Backend, BuiltinBackend, QmCertificate,
    SolveOptions, SolveStatus,
};

#[derive(Clone, Debug)]
pub struct HierarchyOptions {
    /// First order; `None` means `max(⌈deg f/2⌉, d_G)`.
    pub k_min: Option<u32>,
    pub k_max: u32,
    pub rank_tol: f64,
    pub gap_ratio: f64,
    pub feas_tol: f64,
    pub atom_tol: f64,
    pub seed: u64,
    pub solve: SolveOptions,
}

impl Default for HierarchyOptions {
    fn default() -> Self {
        Self {
            k_min: None,
            k_max: 6,
            rank_tol: RANK_TOL,
            gap_ratio: GAP_RATIO,
            feas_tol: 1e-6,
            atom_tol: ATOM_TOL,
            seed: 0,
            solve: SolveOptions::default(),
        }
    }
}

/// Lowest admissible relaxation order `max(⌈deg f/2⌉, d_G)`.
pub fn min_order(f: &Polynomial, g: &PolyMatrix) -> u32 {
    f.degree().div_ceil(2).max(g.d_g())
}

/// Value tolerance `max(1e-6, 1e-6·|v|)` used to validate atoms.
pub fn value_tol(v: f64) -> f64 {
    1e-6f64.max(1e-6 * v.abs())
}

/// Outcome of one relaxation order.
#[derive(Clone, Debug)]
pub struct OrderSolution {
    pub k: u32,
    pub mom_value: f64,
    pub sos_value: f64,
    pub status: SolveStatus,
    pub y: Tms,
    pub certificate: Option<QmCertificate>,
}

/// Solves the order-`k` moment relaxation. The SOS value and Gram matrices
/// are read from its dual: the equality multiplier is `γ` and the PSD dual
/// blocks are `Q_0` and `Q_1`. A certificate is attached when the clipped
/// Grams reconstruct `f − γ` to the default tolerance.
pub fn solve_order(
    f: &Polynomial,
    g: &PolyMatrix,
    k: u32,
    opts: &SolveOptions,
) -> Result<OrderSolution> {
    solve_order_with(&BuiltinBackend, f, g, k, opts)
}

pub fn solve_order_with(
    backend: &dyn Backend,
    f: &Polynomial,
    g: &PolyMatrix,
    k: u32,
    opts: &SolveOptions,
) -> Result<OrderSolution> {
    let k0 = min_order(f, g);
    if k < k0 {
        return Err(Error::PreconditionViolated(format!(
            "order {k} is below the minimal order {k0}"
        )));
    }
    let relax = assemble_moment_relaxation(f, g, k)?;
    let sol = backend.solve(&relax.problem, opts)?;
    if sol.status != SolveStatus::Optimal {
        return Err(Error::Solver(sol.status));
    }
    let certificate = sol.z.get(1).map(|q1| {
        let cert = QmCertificate {
            order: k,
            gamma: sol.dual_objective,
            q0: psd_clip(&sol.z[0]),
            q1: psd_clip(q1),
            residual: 0.0,
            tolerance: default_certificate_tol(f),
        };
        cert.verify(f, g)
            .ok()
            .map(|residual| QmCertificate { residual, ..cert })
    });
    let certificate = certificate.flatten().filter(|c| c.residual <= c.tolerance);
    Ok(OrderSolution {
        k,
        mom_value: sol.primal_objective,
        sos_value: sol.dual_objective,
        status: sol.status,
        y: relax.tms(&sol.y),
        certificate,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderRecord {
    pub k: u32,
    pub mom_value: f64,
    pub sos_value: f64,
    pub status: SolveStatus,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HierarchyResult {
    pub orders: Vec<OrderRecord>,
    pub converged: bool,
    pub flat: Option<FlatTruncation>,
    pub measure: Option<AtomicMeasure>,
    pub certificate: Option<QmCertificate>,
    /// Why the last flat order was not accepted, if it was not.
    pub diagnostic: Option<String>,
}

impl HierarchyResult {
    /// Moment bound at the stopping order.
    pub fn value(&self) -> Option<f64> {
        self.orders.last().map(|o| o.mom_value)
    }

    /// Largest moment bound over all solved orders.
    pub fn lower_bound(&self) -> Option<f64> {
        self.orders.iter().map(|o| o.mom_value).reduce(f64::max)
    }

    pub fn minimizers(&self) -> &[Vec<f64>] {
        self.measure.as_ref().map_or(&[], |m| m.atoms())
    }
}

pub fn run(f: &Polynomial, g: &PolyMatrix, opts: &HierarchyOptions) -> Result<HierarchyResult> {
    run_with(&BuiltinBackend, f, g, opts)
}

/// Solves orders `k_min..=k_max`, stopping at the first order with a flat
/// truncation whose extracted atoms are feasible and attain the bound.
pub fn run_with(
    backend: &dyn Backend,
    f: &Polynomial,
    g: &PolyMatrix,
    opts: &HierarchyOptions,
) -> Result<HierarchyResult> {
    if f.nvars() != g.nvars() {
        return Err(Error::DimensionMismatch {
            expected: f.nvars(),
            got: g.nvars(),
        });
    }
    let k_min = opts.k_min.unwrap_or_else(|| min_order(f, g));
    let mut out = HierarchyResult {
        orders: Vec::new(),
        converged: false,
        flat: None,
        measure: None,
        certificate: None,
        diagnostic: None,
    };
    for k in k_min..=opts.k_max {
        let order = solve_order_with(backend, f, g, k, &opts.solve)?;
        out.orders.push(OrderRecord {
            k,
            mom_value: order.mom_value,
            sos_value: order.sos_value,
            status: order.status,
        });
        out.certificate = order.certificate.clone();
        let Some(flat) =
            check_flat_truncation_with_gap(&order.y, k, g.d_g(), opts.rank_tol, opts.gap_ratio)
        else {
            out.flat = None;
            out.measure = None;
            continue;
        };
        match validate(f, g, &order, &flat, opts) {
            Ok(mu) => {
                out.flat = Some(flat);
                out.measure = Some(mu);
                out.converged = true;
                out.diagnostic = None;
                break;
            }
            Err(why) => {
                out.flat = Some(flat);
                out.measure = None;
                out.diagnostic = Some(format!("order {k}: {why}"));
            }
        }
    }
    Ok(out)
}

fn validate(
    f: &Polynomial,
    g: &PolyMatrix,
    order: &OrderSolution,
    flat: &FlatTruncation,
    opts: &HierarchyOptions,
) -> std::result::Result<AtomicMeasure, String> {
    let mu = extract_atoms_with_tol(&order.y, flat, opts.seed, opts.atom_tol)
        .map_err(|e| e.to_string())?;
    let tol = value_tol(order.mom_value);
    for u in mu.atoms() {
        let gu: DMatrix<f64> = g.eval(u).map_err(|e| e.to_string())?;
        let lam = min_eigenvalue(&gu);
        if lam < -opts.feas_tol {
            return Err(format!("atom {u:?} is infeasible (λ_min = {lam:e})"));
        }
        let fu = f.eval(u).map_err(|e| e.to_string())?;
        if (fu - order.mom_value).abs() > tol {
            return Err(format!(
                "f at atom {u:?} is {fu:e}, bound is {:e}",
                order.mom_value
            ));
        }
    }
    if (order.mom_value - order.sos_value).abs() > tol {
        return Err(format!(
            "flat but moment value {:e} and SOS value {:e} disagree",
            order.mom_value, order.sos_value
        ));
    }
    Ok(mu)
}
