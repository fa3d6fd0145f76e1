//! Machine-readable reports. Every real number is written in scientific
//! notation with 16 significant digits.

use nalgebra::DMatrix;
use pmo_core::hierarchy::HierarchyResult;
use pmo_core::optimality::OptimalityReport;
use pmo_core::sdp::{QmCertificate, SolveStatus};
use pmo_core::sosconvex::ConvexSolution;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::value::RawValue;

/// A real number serialized as `{:.15e}`; non-finite values become `null`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let raw =
            RawValue::from_string(format!("{:.15e}", self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(Num(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN)))
    }
}

pub fn nums(v: &[f64]) -> Vec<Num> {
    v.iter().copied().map(Num).collect()
}

/// Dense row-major rows.
pub fn rows(a: &DMatrix<f64>) -> Vec<Vec<Num>> {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| Num(a[(i, j)])).collect())
        .collect()
}

pub fn from_rows(rows: &[Vec<Num>]) -> DMatrix<f64> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    DMatrix::from_fn(n, m, |i, j| rows[i][j].0)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderReport {
    pub k: u32,
    pub mom_value: Num,
    pub sos_value: Num,
    pub status: SolveStatus,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlatReport {
    pub t: u32,
    pub shift: u32,
    pub rank_t: usize,
    pub rank_lower: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateSummary {
    pub order: u32,
    pub gamma: Num,
    pub residual: Num,
    pub tolerance: Num,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveReport {
    pub method: String,
    pub backend: String,
    pub converged: bool,
    pub value: Option<Num>,
    pub lower_bound: Option<Num>,
    pub orders: Vec<OrderReport>,
    pub flat: Option<FlatReport>,
    pub minimizers: Vec<Vec<Num>>,
    pub weights: Vec<Num>,
    pub certificate: Option<CertificateSummary>,
    pub diagnostic: Option<String>,
}

impl SolveReport {
    pub fn from_hierarchy(res: &HierarchyResult, backend: &str) -> Self {
        SolveReport {
            method: "hierarchy".into(),
            backend: backend.into(),
            converged: res.converged,
            value: res.value().map(Num),
            lower_bound: res.lower_bound().map(Num),
            orders: res
                .orders
                .iter()
                .map(|o| OrderReport {
                    k: o.k,
                    mom_value: Num(o.mom_value),
                    sos_value: Num(o.sos_value),
                    status: o.status,
                })
                .collect(),
            flat: res.flat.as_ref().map(|f| FlatReport {
                t: f.t,
                shift: f.shift,
                rank_t: f.rank_t,
                rank_lower: f.rank_lower,
            }),
            minimizers: res.minimizers().iter().map(|u| nums(u)).collect(),
            weights: res
                .measure
                .as_ref()
                .map_or_else(Vec::new, |m| nums(m.weights())),
            certificate: res.certificate.as_ref().map(|c| CertificateSummary {
                order: c.order,
                gamma: Num(c.gamma),
                residual: Num(c.residual),
                tolerance: Num(c.tolerance),
            }),
            diagnostic: res.diagnostic.clone(),
        }
    }

    pub fn from_convex(sol: &ConvexSolution) -> Self {
        SolveReport {
            method: "sos-convex".into(),
            backend: "builtin".into(),
            converged: true,
            value: Some(Num(sol.value)),
            lower_bound: Some(Num(sol.value)),
            orders: vec![OrderReport {
                k: sol.order,
                mom_value: Num(sol.value),
                sos_value: Num(sol.value),
                status: SolveStatus::Optimal,
            }],
            flat: None,
            minimizers: vec![nums(&sol.minimizer)],
            weights: vec![Num(1.0)],
            certificate: None,
            diagnostic: None,
        }
    }

    pub fn text(&self) -> String {
        let mut out = format!("method: {} (backend {})\n", self.method, self.backend);
        for o in &self.orders {
            out += &format!(
                "k = {}: f_mom = {:.15e}, f_sos = {:.15e} [{:?}]\n",
                o.k, o.mom_value.0, o.sos_value.0, o.status
            );
        }
        out += &format!("converged: {}\n", self.converged);
        if let Some(v) = self.value {
            out += &format!("value: {:.15e}\n", v.0);
        }
        if let Some(f) = &self.flat {
            out += &format!("flat truncation: t = {}, rank = {}\n", f.t, f.rank_lower);
        }
        for (u, w) in self.minimizers.iter().zip(&self.weights) {
            let coords: Vec<String> = u.iter().map(|v| format!("{:.15e}", v.0)).collect();
            out += &format!("minimizer: ({}) weight {:.15e}\n", coords.join(", "), w.0);
        }
        if let Some(c) = &self.certificate {
            out += &format!(
                "certificate: order {}, residual {:.3e}\n",
                c.order, c.residual.0
            );
        }
        if let Some(d) = &self.diagnostic {
            out += &format!("note: {d}\n");
        }
        out
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NdcReport {
    pub holds: bool,
    pub rank: usize,
    pub kernel_dim: usize,
    pub required: usize,
    pub map_rank: usize,
    pub singular_values: Vec<Num>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiplierReport {
    pub lambda: Vec<Vec<Num>>,
    pub residual: Num,
    pub unique: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SoscReport {
    pub holds: bool,
    pub min_eig: Option<Num>,
    pub tol: Num,
    pub tangent_dim: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReducedReport {
    pub pivots: Vec<usize>,
    pub regular: bool,
    pub mismatch: Num,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditReport {
    pub point: Vec<Num>,
    pub g_eigenvalues: Vec<Num>,
    pub rank: usize,
    pub ndc: NdcReport,
    pub multiplier: MultiplierReport,
    /// Reported only when the NDC holds.
    pub scc: Option<bool>,
    pub lambda_rank: usize,
    /// Reported only when the NDC and SCC hold.
    pub sosc: Option<bool>,
    pub sosc_evidence: SoscReport,
    pub reduced: Option<ReducedReport>,
    pub reduced_error: Option<String>,
}

impl AuditReport {
    pub fn new(r: &OptimalityReport, g_eigenvalues: &[f64]) -> Self {
        let (_, scc, sosc) = r.verdict();
        AuditReport {
            point: nums(&r.point),
            g_eigenvalues: nums(g_eigenvalues),
            rank: r.rank,
            ndc: NdcReport {
                holds: r.ndc,
                rank: r.ndc_evidence.rank,
                kernel_dim: r.ndc_evidence.kernel_dim,
                required: r.ndc_evidence.required,
                map_rank: r.ndc_evidence.map_rank,
                singular_values: nums(&r.ndc_evidence.singular_values),
            },
            multiplier: MultiplierReport {
                lambda: rows(&r.multiplier.lambda),
                residual: Num(r.multiplier.residual),
                unique: r.multiplier.unique,
            },
            scc,
            lambda_rank: r.lambda_rank,
            sosc,
            sosc_evidence: SoscReport {
                holds: r.sosc.holds,
                min_eig: r.sosc.min_eig.map(Num),
                tol: Num(r.sosc.tol),
                tangent_dim: r.sosc.tangent.ncols(),
            },
            reduced: r.reduced.as_ref().map(|c| ReducedReport {
                pivots: c.reduction.pivots().iter().map(|i| i + 1).collect(),
                regular: c.regular,
                mismatch: Num(c.mismatch),
            }),
            reduced_error: r.reduced_error.clone(),
        }
    }

    pub fn text(&self) -> String {
        let verdict = |v: Option<bool>| v.map_or("-".to_string(), |b| b.to_string());
        let mut out = format!(
            "rank G(u) = {} (kernel dimension {})\n",
            self.rank, self.ndc.kernel_dim
        );
        out += &format!(
            "NDC: {} (map rank {} of {})\n",
            self.ndc.holds, self.ndc.map_rank, self.ndc.required
        );
        out += &format!(
            "multiplier residual: {:.3e}{}\n",
            self.multiplier.residual.0,
            if self.multiplier.unique {
                ""
            } else {
                " (not unique)"
            }
        );
        out += &format!(
            "SCC: {} (rank Λ = {})\n",
            verdict(self.scc),
            self.lambda_rank
        );
        let eig = self
            .sosc_evidence
            .min_eig
            .map_or("N(u) = {0}".to_string(), |v| {
                format!("min eigenvalue {:.15e}", v.0)
            });
        out += &format!("SOSC: {} ({eig})\n", verdict(self.sosc));
        if let Some(r) = &self.reduced {
            out += &format!(
                "reduced constraint: regular = {}, mismatch {:.3e}\n",
                r.regular, r.mismatch.0
            );
        }
        out
    }
}

/// A [`QmCertificate`] with its Gram matrices as dense row-major lists.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateFile {
    pub order: u32,
    pub gamma: Num,
    pub q0: Vec<Vec<Num>>,
    pub q1: Vec<Vec<Num>>,
    pub residual: Num,
    pub tolerance: Num,
}

impl CertificateFile {
    pub fn new(c: &QmCertificate) -> Self {
        CertificateFile {
            order: c.order,
            gamma: Num(c.gamma),
            q0: rows(&c.q0),
            q1: rows(&c.q1),
            residual: Num(c.residual),
            tolerance: Num(c.tolerance),
        }
    }

    pub fn certificate(&self) -> QmCertificate {
        QmCertificate {
            order: self.order,
            gamma: self.gamma.0,
            q0: from_rows(&self.q0),
            q1: from_rows(&self.q1),
            residual: self.residual.0,
            tolerance: self.tolerance.0,
        }
    }
}
