//! Command implementations behind the `pmo` binary.

pub mod problem;
pub mod report;

use std::path::{Path, PathBuf};

use pmo_core::hierarchy::{run_with, HierarchyOptions};
use pmo_core::linalg::sym_eigen;
use pmo_core::optimality::audit_with;
use pmo_core::sdp::{
    certify_qm_membership_with, Backend, BuiltinBackend, ExternalBackend, SolveOptions,
};
use pmo_core::sosconvex::{is_sos_convex_neg_g_with, is_sos_convex_poly_with, solve_convex_with};
use pmo_core::Error;

use problem::ProblemFile;
use report::{AuditReport, CertificateFile, SolveReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;
pub const EXIT_INFEASIBLE_POINT: i32 = 4;
pub const EXIT_NOT_CERTIFIED: i32 = 5;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid arguments: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Io { .. } | CliError::Usage(_) => EXIT_PARSE,
            CliError::Core(Error::InfeasiblePoint { .. }) => EXIT_INFEASIBLE_POINT,
            CliError::Core(Error::NotCertified(_)) => EXIT_NOT_CERTIFIED,
            CliError::Core(_) => EXIT_SOLVER,
        }
    }
}

/// What a command prints and the process exit code.
#[derive(Debug)]
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

pub fn load(path: &Path) -> Result<ProblemFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    ProblemFile::parse(&text)
}

/// The external solver named by `PMO_BACKEND`, else the built-in one.
pub fn backend() -> Box<dyn Backend> {
    match ExternalBackend::from_env() {
        Some(b) => Box::new(b),
        None => Box::new(BuiltinBackend),
    }
}

#[derive(Clone, Debug)]
pub struct SolveArgs {
    pub k_min: Option<u32>,
    pub k_max: u32,
    pub tol: f64,
    pub rank_tol: f64,
    pub seed: u64,
    pub convex_auto: bool,
    pub json: bool,
}

impl Default for SolveArgs {
    fn default() -> Self {
        SolveArgs {
            k_min: None,
            k_max: 6,
            tol: 1e-8,
            rank_tol: 1e-6,
            seed: 0,
            convex_auto: false,
            json: false,
        }
    }
}

pub fn cmd_solve(path: &Path, args: &SolveArgs) -> Result<Outcome, CliError> {
    let problem = load(path)?;
    let (f, g) = (problem.objective(), problem.constraint());
    if let Some(k) = args.k_min {
        if k > args.k_max {
            return Err(CliError::Usage(format!(
                "--kmin {k} exceeds --kmax {}",
                args.k_max
            )));
        }
    }
    let solve = SolveOptions {
        tol: args.tol,
        ..SolveOptions::default()
    };
    let convex = args.convex_auto
        && matches!(is_sos_convex_poly_with(&f, &solve), Ok((true, _)))
        && matches!(is_sos_convex_neg_g_with(&g, &solve), Ok((true, _)));
    let report = if convex {
        SolveReport::from_convex(&solve_convex_with(&f, &g, &solve)?)
    } else {
        let opts = HierarchyOptions {
            k_min: args.k_min,
            k_max: args.k_max,
            rank_tol: args.rank_tol,
            seed: args.seed,
            solve,
            ..HierarchyOptions::default()
        };
        let backend = backend();
        SolveReport::from_hierarchy(&run_with(backend.as_ref(), &f, &g, &opts)?, backend.name())
    };
    let stdout = if args.json {
        to_json(&report)
    } else {
        report.text()
    };
    let code = if report.converged {
        EXIT_OK
    } else {
        EXIT_NOT_CONVERGED
    };
    Ok(Outcome { stdout, code })
}

/// Parses `x1,x2,...,xn`.
pub fn parse_point(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Usage(format!("bad coordinate {t:?} in --point: {e}")))
        })
        .collect()
}

pub fn cmd_audit(
    path: &Path,
    point: &[f64],
    rank_tol: f64,
    json: bool,
) -> Result<Outcome, CliError> {
    let problem = load(path)?;
    if point.len() != problem.nvars {
        return Err(CliError::Usage(format!(
            "--point has {} coordinates, the problem has {} variables",
            point.len(),
            problem.nvars
        )));
    }
    let (f, g) = (problem.objective(), problem.constraint());
    let report = audit_with(&f, &g, point, rank_tol)?;
    let (eig, _) = sym_eigen(&g.eval(point)?);
    let report = AuditReport::new(&report, eig.as_slice());
    let stdout = if json {
        to_json(&report)
    } else {
        report.text()
    };
    Ok(Outcome {
        stdout,
        code: EXIT_OK,
    })
}

#[derive(Clone, Debug)]
pub struct CertifyArgs {
    pub gamma: f64,
    pub order: u32,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
}

/// Writes the certificate to `out` (or standard output).
pub fn cmd_certify(path: &Path, args: &CertifyArgs) -> Result<Outcome, CliError> {
    let problem = load(path)?;
    let (f, g) = (problem.objective(), problem.constraint());
    let backend = backend();
    let cert = certify_qm_membership_with(
        backend.as_ref(),
        &SolveOptions::default(),
        &f,
        args.gamma,
        &g,
        args.order,
        args.tol,
    )?;
    let json = to_json(&CertificateFile::new(&cert));
    let stdout = match &args.out {
        Some(out) => {
            std::fs::write(out, json).map_err(|source| CliError::Io {
                path: out.clone(),
                source,
            })?;
            format!(
                "certificate for f − {:.15e} at order {} written to {} (residual {:.3e})\n",
                cert.gamma,
                cert.order,
                out.display(),
                cert.residual
            )
        }
        None => json,
    };
    Ok(Outcome {
        stdout,
        code: EXIT_OK,
    })
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}
