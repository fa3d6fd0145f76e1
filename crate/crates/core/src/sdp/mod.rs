//! Semidefinite programs in y-form, relaxation assembly, and solvers.

mod assemble;
mod backend;
mod certify;
mod dualize;
mod ipm;
mod problem;

pub use assemble::{
    assemble_moment_relaxation, assemble_sos_feasibility, assemble_sos_relaxation,
    MomentRelaxation, SosRelaxation,
};
pub use backend::{solve, Backend, BuiltinBackend, ExternalBackend, BACKEND_ENV};
pub use certify::{
    certify_qm_membership, certify_qm_membership_with, default_certificate_tol, reconstruct,
    QmCertificate,
};
pub use problem::{
    Dualize, EqConstraints, PsdBlock, Residuals, SdpProblem, SdpSolution, SolveOptions, SolveStatus,
};
