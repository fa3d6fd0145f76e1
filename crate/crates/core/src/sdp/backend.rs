use std::io::Write;
use std::process::{Command, Stdio};

use crate::error::{Error, Result};
use crate::sdp::dualize::dualize;
use crate::sdp::ipm::solve_ipm;
use crate::sdp::{Dualize, SdpProblem, SdpSolution, SolveOptions, SolveStatus};

/// Environment variable naming an external solver command.
pub const BACKEND_ENV: &str = "PMO_BACKEND";

/// Anything that can solve an [`SdpProblem`] under the [`SdpSolution`] contract.
pub trait Backend: Send + Sync {
    fn name(&self) -> &str;
    fn solve(&self, problem: &SdpProblem, opts: &SolveOptions) -> Result<SdpSolution>;
}

/// The in-process interior-point method.
#[derive(Clone, Copy, Debug, Default)]
pub struct BuiltinBackend;

impl Backend for BuiltinBackend {
    fn name(&self) -> &str {
        "builtin"
    }

    fn solve(&self, problem: &SdpProblem, opts: &SolveOptions) -> Result<SdpSolution> {
        problem.validate()?;
        Ok(solve(problem, opts))
    }
}

/// Solves with the built-in method, going through the dual when the problem
/// is a Gram-type problem with more variables than equalities.
pub fn solve(problem: &SdpProblem, opts: &SolveOptions) -> SdpSolution {
    if opts.dualize == Dualize::Auto && problem.vars > problem.eq.rows() {
        if let Some(d) = dualize(problem) {
            let sol = solve_ipm(&d.problem, opts);
            return d.recover(problem, &sol);
        }
    }
    solve_ipm(problem, opts)
}

/// A solver run as a child process: the problem JSON is written to its
/// standard input and a solution JSON is read from its standard output.
#[derive(Clone, Debug)]
pub struct ExternalBackend {
    program: String,
    args: Vec<String>,
}

impl ExternalBackend {
    pub fn new(program: impl Into<String>, args: Vec<String>) -> Self {
        Self {
            program: program.into(),
            args,
        }
    }

    /// Splits a command line on whitespace.
    pub fn from_command_line(cmd: &str) -> Option<Self> {
        let mut parts = cmd.split_whitespace().map(str::to_string);
        let program = parts.next()?;
        Some(Self::new(program, parts.collect()))
    }

    pub fn from_env() -> Option<Self> {
        std::env::var(BACKEND_ENV)
            .ok()
            .and_then(|v| Self::from_command_line(&v))
    }
}

impl Backend for ExternalBackend {
    fn name(&self) -> &str {
        &self.program
    }

    fn solve(&self, problem: &SdpProblem, opts: &SolveOptions) -> Result<SdpSolution> {
        problem.validate()?;
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::Backend(format!("cannot start {}: {e}", self.program)))?;
        let input = problem.to_json();
        {
            let mut stdin = child.stdin.take().expect("stdin is piped");
            stdin
                .write_all(input.as_bytes())
                .map_err(|e| Error::Backend(format!("writing problem: {e}")))?;
        }
        let out = child
            .wait_with_output()
            .map_err(|e| Error::Backend(format!("waiting for {}: {e}", self.program)))?;
        if !out.status.success() {
            return Err(Error::Backend(format!(
                "{} exited with {}",
                self.program, out.status
            )));
        }
        let text = String::from_utf8_lossy(&out.stdout);
        let mut sol = SdpSolution::from_json(&text)?;
        let shapes_ok = sol.y.len() == problem.vars
            && sol.nu.len() == problem.eq.rows()
            && sol.z.len() == problem.psd_blocks.len()
            && sol
                .z
                .iter()
                .zip(&problem.psd_blocks)
                .all(|(z, b)| z.nrows() == b.size);
        if !shapes_ok {
            return Err(Error::Backend(
                "solution does not match the problem shape".into(),
            ));
        }
        // Residuals are recomputed here so that the contract does not rest on
        // the external solver's own bookkeeping.
        sol.residuals = problem.residuals(&sol.y, &sol.z, &sol.nu);
        sol.primal_objective = sol.residuals.primal_objective;
        sol.dual_objective = sol.residuals.dual_objective;
        if sol.status == SolveStatus::Optimal && sol.residuals.max() > opts.tol {
            sol.status = SolveStatus::NumericalTrouble;
        }
        Ok(sol)
    }
}
