use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pmo::{
    cmd_audit, cmd_certify, cmd_solve, parse_point, CertifyArgs, CliError, Outcome, SolveArgs,
};

#[derive(Parser)]
#[command(
    name = "pmo",
    version,
    about = "Polynomial matrix optimization via moment-SOS relaxations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the moment hierarchy and extract minimizers.
    Solve {
        problem: PathBuf,
        /// First relaxation order, or `auto` for max(⌈deg f/2⌉, d_G).
        #[arg(long, default_value = "auto", value_parser = parse_kmin)]
        kmin: KMin,
        #[arg(long, default_value_t = 6)]
        kmax: u32,
        /// SDP residual tolerance.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Relative singular-value threshold for flat truncation.
        #[arg(long, default_value_t = 1e-6)]
        rank_tol: f64,
        /// Seed for the random combination used in atom extraction.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Solve at the lowest order when f and −G are certified SOS-convex.
        #[arg(long)]
        convex_auto: bool,
        #[arg(long)]
        json: bool,
    },
    /// Check NDC, SCC and SOSC at a feasible point.
    Audit {
        problem: PathBuf,
        /// Comma-separated coordinates.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long, default_value_t = 1e-6)]
        rank_tol: f64,
        #[arg(long)]
        json: bool,
    },
    /// Search for a certificate of f − γ ∈ QM[G]_2k.
    Certify {
        problem: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        gamma: f64,
        #[arg(long)]
        order: u32,
        /// Coefficient residual accepted by the reconstruction check.
        #[arg(long)]
        tol: Option<f64>,
        /// Certificate file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug)]
struct KMin(Option<u32>);

fn parse_kmin(s: &str) -> Result<KMin, String> {
    if s == "auto" {
        return Ok(KMin(None));
    }
    s.parse()
        .map(|k| KMin(Some(k)))
        .map_err(|_| format!("expected `auto` or an order, got {s:?}"))
}

fn dispatch(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Solve {
            problem,
            kmin,
            kmax,
            tol,
            rank_tol,
            seed,
            convex_auto,
            json,
        } => cmd_solve(
            &problem,
            &SolveArgs {
                k_min: kmin.0,
                k_max: kmax,
                tol,
                rank_tol,
                seed,
                convex_auto,
                json,
            },
        ),
        Command::Audit {
            problem,
            point,
            rank_tol,
            json,
        } => cmd_audit(&problem, &parse_point(&point)?, rank_tol, json),
        Command::Certify {
            problem,
            gamma,
            order,
            tol,
            out,
        } => cmd_certify(
            &problem,
            &CertifyArgs {
                gamma,
                order,
                tol,
                out,
            },
        ),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(out) => {
            print!("{}", out.stdout);
            ExitCode::from(out.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
