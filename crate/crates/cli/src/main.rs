use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sagesimplex_cli::{
    cmd_check, cmd_decompose, cmd_minimize, cmd_sample, cmd_univariate, CheckMode, DecomposeFlags, Outcome,
    Problem, Region, Settings, Univariate,
};

#[derive(Parser)]
#[command(name = "sagesimplex", version, about = "Nonnegativity certificates for signomials with simplex support")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Violation threshold: f(x) < -tol is a witness.
    #[arg(long, global = true, env = "SAGESIMPLEX_TOL", default_value_t = 1e-9)]
    tol: f64,
    /// Grid depth for sampled regions.
    #[arg(long, global = true, env = "SAGESIMPLEX_GRID_DEPTH", default_value_t = 10)]
    grid_depth: usize,
    /// Points tried by the falsifier.
    #[arg(long, global = true, env = "SAGESIMPLEX_FALSIFY_BUDGET", default_value_t = 4000)]
    falsify_budget: usize,
    #[arg(long, global = true, env = "SAGESIMPLEX_SEED", default_value_t = 7)]
    seed: u64,
    /// Iterations per start of the SAGE split search.
    #[arg(long, global = true, env = "SAGESIMPLEX_SAGE_ITERATIONS", default_value_t = 500)]
    sage_iterations: usize,
    #[arg(long, global = true, env = "SAGESIMPLEX_SAGE_RESTARTS", default_value_t = 5)]
    sage_restarts: usize,
    /// Sample points used when re-verifying certificates.
    #[arg(long, global = true, env = "SAGESIMPLEX_VERIFY_SAMPLES", default_value_t = 400)]
    verify_samples: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Certify, falsify or give up on nonnegativity over a region.
    Check {
        problem: PathBuf,
        #[arg(long)]
        region: Option<PathBuf>,
        #[arg(long, env = "SAGESIMPLEX_MODE", default_value = "constrained")]
        mode: CheckMode,
    },
    /// Split f into nonnegative circuit signomials.
    Decompose {
        problem: PathBuf,
        region: PathBuf,
        /// Largest constant shift allowed when the minimum is not attained.
        #[arg(long, env = "SAGESIMPLEX_EPSILON", default_value_t = 1e-3)]
        epsilon: f64,
        #[arg(long)]
        nonnegative_coefficients: bool,
    },
    /// Minimum over the region: moment program and grid oracle.
    Minimize { problem: PathBuf, region: PathBuf },
    /// One-dimensional tools.
    #[command(subcommand)]
    Univariate(UniCommand),
    /// Write CSV samples of f in x-space and moment space.
    Sample {
        problem: PathBuf,
        region: PathBuf,
        /// x-space CSV; the moment CSV goes next to it with a `_moment` suffix.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum UniCommand {
    /// Do the SAGE and nonnegative cones agree for A = {alpha1, alpha2}?
    Coincide {
        #[arg(long, allow_hyphen_values = true)]
        alpha1: f64,
        #[arg(long, allow_hyphen_values = true)]
        alpha2: f64,
        /// Negative support, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        b: Vec<f64>,
        #[arg(long, default_value = "-inf", allow_hyphen_values = true)]
        lower: f64,
        #[arg(long, default_value = "inf", allow_hyphen_values = true)]
        upper: f64,
    },
    /// Proportional split at the minimizing endpoint.
    Split {
        problem: PathBuf,
        #[arg(long, default_value = "-inf", allow_hyphen_values = true)]
        lower: f64,
        #[arg(long, default_value = "inf", allow_hyphen_values = true)]
        upper: f64,
    },
    /// Nonnegative signomial outside the SAGE cone.
    Counterexample {
        #[arg(long, allow_hyphen_values = true)]
        alpha1: f64,
        #[arg(long, allow_hyphen_values = true)]
        alpha2: f64,
        #[arg(long, allow_hyphen_values = true)]
        beta1: f64,
        #[arg(long, allow_hyphen_values = true)]
        beta2: f64,
        #[arg(long, allow_hyphen_values = true)]
        lower: f64,
        #[arg(long, default_value = "inf", allow_hyphen_values = true)]
        upper: f64,
        #[arg(long, allow_hyphen_values = true)]
        b: f64,
    },
    /// Sign changes against roots found on [lower, upper].
    Descartes {
        problem: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        lower: f64,
        #[arg(long, allow_hyphen_values = true)]
        upper: f64,
        #[arg(long, default_value_t = 20_000)]
        resolution: usize,
    },
}

fn read(path: &Path) -> Result<String, Outcome> {
    std::fs::read_to_string(path).map_err(|e| Outcome::input_error(format!("cannot read {}: {e}", path.display())))
}

fn problem(path: &Path) -> Result<Problem, Outcome> {
    Problem::parse(&read(path)?).map_err(Outcome::input_error)
}

fn region(path: &Path) -> Result<Region, Outcome> {
    Region::parse(&read(path)?).map_err(Outcome::input_error)
}

fn run(cli: Cli) -> Result<Outcome, Outcome> {
    let c = cli.common;
    let s = Settings {
        tol: c.tol,
        grid_depth: c.grid_depth,
        falsify_budget: c.falsify_budget,
        seed: c.seed,
        sage_iterations: c.sage_iterations,
        sage_restarts: c.sage_restarts,
        verify_samples: c.verify_samples,
    };
    Ok(match cli.command {
        Command::Check { problem: p, region: r, mode } => {
            let r = r.as_deref().map(region).transpose()?;
            cmd_check(&problem(&p)?, r.as_ref(), mode, &s)
        }
        Command::Decompose {
            problem: p,
            region: r,
            epsilon,
            nonnegative_coefficients,
        } => {
            let flags = DecomposeFlags {
                epsilon,
                nonnegative_coefficients,
            };
            cmd_decompose(&problem(&p)?, &region(&r)?, &flags, &s)
        }
        Command::Minimize { problem: p, region: r } => cmd_minimize(&problem(&p)?, &region(&r)?, &s),
        Command::Sample { problem: p, region: r, out } => cmd_sample(&problem(&p)?, &region(&r)?, s.grid_depth, &out),
        Command::Univariate(u) => {
            let sub = match u {
                UniCommand::Coincide { alpha1, alpha2, b, lower, upper } => Univariate::Coincide {
                    alpha1,
                    alpha2,
                    b,
                    lower,
                    upper,
                },
                UniCommand::Split { problem: p, lower, upper } => Univariate::Split {
                    problem: problem(&p)?,
                    lower,
                    upper,
                },
                UniCommand::Counterexample {
                    alpha1,
                    alpha2,
                    beta1,
                    beta2,
                    lower,
                    upper,
                    b,
                } => Univariate::Counterexample {
                    alphas: [alpha1, alpha2],
                    betas: [beta1, beta2],
                    lower,
                    upper,
                    b,
                },
                UniCommand::Descartes {
                    problem: p,
                    lower,
                    upper,
                    resolution,
                } => Univariate::Descartes {
                    problem: problem(&p)?,
                    lower,
                    upper,
                    resolution,
                },
            };
            cmd_univariate(&sub, &s)
        }
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let help = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return ExitCode::from(if help { 0 } else { 3 });
        }
    };
    let out = run(cli).unwrap_or_else(|o| o);
    match serde_json::to_string_pretty(&out.json) {
        // A closed stdout (e.g. piped into `head`) is not an error worth reporting.
        Ok(s) => {
            let _ = writeln!(std::io::stdout(), "{s}");
        }
        Err(e) => eprintln!("cannot serialize output: {e}"),
    }
    if let Some(err) = out.json.get("error").and_then(|v| v.as_str()) {
        eprintln!("error: {err}");
    }
    ExitCode::from(out.code as u8)
}
