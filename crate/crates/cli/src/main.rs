mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hypersurf::verification::DEFAULT_SEED;

#[derive(Parser)]
#[command(name = "hypersurf", version, about = "Hypersurface geometry in hyperbolic space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fundamental forms and principal curvatures at the input points.
    Curvature(Common),
    /// Identity residuals and inequality slacks over a point sample.
    Identities(Common),
    /// Normalize a ball patch into a half-space graph.
    Transform(TransformArgs),
    /// Solve a Monge-Ampère problem, optionally with shift continuation.
    Solve(Common),
    /// Estimate-side quantities on a surface or along a continuation family.
    Estimates(Common),
    /// Run the full acceptance suite.
    VerifyAll(Common),
}

#[derive(Args, Clone, Debug)]
pub struct Common {
    /// JSON input file.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Directory for output files; without it results go to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Grid spacing override.
    #[arg(long)]
    dx: Option<f64>,
    /// Newton tolerance override.
    #[arg(long)]
    tol: Option<f64>,
    /// Turn threshold checks into the exit code.
    #[arg(long)]
    check: bool,
}

#[derive(Args, Clone, Debug)]
pub struct TransformArgs {
    #[command(flatten)]
    common: Common,
    /// Height of the normalized base point.
    #[arg(long, default_value_t = 2.0)]
    target_height: f64,
}

/// How a command ended, mapped onto the exit code.
pub enum CliError {
    /// Malformed input, exit 2.
    Usage(String),
    /// Evaluation failed or a check did not pass, exit 1.
    Failed(Vec<String>),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, out) = match &cli.command {
        Command::Curvature(c) => ("curvature", c.out.clone()),
        Command::Identities(c) => ("identities", c.out.clone()),
        Command::Transform(t) => ("transform", t.common.out.clone()),
        Command::Solve(c) => ("solve", c.out.clone()),
        Command::Estimates(c) => ("estimates", c.out.clone()),
        Command::VerifyAll(c) => ("verify-all", c.out.clone()),
    };
    let result = match cli.command {
        Command::Curvature(c) => commands::curvature(&c),
        Command::Identities(c) => commands::identities(&c),
        Command::Transform(t) => commands::transform(&t.common, t.target_height),
        Command::Solve(c) => commands::solve(&c),
        Command::Estimates(c) => commands::estimates(&c),
        Command::VerifyAll(c) => commands::verify_all(&c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Failed(failures)) => {
            for f in &failures {
                eprintln!("failed: {f}");
            }
            if let Err(e) = output::write_manifest(out.as_deref(), name, &failures) {
                eprintln!("error: could not write the failure manifest: {e}");
            }
            ExitCode::from(1)
        }
    }
}
