use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gfcalc_cli::{run_solve, run_validate_kernel, CliError, Overrides, SolveOptions};

/// Exact-series solver for linear fractional Cauchy problems with Sonine kernels.
#[derive(Parser)]
#[command(name = "gfcalc", version)]
struct Cli {
    /// Report errors on standard error as one JSON object.
    #[arg(long, global = true)]
    json_errors: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Truncation {
    /// Exponent cap, e.g. 40 or 81/2 (overrides the file).
    #[arg(long)]
    mu_max: Option<String>,

    /// l-series tolerance (overrides the file).
    #[arg(long)]
    tol: Option<f64>,
}

impl Truncation {
    fn overrides(&self) -> Overrides {
        Overrides { mu_max: self.mu_max.clone(), tol: self.tol }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem file; exit 0 if verified, 2 if unverified, 1 on error.
    Solve {
        problem: PathBuf,

        /// Directory for the CSV and report (default: current directory).
        #[arg(long)]
        out_dir: Option<PathBuf>,

        /// Compare against the numerical oracle and add a crosscheck section.
        #[arg(long)]
        crosscheck: bool,

        #[command(flatten)]
        truncation: Truncation,
    },
    /// Validate the kernel block of a file and print the associate kernel.
    ValidateKernel {
        file: PathBuf,

        #[command(flatten)]
        truncation: Truncation,
    },
}

fn report_error(e: &CliError, json: bool) {
    if json {
        eprintln!("{}", e.to_json());
    } else {
        eprintln!("error: {e}");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve { problem, out_dir, crosscheck, truncation } => {
            let opts = SolveOptions {
                out_dir: out_dir.clone(),
                crosscheck: *crosscheck,
                overrides: truncation.overrides(),
            };
            run_solve(problem, &opts).map(|outcome| {
                let r = &outcome.report;
                println!(
                    "{}: {} (equation residual {:e}, ic residual {:e})",
                    outcome.csv_path.display(),
                    r.status,
                    r.equation_residual,
                    r.ic_residual
                );
                if outcome.verified() {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(2)
                }
            })
        }
        Command::ValidateKernel { file, truncation } => {
            run_validate_kernel(file, &truncation.overrides(), &mut io::stdout().lock()).map(|()| ExitCode::SUCCESS)
        }
    };
    result.unwrap_or_else(|e| {
        report_error(&e, cli.json_errors);
        ExitCode::from(1)
    })
}
