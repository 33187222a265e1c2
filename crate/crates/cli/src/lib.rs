//! Batch front end for the `gfcalc` engine: problem files in, solution tables and
//! JSON reports out.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use gfcalc::series::DEFAULT_HORIZON;
use gfcalc::{solve_multi, solve_single, Truncation};
use serde::{Deserialize, Serialize};

pub mod problem;
pub mod report;

pub use problem::{KernelSpec, Overrides, Problem, ProblemFile, TruncationSpec};
pub use report::{solution_csv, Report};

#[derive(Debug)]
pub enum CliError {
    Io { path: PathBuf, source: std::io::Error },
    Schema(String),
    Solver(gfcalc::Error),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "io",
            CliError::Schema(_) => "schema",
            CliError::Solver(_) => "solver",
        }
    }

    /// `{"error": {"kind": ..., "message": ...}}` on one line.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Body<'a> {
            kind: &'a str,
            message: String,
        }
        #[derive(Serialize)]
        struct Wrapper<'a> {
            error: Body<'a>,
        }
        serde_json::to_string(&Wrapper { error: Body { kind: self.kind(), message: self.to_string() } })
            .expect("error serializes")
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Schema(msg) => write!(f, "schema error: {msg}"),
            CliError::Solver(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<gfcalc::Error> for CliError {
    fn from(e: gfcalc::Error) -> Self {
        CliError::Solver(e)
    }
}

#[derive(Clone, Debug, Default)]
pub struct SolveOptions {
    pub out_dir: Option<PathBuf>,
    pub crosscheck: bool,
    pub overrides: Overrides,
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub csv_path: PathBuf,
    pub report_path: PathBuf,
    pub report: Report,
}

impl SolveOutcome {
    pub fn verified(&self) -> bool {
        self.report.verified()
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

/// Solves a problem file and writes `<stem>.solution.csv` and `<stem>.report.json`.
pub fn run_solve(path: &Path, opts: &SolveOptions) -> Result<SolveOutcome, CliError> {
    let file = ProblemFile::from_json(&read(path)?)?;
    let problem = file.build(&opts.overrides)?;
    let sol = if problem.cauchy.order() == 1 {
        solve_single(&problem.cauchy, problem.tol)?
    } else {
        solve_multi(&problem.cauchy, problem.tol)?
    };
    let power_law = match &file.kernel {
        KernelSpec::PowerLaw { alpha, .. } => Some(alpha.parse()?),
        KernelSpec::Explicit { .. } => None,
    };
    let check = if opts.crosscheck { Some(report::crosscheck(&problem, &sol, power_law)?) } else { None };

    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "problem".to_string());
    let report = Report::new(&stem, &problem, &sol, check);
    let csv = solution_csv(&sol.y, &problem.grid)?;

    let dir = opts.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
    let csv_path = dir.join(format!("{stem}.solution.csv"));
    let report_path = dir.join(format!("{stem}.report.json"));
    write(&csv_path, &csv)?;
    write(&report_path, &report.to_json())?;
    Ok(SolveOutcome { csv_path, report_path, report })
}

/// A file holding at least a `kernel` block; full problem files qualify.
#[derive(Clone, Debug, Deserialize)]
struct KernelFile {
    kernel: KernelSpec,
    #[serde(default)]
    truncation: TruncationSpec,
}

/// Builds and validates the pair, then prints its associate and residual.
pub fn run_validate_kernel(path: &Path, overrides: &Overrides, out: &mut impl Write) -> Result<(), CliError> {
    let file: KernelFile = serde_json::from_str(&read(path)?).map_err(|e| CliError::Schema(e.to_string()))?;
    let mu_max = match (&overrides.mu_max, &file.truncation.mu_max) {
        (Some(s), _) => problem::ExponentSpec::Text(s.clone()).parse()?,
        (None, Some(e)) => e.parse()?,
        (None, None) => Truncation::default().mu_max,
    };
    let horizon = file.truncation.horizon.unwrap_or(DEFAULT_HORIZON);
    let trunc = Truncation::new(mu_max, horizon).map_err(|e| CliError::Schema(e.to_string()))?;
    let pair = file.kernel.build(trunc)?;

    let io = |e| CliError::Io { path: PathBuf::from("<stdout>"), source: e };
    writeln!(out, "order n = {}", pair.n()).map_err(io)?;
    writeln!(out, "kernel kappa:").map_err(io)?;
    for (mu, c) in pair.kappa().terms() {
        writeln!(out, "  h_{mu}  {}", fmt_complex(*c)).map_err(io)?;
    }
    writeln!(out, "associate k (leading {} of {} terms):", pair.k().len().min(report::LEADING_TERMS), pair.k().len())
        .map_err(io)?;
    for (mu, c) in pair.k().terms().iter().take(report::LEADING_TERMS) {
        writeln!(out, "  h_{mu}  {}", fmt_complex(*c)).map_err(io)?;
    }
    writeln!(out, "sonine residual: {:e}", pair.residual()).map_err(io)?;
    writeln!(out, "valid L_{} pair", pair.n()).map_err(io)?;
    Ok(())
}

fn fmt_complex(c: num_complex::Complex64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else {
        format!("{}{:+}i", c.re, c.im)
    }
}
