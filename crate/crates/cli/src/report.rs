//! Solution tables, JSON reports and oracle cross-checks.

use std::fmt::Write as _;

use gfcalc::opcalc::SeriesDiagnostic;
use gfcalc::oracle::{components_from_series, grid_convolve_sums, mittag_leffler};
use gfcalc::poly::Polynomial;
use gfcalc::solver::PoleRecord;
use gfcalc::{realize_rational, Exponent, GenSeries, RationalOperator, SeriesRecord, SolutionReport};
use num_complex::Complex64;
use serde::Serialize;

use crate::problem::Problem;
use crate::CliError;

/// Intervals of the product-integration grid used by `--crosscheck`.
pub const CROSSCHECK_INTERVALS: usize = 1024;
pub const GRID_TOLERANCE: f64 = 1e-3;
pub const MITTAG_LEFFLER_TOLERANCE: f64 = 1e-9;
/// Terms of the associate kernel listed in reports.
pub const LEADING_TERMS: usize = 8;

#[derive(Clone, Debug, Serialize)]
pub struct KernelReport {
    pub n: u32,
    pub sonine_residual: f64,
    pub kappa: Vec<SeriesRecord>,
    pub associate_leading: Vec<SeriesRecord>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TruncationReport {
    pub mu_max: Exponent,
    pub horizon: f64,
    pub tol: f64,
    pub solution_mu_max: Exponent,
    pub tail_bound: f64,
    pub scored_up_to: Option<Exponent>,
    pub margin: u32,
    pub l_series: Vec<SeriesDiagnostic>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GridCheck {
    pub intervals: usize,
    pub points: usize,
    pub max_relative_error: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MittagLefflerCheck {
    pub points: usize,
    pub skipped: usize,
    pub max_error: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Crosscheck {
    pub passed: bool,
    pub grid_convolution: Option<GridCheck>,
    pub mittag_leffler: Option<MittagLefflerCheck>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub problem: String,
    pub status: &'static str,
    pub kernel: KernelReport,
    pub poles: Vec<PoleRecord>,
    pub truncation: TruncationReport,
    pub equation_residual: f64,
    pub ic_residual: f64,
    pub diagnosis: Option<String>,
    pub solution: Vec<SeriesRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub crosscheck: Option<Crosscheck>,
}

impl Report {
    pub fn new(name: &str, problem: &Problem, sol: &SolutionReport, crosscheck: Option<Crosscheck>) -> Self {
        let pair = &problem.cauchy.pair;
        let passed = crosscheck.as_ref().is_none_or(|c| c.passed);
        let v = &sol.verification;
        Report {
            problem: name.to_string(),
            status: if sol.verified() && passed { "verified" } else { "unverified" },
            kernel: KernelReport {
                n: pair.n(),
                sonine_residual: pair.residual(),
                kappa: pair.kappa().to_records(),
                associate_leading: pair.k().to_records().into_iter().take(LEADING_TERMS).collect(),
            },
            poles: sol
                .poles
                .iter()
                .map(|p| PoleRecord { lambda: Complex64::new(tidy(p.lambda.re), tidy(p.lambda.im)), ..p.clone() })
                .collect(),
            truncation: TruncationReport {
                mu_max: problem.truncation.mu_max,
                horizon: problem.truncation.horizon,
                tol: problem.tol,
                solution_mu_max: sol.y.mu_max(),
                tail_bound: sol.y.tail_bound().bound,
                scored_up_to: v.scored_up_to,
                margin: v.margin,
                l_series: sol.diagnostics.l_series.clone(),
                warnings: sol.diagnostics.warnings.clone(),
            },
            equation_residual: v.equation_residual,
            ic_residual: v.ic_residual,
            diagnosis: v.diagnosis.clone(),
            solution: sol.y.to_records(),
            crosscheck,
        }
    }

    pub fn verified(&self) -> bool {
        self.status == "verified"
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// `t,re_y,im_y` rows with shortest round-trip formatting.
pub fn solution_csv(y: &GenSeries, grid: &[f64]) -> Result<String, CliError> {
    let mut out = String::from("t,re_y,im_y\n");
    for &t in grid {
        let v = y.eval(t)?;
        writeln!(out, "{},{},{}", t, tidy(v.re), tidy(v.im)).expect("write to string");
    }
    Ok(out)
}

fn tidy(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

/// Checks `y_f` against product integration and, for power-law single-term problems,
/// `y_iv` against direct Mittag-Leffler sums.
pub fn crosscheck(problem: &Problem, sol: &SolutionReport, power_law: Option<Exponent>) -> Result<Crosscheck, CliError> {
    let grid_convolution = if problem.cauchy.rhs.is_zero() { None } else { grid_check(problem, sol)? };
    let mittag_leffler = match power_law {
        Some(alpha) if problem.cauchy.order() == 1 => Some(ml_check(problem, sol, alpha)?),
        _ => None,
    };
    let passed = grid_convolution.as_ref().is_none_or(|g| g.max_relative_error <= g.tolerance)
        && mittag_leffler.as_ref().is_none_or(|m| m.max_error <= m.tolerance);
    Ok(Crosscheck { passed, grid_convolution, mittag_leffler })
}

fn grid_check(problem: &Problem, sol: &SolutionReport) -> Result<Option<GridCheck>, CliError> {
    let cauchy = &problem.cauchy;
    let one = Polynomial::constant(Complex64::new(1.0, 0.0));
    let op = RationalOperator::new(one, cauchy.coeffs.clone())?;
    let r = realize_rational(&op, cauchy.pair.kappa(), problem.tol)?;
    let horizon = problem.truncation.horizon;
    let n = CROSSCHECK_INTERVALS;
    let sr = components_from_series(r.as_function()?, horizon, n)?;
    let sf = components_from_series(&cauchy.rhs, horizon, n)?;
    let values = grid_convolve_sums(&sr, &sf)?;
    let (lo, hi) = (problem.grid[0], problem.grid[problem.grid.len() - 1]);
    let mut err: f64 = 0.0;
    let mut size: f64 = 0.0;
    let mut points = 0;
    for (i, v) in values.iter().enumerate() {
        let t = horizon * i as f64 / n as f64;
        if t < lo || t > hi {
            continue;
        }
        let e = sol.y_f.eval(t)?;
        err = err.max((e - v).norm());
        size = size.max(e.norm());
        points += 1;
    }
    if points == 0 || size == 0.0 {
        return Ok(None);
    }
    Ok(Some(GridCheck { intervals: n, points, max_relative_error: err / size, tolerance: GRID_TOLERANCE }))
}

fn ml_check(problem: &Problem, sol: &SolutionReport, alpha: Exponent) -> Result<MittagLefflerCheck, CliError> {
    let a = alpha.to_f64();
    let n = problem.cauchy.pair.n() as usize;
    let lambda = sol.poles[0].lambda;
    let gamma = &problem.cauchy.initial[0].coeffs;
    let mut worst: f64 = 0.0;
    let (mut points, mut skipped) = (0, 0);
    for &t in &problem.grid {
        let z = lambda * t.powf(a);
        if z.norm() > 5.0 {
            skipped += 1;
            continue;
        }
        let mut expected = Complex64::new(0.0, 0.0);
        for (i, ai) in gamma.iter().enumerate() {
            let shift = a - n as f64 + i as f64;
            expected += ai * t.powf(shift) * mittag_leffler(a, shift + 1.0, z)?;
        }
        let got = sol.y_iv.eval(t)?;
        worst = worst.max((got - expected).norm() / expected.norm().max(1.0));
        points += 1;
    }
    Ok(MittagLefflerCheck { points, skipped, max_error: worst, tolerance: MITTAG_LEFFLER_TOLERANCE })
}
