//! Cauchy problems `sum_p c_p D^<p> y = f` with `F(D^<p> y) = gamma_p`, solved in closed
//! form through the operational calculus and checked by substitution.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::opcalc::{l_series, Realizer, SeriesDiagnostic};
use crate::operators::{gfd_rl, projector, NullElement};
use crate::poly::Polynomial;
use crate::series::GenSeries;
use crate::sonine::SoninePair;

/// Both residuals at or below this mark a solution as verified.
pub const VERIFY_THRESHOLD: f64 = 1e-10;

/// Allowed disagreement between the two initial-value formulas of the single-term solver.
pub const CROSS_CHECK_TOLERANCE: f64 = 1e-11;

#[derive(Clone, Debug)]
pub struct CauchyProblem {
    pub pair: SoninePair,
    /// `c_0, ..., c_m` in ascending powers of `S`.
    pub coeffs: Polynomial,
    pub rhs: GenSeries,
    /// `gamma_0, ..., gamma_(m-1)`.
    pub initial: Vec<NullElement>,
}

impl CauchyProblem {
    pub fn new(pair: SoninePair, coeffs: Polynomial, rhs: GenSeries, initial: Vec<NullElement>) -> Result<Self> {
        let m = coeffs.degree();
        if m == 0 {
            return Err(Error::NotDifferentialEquation);
        }
        if initial.len() != m {
            return Err(Error::InvalidArgument(format!(
                "{} initial conditions given for an equation of order m = {m}",
                initial.len()
            )));
        }
        for (p, g) in initial.iter().enumerate() {
            if g.coeffs.len() != pair.n() as usize {
                return Err(Error::InvalidArgument(format!(
                    "initial condition {p} has {} coefficients, expected n = {}",
                    g.coeffs.len(),
                    pair.n()
                )));
            }
        }
        Ok(CauchyProblem { pair, coeffs, rhs, initial })
    }

    /// `D y - lambda y = f` with `F y = gamma_0`.
    pub fn single(pair: SoninePair, lambda: Complex64, rhs: GenSeries, gamma: NullElement) -> Result<Self> {
        let coeffs = Polynomial::new(vec![-lambda, Complex64::new(1.0, 0.0)]);
        Self::new(pair, coeffs, rhs, vec![gamma])
    }

    pub fn order(&self) -> usize {
        self.coeffs.degree()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PoleRecord {
    pub lambda: Complex64,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub l_series: Vec<SeriesDiagnostic>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verification {
    pub equation_residual: f64,
    pub ic_residual: f64,
    /// Exponents above this were excluded from the equation residual.
    pub scored_up_to: Option<Exponent>,
    /// Exponent margin `n * m` below the solution cap.
    pub margin: u32,
    pub diagnosis: Option<String>,
}

impl Verification {
    pub fn verified(&self) -> bool {
        self.equation_residual <= VERIFY_THRESHOLD && self.ic_residual <= VERIFY_THRESHOLD
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolutionReport {
    pub y: GenSeries,
    pub y_f: GenSeries,
    pub y_iv: GenSeries,
    pub poles: Vec<PoleRecord>,
    pub verification: Verification,
    pub diagnostics: Diagnostics,
}

impl SolutionReport {
    pub fn equation_residual(&self) -> f64 {
        self.verification.equation_residual
    }

    pub fn ic_residual(&self) -> f64 {
        self.verification.ic_residual
    }

    pub fn verified(&self) -> bool {
        self.verification.verified()
    }
}

/// Single-term problem: `y_f = f * l` and `y_iv = sum_i a_i d^(n-1-i) l`, the latter
/// cross-checked against `gamma_0 + lambda gamma_0 * l`.
pub fn solve_single(problem: &CauchyProblem, tol: f64) -> Result<SolutionReport> {
    if problem.order() != 1 {
        return Err(Error::InvalidArgument(format!(
            "single-term solver needs m = 1, got m = {}",
            problem.order()
        )));
    }
    let pair = &problem.pair;
    let c = problem.coeffs.coeffs();
    let lambda = -c[0] / c[1];
    let f = problem.rhs.scale(Complex64::new(1.0, 0.0) / c[1]);
    let gamma = &problem.initial[0];

    let ls = l_series(pair.kappa(), lambda, tol)?;
    let diag = ls.diagnostic(lambda);
    let l = ls.series;
    let y_f = f.conv(&l)?;

    let n = pair.n() as usize;
    let mut y_iv = GenSeries::zero(l.truncation());
    for (i, a) in gamma.coeffs.iter().enumerate() {
        y_iv = &y_iv + &l.derivative(n - 1 - i)?.scale(*a);
    }
    let g = gamma.realize(pair)?;
    let alt = &g + &g.conv(&l)?.scale(lambda);
    let gap = crate::series::max_relative_deviation(&y_iv, &alt, None);
    if !(gap <= CROSS_CHECK_TOLERANCE) {
        return Err(Error::FormulaMismatch(format!(
            "derivative and convolution forms of the initial-value part differ by {gap:.3e}"
        )));
    }

    let y = &y_f + &y_iv;
    let verification = verify_solution(problem, &y);
    Ok(SolutionReport {
        y,
        y_f,
        y_iv,
        poles: vec![PoleRecord { lambda, multiplicity: 1 }],
        verification,
        diagnostics: Diagnostics { l_series: vec![diag], warnings: Vec::new() },
    })
}

/// `y = (1/P)(S) f + sum_p (P_p/P)(S) gamma_p` with `P_p(z) = sum_(j=1..m-p) c_(p+j) z^j`.
pub fn solve_multi(problem: &CauchyProblem, tol: f64) -> Result<SolutionReport> {
    let m = problem.order();
    if m == 0 {
        return Err(Error::NotDifferentialEquation);
    }
    let pair = &problem.pair;
    let c = problem.coeffs.coeffs();
    let realizer = Realizer::new(&problem.coeffs, pair.kappa(), tol)?;

    let one = Polynomial::constant(Complex64::new(1.0, 0.0));
    let inverse = realizer.realize(&one)?;
    let y_f = inverse.as_function()?.conv(&problem.rhs)?;
    let mut warnings = inverse.form.warnings.clone();

    let mut y_iv = GenSeries::zero(y_f.truncation());
    for (p, gamma) in problem.initial.iter().enumerate() {
        if gamma.is_zero() {
            continue;
        }
        let mut num = vec![Complex64::new(0.0, 0.0); m - p + 1];
        num[1..].copy_from_slice(&c[p + 1..=m]);
        let part = realizer.realize(&Polynomial::new(num))?;
        if p > 0 && part.has_identity() {
            return Err(Error::BareIdentity);
        }
        y_iv = &y_iv + &part.apply(&gamma.realize(pair)?)?;
        warnings.extend(part.form.warnings);
    }
    warnings.sort();
    warnings.dedup();

    let y = &y_f + &y_iv;
    let verification = verify_solution(problem, &y);
    Ok(SolutionReport {
        y,
        y_f,
        y_iv,
        poles: realizer
            .roots()
            .roots
            .iter()
            .map(|r| PoleRecord { lambda: r.value, multiplicity: r.multiplicity })
            .collect(),
        verification,
        diagnostics: Diagnostics {
            l_series: realizer.diagnostics().to_vec(),
            warnings,
        },
    })
}

/// Substitutes `y` into the equation and the initial conditions.
///
/// The equation residual is `max_mu |r_mu| / max(1, s_mu)` where `r = sum_p c_p D^<p> y - f`
/// and `s_mu` is the largest `|c_p (D^<p> y)_mu|` or `|f_mu|`; it is scored on exponents up to
/// the cap of `r`, which sits `n * m` below the cap of `y`. The initial-condition residual is
/// `max |a - a_prescribed| / max(1, |a_prescribed|)` over all `F(D^<p> y)` coefficients.
/// Domain failures give infinite residuals with a diagnosis.
pub fn verify_solution(problem: &CauchyProblem, y: &GenSeries) -> Verification {
    let m = problem.order();
    let pair = &problem.pair;
    let margin = pair.n() * m as u32;
    let fail = |stage: &str, e: Error| Verification {
        equation_residual: f64::INFINITY,
        ic_residual: f64::INFINITY,
        scored_up_to: None,
        margin,
        diagnosis: Some(format!("{stage}: {e}")),
    };

    let mut derivs = vec![y.clone()];
    for p in 1..=m {
        match gfd_rl(pair, &derivs[p - 1]) {
            Ok(d) => derivs.push(d),
            Err(e) => return fail(&format!("D^<{p}> y"), e),
        }
    }

    let c = problem.coeffs.coeffs();
    let mut lhs = GenSeries::zero(y.truncation());
    for (p, d) in derivs.iter().enumerate() {
        lhs = &lhs + &d.scale(c[p]);
    }
    let r = &lhs - &problem.rhs;
    let cap = r.mu_max();
    let mut equation_residual: f64 = 0.0;
    for (mu, v) in r.terms() {
        if *mu > cap {
            continue;
        }
        let mut scale = problem.rhs.coeff(mu).norm();
        for (p, d) in derivs.iter().enumerate() {
            scale = scale.max((d.coeff(mu) * c[p]).norm());
        }
        equation_residual = equation_residual.max(v.norm() / scale.max(1.0));
    }

    let mut ic_residual: f64 = 0.0;
    for (p, prescribed) in problem.initial.iter().enumerate() {
        let got = match projector(pair, &derivs[p]) {
            Ok((g, _)) => g,
            Err(e) => return fail(&format!("F(D^<{p}> y)"), e),
        };
        for (a, b) in got.coeffs.iter().zip(&prescribed.coeffs) {
            ic_residual = ic_residual.max((a - b).norm() / b.norm().max(1.0));
        }
    }

    Verification { equation_residual, ic_residual, scored_up_to: Some(cap), margin, diagnosis: None }
}
