//! Operational calculus in the indeterminate `S` (the algebraic inverse of the integral
//! `f -> kappa * f`): the convolution series `l_(kappa,lambda)` realizing `I/(S - lambda)`,
//! and realization of rational operators `Q(S)/P(S)` through partial fractions.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::accum::Accumulator;
use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::poly::{partial_fractions_with_roots, PartialFractionForm, Polynomial, RootSet};
use crate::series::{atom_weight, GenSeries};
use crate::sonine::{lattice_step, MAX_LATTICE_STEPS};

/// Per-term sup-norm level below which the l-series is considered converged.
pub const DEFAULT_TOL: f64 = 1e-18;

/// Relative size of removed partial-fraction residue that triggers a conditioning warning.
const RESIDUE_WARNING: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesDiagnostic {
    pub lambda: Complex64,
    pub iterations: usize,
    pub converged: bool,
    pub terms: usize,
    pub mu_max: Exponent,
    pub tail_bound: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LSeries {
    pub series: GenSeries,
    pub iterations: usize,
    pub converged: bool,
}

impl LSeries {
    pub fn diagnostic(&self, lambda: Complex64) -> SeriesDiagnostic {
        SeriesDiagnostic {
            lambda,
            iterations: self.iterations,
            converged: self.converged,
            terms: self.series.len(),
            mu_max: self.series.mu_max(),
            tail_bound: self.series.tail_bound().bound,
        }
    }
}

/// `sum_(j>=1) lambda^(j-1) kappa^<j>`, computed through the resolvent identity
/// `l = kappa + lambda (kappa * l)` solved on the exponent lattice of `kappa`, so every
/// coefficient up to the cap is the full sum over `j`.
///
/// Summing the powers `kappa^<j>` one by one cancels catastrophically for kernels with
/// several atoms; the recurrence does not. `converged` reports whether the estimated
/// contribution of the exponents above the cap is below `tol` on `[0, T]`.
pub fn l_series(kappa: &GenSeries, lambda: Complex64, tol: f64) -> Result<LSeries> {
    let lead = kappa
        .leading_exponent()
        .ok_or_else(|| Error::InvalidArgument("l-series of the zero kernel".into()))?;
    if !lead.is_positive() {
        return Err(Error::InvalidArgument(format!("kernel leading exponent {lead} must be positive")));
    }
    if lambda == Complex64::new(0.0, 0.0) {
        return Ok(LSeries { series: kappa.clone(), iterations: 1, converged: true });
    }
    let trunc = kappa.truncation();
    let step = lattice_step(kappa)?.gcd(&lead)?;
    let index = |e: &Exponent| -> Result<usize> {
        let off = e.checked_sub(&lead)?;
        let q = off.numer() as i128 * step.denom() as i128;
        let r = off.denom() as i128 * step.numer() as i128;
        if q % r != 0 || q / r > MAX_LATTICE_STEPS as i128 {
            return Err(Error::NonLatticeKernel);
        }
        Ok((q / r) as usize)
    };
    // lattice points lead + m*step <= mu_max
    if trunc.mu_max < lead {
        return Ok(LSeries { series: GenSeries::zero(trunc), iterations: 0, converged: false });
    }
    let room = trunc.mu_max.checked_sub(&lead)?;
    let q = room.numer() as i128 * step.denom() as i128;
    let r = room.denom() as i128 * step.numer() as i128;
    if q / r > MAX_LATTICE_STEPS as i128 {
        return Err(Error::NonLatticeKernel);
    }
    let last = (q / r) as usize;
    // kappa * l at lattice index m picks kappa at offset i and l at m - shift - i
    let shift = index(&lead.checked_mul_int(2)?)?;
    let kap: Vec<(usize, Complex64)> =
        kappa.terms().iter().map(|(e, v)| Ok((index(e)?, *v))).collect::<Result<_>>()?;

    let mut l = vec![Complex64::new(0.0, 0.0); last + 1];
    for &(i, v) in &kap {
        if i <= last {
            l[i] = v;
        }
    }
    let lam_kap: Vec<(usize, Complex64)> = kap.iter().map(|&(i, v)| (i, lambda * v)).collect();
    for m in shift..=last {
        let mut acc = Accumulator::default();
        acc.push(l[m]);
        for &(i, v) in &lam_kap {
            if i + shift > m {
                break;
            }
            acc.push_product(v, l[m - shift - i]);
        }
        l[m] = acc.settled();
    }

    let horizon = trunc.horizon;
    let mut terms = Vec::new();
    let mut weights = Vec::with_capacity(last + 1);
    for (m, v) in l.iter().enumerate() {
        let e = lead.checked_add(&step.checked_mul_int(m as i64)?)?;
        weights.push(v.norm() * atom_weight(&e, horizon));
        if *v != Complex64::new(0.0, 0.0) {
            terms.push((e, *v));
        }
    }
    let series = GenSeries::new(terms, trunc)?;

    // geometric extrapolation over windows as long as the recurrence depth
    let depth = shift + kap.last().map_or(0, |(i, _)| *i);
    let window = depth.max(1);
    let block_max = |hi: usize| weights[hi.saturating_sub(window)..hi].iter().copied().fold(0.0, f64::max);
    let w_last = block_max(weights.len());
    let w_prev = if weights.len() > window { block_max(weights.len() - window) } else { 0.0 };
    let ratio = if w_prev > 0.0 { w_last / w_prev } else if w_last == 0.0 { 0.0 } else { f64::INFINITY };
    let remainder = if ratio < 1.0 { window as f64 * w_last * ratio / (1.0 - ratio) } else { f64::INFINITY };
    let inherited = kappa.tail_bound().bound * (1.0 + lambda.norm() * series.l1_bound()).powi(2);
    let converged = ratio < 1.0 && remainder + inherited < tol;
    let tail = if remainder.is_finite() { remainder } else { window as f64 * w_last };
    let series = series.with_extra_tail(tail + inherited);
    Ok(LSeries { series, iterations: last + 1, converged })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RationalOperator {
    pub numerator: Polynomial,
    pub denominator: Polynomial,
}

impl RationalOperator {
    pub fn new(numerator: Polynomial, denominator: Polynomial) -> Result<Self> {
        if denominator.is_zero() {
            return Err(Error::InvalidArgument("zero denominator polynomial".into()));
        }
        Ok(RationalOperator { numerator, denominator })
    }

    /// `I/(S - lambda)^m`.
    pub fn resolvent_power(lambda: Complex64, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::UnsupportedConvolutionPower(0));
        }
        let one = Complex64::new(1.0, 0.0);
        Self::new(Polynomial::constant(one), Polynomial::from_roots(one, &vec![lambda; m]))
    }
}

/// `identity * I + series`: the identity part is a scalar tag and is never turned into a function.
#[derive(Clone, Debug, PartialEq)]
pub struct Realization {
    pub identity: Complex64,
    pub series: GenSeries,
    pub form: PartialFractionForm,
    pub diagnostics: Vec<SeriesDiagnostic>,
}

impl Realization {
    pub fn has_identity(&self) -> bool {
        self.identity != Complex64::new(0.0, 0.0)
    }

    /// The realization as a function; a nonzero identity part cannot be one.
    pub fn as_function(&self) -> Result<&GenSeries> {
        if self.has_identity() {
            Err(Error::BareIdentity)
        } else {
            Ok(&self.series)
        }
    }

    /// `(identity * I + series) * f = identity * f + series * f`.
    pub fn apply(&self, f: &GenSeries) -> Result<GenSeries> {
        let conv = self.series.conv(f)?;
        if self.has_identity() {
            Ok(&conv + &f.scale(self.identity))
        } else {
            Ok(conv)
        }
    }
}

/// Roots of a fixed denominator `P` and the powers `l_(kappa,lambda_j)^<i>`, shared by every
/// numerator realized over `P`.
#[derive(Clone, Debug)]
pub struct Realizer {
    denominator: Polynomial,
    lead: Exponent,
    roots: RootSet,
    // powers[j][i-1] = l_j^<i>
    powers: Vec<Vec<GenSeries>>,
    diagnostics: Vec<SeriesDiagnostic>,
}

impl Realizer {
    pub fn new(denominator: &Polynomial, kappa: &GenSeries, tol: f64) -> Result<Self> {
        if denominator.degree() == 0 {
            return Err(Error::NotDifferentialEquation);
        }
        let roots = denominator.roots()?;
        let per_pole: Vec<Result<(Vec<GenSeries>, SeriesDiagnostic)>> = roots
            .roots
            .par_iter()
            .map(|root| {
                let l = l_series(kappa, root.value, tol)?;
                let diag = l.diagnostic(root.value);
                let mut powers = vec![l.series];
                for _ in 1..root.multiplicity {
                    let next = powers.last().expect("nonempty").conv(&powers[0])?;
                    powers.push(next);
                }
                Ok((powers, diag))
            })
            .collect();
        let mut powers = Vec::with_capacity(per_pole.len());
        let mut diagnostics = Vec::with_capacity(per_pole.len());
        for r in per_pole {
            let (p, d) = r?;
            powers.push(p);
            diagnostics.push(d);
        }
        let lead = kappa
            .leading_exponent()
            .ok_or_else(|| Error::InvalidArgument("l-series of the zero kernel".into()))?;
        Ok(Realizer { denominator: denominator.clone(), lead, roots, powers, diagnostics })
    }

    pub fn roots(&self) -> &RootSet {
        &self.roots
    }

    pub fn diagnostics(&self) -> &[SeriesDiagnostic] {
        &self.diagnostics
    }

    /// `l_j^<i>` for pole `j` (in sorted order) and `i >= 1`.
    pub fn l_power(&self, pole: usize, i: usize) -> Option<&GenSeries> {
        self.powers.get(pole)?.get(i.checked_sub(1)?)
    }

    /// `Q(S)/P(S) = constant * I + sum_j sum_i c_ij l_j^<i>`.
    ///
    /// With `d = deg P - deg Q` the series equals `sum_(j >= max(d, 1)) b_j kappa^<j>`, so terms
    /// below `max(d, 1)` times the kernel's leading exponent are partial-fraction cancellation
    /// residue and are removed; a warning is attached when they were not negligible.
    pub fn realize(&self, numerator: &Polynomial) -> Result<Realization> {
        let mut form = partial_fractions_with_roots(numerator, &self.denominator, &self.roots)?;
        let trunc = self.powers[0][0].truncation();
        let mut series = GenSeries::zero(trunc);
        for (pole, powers) in form.poles.iter().zip(&self.powers) {
            for (c, l) in pole.coeffs.iter().zip(powers) {
                series = &series + &l.scale(*c);
            }
        }
        let d = self.denominator.degree().saturating_sub(numerator.degree()).max(1);
        let valuation = self.lead.checked_mul_int(d as i64)?;
        let (trimmed, removed) = series.drop_below(&valuation);
        let scale = trimmed.terms().iter().map(|(_, c)| c.norm()).fold(1.0, f64::max);
        if removed > RESIDUE_WARNING * scale {
            form.warnings.push(format!(
                "partial fractions left {removed:.3e} below exponent {valuation}; the roots are ill-conditioned"
            ));
        }
        let series = trimmed;
        Ok(Realization {
            identity: form.constant,
            series,
            form,
            diagnostics: self.diagnostics.clone(),
        })
    }
}

pub fn realize_rational(r: &RationalOperator, kappa: &GenSeries, tol: f64) -> Result<Realization> {
    if r.numerator.degree() > r.denominator.degree() {
        return Err(Error::ImproperRational {
            num: r.numerator.degree(),
            den: r.denominator.degree(),
        });
    }
    if r.denominator.degree() == 0 {
        let form = partial_fractions_with_roots(&r.numerator, &r.denominator, &RootSet::default())?;
        return Ok(Realization {
            identity: form.constant,
            series: GenSeries::zero(kappa.truncation()),
            form,
            diagnostics: Vec::new(),
        });
    }
    Realizer::new(&r.denominator, kappa, tol)?.realize(&r.numerator)
}
