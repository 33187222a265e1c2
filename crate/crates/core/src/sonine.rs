//! Sonine pairs `(kappa, k)` with `kappa * k = h_n`, the associate-kernel recurrence
//! for lattice kernels, and pair validation.

use num_complex::Complex64;

use crate::accum::Accumulator;
use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::series::{GenSeries, Truncation};

/// Lattice kernels needing more recurrence steps than this below the cap are refused.
pub const MAX_LATTICE_STEPS: i64 = 1_000_000;

const ACCEPT_RELATIVE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct SoninePair {
    kappa: GenSeries,
    k: GenSeries,
    n: u32,
    residual: f64,
}

impl SoninePair {
    /// `(h_alpha, h_(n-alpha))` for `n-1 < alpha < n`.
    pub fn power_law(alpha: Exponent, n: u32, trunc: Truncation) -> Result<Self> {
        if n == 0 || !in_open_unit_below(&alpha, n) {
            return Err(Error::OrderOutOfRange { alpha, n });
        }
        let one = Complex64::new(1.0, 0.0);
        let kappa = GenSeries::atom(alpha, one, trunc)?;
        let k = GenSeries::atom(Exponent::integer(n as i64).checked_sub(&alpha)?, one, trunc)?;
        Ok(SoninePair { kappa, k, n, residual: 0.0 })
    }

    /// Pair built from `kappa` alone, with `k` from [`sonine_associate`], then validated.
    pub fn from_kernel(kappa: GenSeries, n: u32) -> Result<Self> {
        let k = sonine_associate(&kappa, n)?;
        validate_pair(kappa, k, n)
    }

    pub fn kappa(&self) -> &GenSeries {
        &self.kappa
    }

    pub fn k(&self) -> &GenSeries {
        &self.k
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Largest `|(kappa * k - h_n)_mu|` below the cap.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn truncation(&self) -> Truncation {
        self.kappa.truncation()
    }
}

fn in_open_unit_below(x: &Exponent, n: u32) -> bool {
    let n = Exponent::integer(n as i64);
    let n1 = Exponent::integer(n.numer() - 1);
    *x > n1 && *x < n
}

/// Gcd of the exponent differences of a series; 1 for a single term.
pub fn lattice_step(s: &GenSeries) -> Result<Exponent> {
    let lead = s.leading_exponent().ok_or_else(|| Error::InvalidArgument("zero kernel".into()))?;
    let mut step: Option<Exponent> = None;
    for e in s.exponents().skip(1) {
        let d = e.checked_sub(&lead)?;
        step = Some(match step {
            None => d,
            Some(g) => g.gcd(&d)?,
        });
    }
    Ok(step.unwrap_or(Exponent::integer(1)))
}

/// Solves `kappa * k = h_n` for `k = sum_j d_j h_(n-alpha+j*delta)` by the triangular recurrence
/// `c_0 d_0 = 1`, `sum_(i+j=m) c_i d_j = 0`, keeping every exponent up to the cap of `kappa`.
pub fn sonine_associate(kappa: &GenSeries, n: u32) -> Result<GenSeries> {
    let (alpha, c0) = kappa
        .leading()
        .ok_or_else(|| Error::InvalidArgument("zero kernel has no associate".into()))?;
    if n == 0 || !in_open_unit_below(&alpha, n) {
        return Err(Error::NoAssociate { leading: alpha, n });
    }
    let delta = lattice_step(kappa)?;
    let trunc = kappa.truncation();
    let k_lead = Exponent::integer(n as i64).checked_sub(&alpha)?;

    // number of lattice steps with n - alpha + m*delta <= mu_max
    let room = trunc.mu_max.checked_sub(&k_lead)?;
    let steps = if room < Exponent::integer(0) {
        -1
    } else {
        let q = room.numer() as i128 * delta.denom() as i128;
        let r = room.denom() as i128 * delta.numer() as i128;
        (q / r) as i64
    };
    if steps > MAX_LATTICE_STEPS {
        return Err(Error::NonLatticeKernel);
    }
    if steps < 0 {
        return Ok(GenSeries::zero(trunc));
    }

    // kappa as sparse (lattice index, coefficient)
    let mut c: Vec<(usize, Complex64)> = Vec::with_capacity(kappa.len());
    for (e, v) in kappa.terms() {
        let off = e.checked_sub(&alpha)?;
        let q = off.numer() as i128 * delta.denom() as i128;
        let r = off.denom() as i128 * delta.numer() as i128;
        if q % r != 0 {
            return Err(Error::NonLatticeKernel);
        }
        let idx = (q / r) as usize;
        if idx as i64 > steps {
            break;
        }
        c.push((idx, *v));
    }

    let inv0 = Complex64::new(1.0, 0.0) / c0;
    let steps = steps as usize;
    let mut d = vec![Complex64::new(0.0, 0.0); steps + 1];
    d[0] = inv0;
    for m in 1..=steps {
        let mut acc = Accumulator::default();
        for &(i, ci) in c.iter().skip(1) {
            if i > m {
                break;
            }
            acc.push_product(ci, d[m - i]);
        }
        d[m] = -acc.settled() * inv0;
    }

    let mut terms = Vec::new();
    for (j, dj) in d.into_iter().enumerate() {
        if dj != Complex64::new(0.0, 0.0) {
            let e = k_lead.checked_add(&delta.checked_mul_int(j as i64)?)?;
            terms.push((e, dj));
        }
    }
    GenSeries::new(terms, trunc)
}

/// Checks every class-membership condition and the Sonine identity; collects all violations.
pub fn validate_pair(kappa: GenSeries, k: GenSeries, n: u32) -> Result<SoninePair> {
    let mut problems = Vec::new();
    if n == 0 {
        problems.push("order n must be >= 1".to_string());
    }
    let n1 = Exponent::integer(n as i64 - 1);
    match kappa.leading_exponent() {
        None => problems.push("kappa is the zero series".into()),
        Some(a) if a <= n1 => {
            problems.push(format!("leading exponent {a} of kappa is not above n-1 = {n1}"))
        }
        _ => {}
    }
    for e in kappa.exponents() {
        if !e.is_integer() && *e <= n1 {
            problems.push(format!("kappa not in C-1^(n-1): exponent {e} <= {n1}"));
        }
    }
    match k.leading_exponent() {
        None => problems.push("k is the zero series".into()),
        Some(b) if !in_open_unit_below(&b, 1) => {
            problems.push(format!("k not in C-1,0: leading exponent {b} is not in (0, 1)"))
        }
        _ => {}
    }

    let prod = kappa.conv(&k)?;
    let h_n = GenSeries::atom(
        Exponent::integer(n.max(1) as i64),
        Complex64::new(1.0, 0.0),
        prod.truncation(),
    )?;
    let diff = &prod - &h_n;
    let cap = prod.mu_max();
    let residual = diff
        .terms()
        .iter()
        .filter(|(e, _)| *e <= cap)
        .map(|(_, c)| c.norm())
        .fold(0.0, f64::max);
    let scale = magnitude_scale(&kappa, &k)?;
    if residual > ACCEPT_RELATIVE * scale.max(1.0) {
        let worst = diff
            .terms()
            .iter()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .map(|(e, _)| e.to_string())
            .unwrap_or_default();
        problems.push(format!("kappa * k differs from h_{n}: residual {residual:.3e} at exponent {worst}"));
    }

    if problems.is_empty() {
        Ok(SoninePair { kappa, k, n, residual })
    } else {
        Err(Error::NotLnPair(problems))
    }
}

// Largest coefficient of |kappa| * |k|: the size of the products that cancel in kappa * k.
fn magnitude_scale(kappa: &GenSeries, k: &GenSeries) -> Result<f64> {
    let abs = |s: &GenSeries| {
        GenSeries::new(
            s.terms().iter().map(|(e, c)| (*e, Complex64::new(c.norm(), 0.0))),
            s.truncation(),
        )
    };
    Ok(abs(kappa)?
        .conv(&abs(k)?)?
        .terms()
        .iter()
        .map(|(_, c)| c.re)
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::ex;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn series(terms: &[(Exponent, f64)]) -> GenSeries {
        GenSeries::new(terms.iter().map(|(e, v)| (*e, c(*v))), Truncation::default()).unwrap()
    }

    #[test]
    fn power_law_pairs() {
        let p = SoninePair::power_law(ex(1, 2), 1, Truncation::default()).unwrap();
        assert_eq!(p.kappa().terms(), &[(ex(1, 2), c(1.0))]);
        assert_eq!(p.k().terms(), &[(ex(1, 2), c(1.0))]);
        assert_eq!(p.residual(), 0.0);
        let p = SoninePair::power_law(ex(3, 2), 2, Truncation::default()).unwrap();
        assert_eq!(p.k().terms(), &[(ex(1, 2), c(1.0))]);
        assert!(matches!(
            SoninePair::power_law(ex(1, 1), 1, Truncation::default()),
            Err(Error::OrderOutOfRange { .. })
        ));
    }

    #[test]
    fn associate_of_power_law_is_one_atom() {
        let k = sonine_associate(&series(&[(ex(7, 3), 1.0)]), 3).unwrap();
        assert_eq!(k.terms(), &[(ex(2, 3), c(1.0))]);
    }

    #[test]
    fn associate_alternates() {
        let kappa = series(&[(ex(1, 2), 1.0), (ex(1, 1), 1.0)]);
        let k = sonine_associate(&kappa, 1).unwrap();
        // (-1)^j h_((j+1)/2) up to the cap 60
        assert_eq!(k.len(), 120);
        for (j, (e, v)) in k.terms().iter().enumerate() {
            assert_eq!(*e, ex(j as i64 + 1, 2));
            assert_eq!(*v, c(if j % 2 == 0 { 1.0 } else { -1.0 }));
        }
        let prod = kappa.conv(&k).unwrap();
        assert_eq!(prod.terms(), &[(ex(1, 1), c(1.0))]);
    }

    #[test]
    fn associate_requires_leading_in_range() {
        let kappa = series(&[(ex(1, 4), 1.0)]);
        assert!(matches!(sonine_associate(&kappa, 2), Err(Error::NoAssociate { .. })));
        let msg = sonine_associate(&kappa, 2).unwrap_err().to_string();
        assert!(msg.contains("no associate in C-1,0"));
    }

    #[test]
    fn tiny_lattice_step_is_refused() {
        let kappa = series(&[(ex(1, 2), 1.0), (Exponent::new(1_000_001, 2_000_000).unwrap(), 1.0)]);
        assert_eq!(sonine_associate(&kappa, 1), Err(Error::NonLatticeKernel));
    }

    #[test]
    fn lattice_steps() {
        assert_eq!(lattice_step(&series(&[(ex(3, 4), 1.0)])).unwrap(), ex(1, 1));
        let s = series(&[(ex(3, 2), 1.0), (ex(7, 4), 1.0), (ex(2, 1), 3.0)]);
        assert_eq!(lattice_step(&s).unwrap(), ex(1, 4));
    }

    #[test]
    fn validation() {
        let h = series(&[(ex(1, 2), 1.0)]);
        let p = validate_pair(h.clone(), h.clone(), 1).unwrap();
        assert_eq!(p.residual(), 0.0);
        let err = validate_pair(h.clone(), h, 2).unwrap_err();
        let Error::NotLnPair(list) = err else { panic!("expected NotLnPair") };
        assert!(list.iter().any(|m| m.contains("differs from h_2")));
        assert!(list.iter().any(|m| m.contains("not above n-1")));
    }

    #[test]
    fn perturbed_order_two_pair_validates() {
        let kappa = series(&[(ex(3, 2), 1.0), (ex(7, 4), 1.0)]);
        let k = sonine_associate(&kappa, 2).unwrap();
        let p = validate_pair(kappa, k, 2).unwrap();
        assert!(p.residual() <= 1e-13);
    }

    #[test]
    fn scaling_covariance() {
        let kappa = series(&[(ex(2, 3), 2.0), (ex(1, 1), -0.5), (ex(5, 3), 0.25)]);
        let k = sonine_associate(&kappa, 1).unwrap();
        let ks = sonine_associate(&kappa.scale(c(4.0)), 1).unwrap();
        assert_eq!(ks.len(), k.len());
        for ((e1, v1), (e2, v2)) in k.terms().iter().zip(ks.terms()) {
            assert_eq!(e1, e2);
            assert!((v1 / 4.0 - v2).norm() <= 1e-15 * v2.norm().max(1.0));
        }
    }
}
