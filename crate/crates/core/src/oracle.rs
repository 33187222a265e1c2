//! Independent numerical reference values: product-integration grid convolution of
//! weakly singular functions and direct Mittag-Leffler summation. Gamma values come from
//! `statrs`, not from the series engine.

use num_complex::Complex64;
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::series::GenSeries;

/// `t^p s(t)` with `s` sampled at `t_i = i T / N`, `i = 0..=N`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledSingularFn {
    exponent: f64,
    samples: Vec<Complex64>,
    horizon: f64,
}

impl SampledSingularFn {
    pub fn new(exponent: f64, samples: Vec<Complex64>, horizon: f64) -> Result<Self> {
        if !(exponent > -1.0) {
            return Err(Error::NonIntegrableSingularity(exponent));
        }
        if samples.len() < 17 {
            return Err(Error::InvalidArgument(format!("need N >= 16 intervals, got {}", samples.len().saturating_sub(1))));
        }
        if !(horizon > 0.0) {
            return Err(Error::InvalidArgument(format!("horizon must be positive, got {horizon}")));
        }
        Ok(SampledSingularFn { exponent, samples, horizon })
    }

    /// Samples the smooth part `s` on `n` intervals of `[0, horizon]`.
    pub fn from_fn(exponent: f64, horizon: f64, n: usize, s: impl Fn(f64) -> Complex64) -> Result<Self> {
        let h = horizon / n as f64;
        Self::new(exponent, (0..=n).map(|i| s(i as f64 * h)).collect(), horizon)
    }

    /// `f = t^(mu_0 - 1) sum_mu c_mu t^(mu - mu_0) / Gamma(mu)`. The smooth part is only
    /// polynomial when all exponents differ by integers; see [`components_from_series`].
    pub fn from_series(f: &GenSeries, horizon: f64, n: usize) -> Result<Self> {
        let lead = f
            .leading_exponent()
            .ok_or_else(|| Error::InvalidArgument("cannot sample the zero series".into()))?
            .to_f64();
        let terms: Vec<(f64, Complex64, f64)> = f
            .terms()
            .iter()
            .map(|(mu, c)| {
                let m = mu.to_f64();
                (m - lead, *c, gamma(m))
            })
            .collect();
        Self::from_fn(lead - 1.0, horizon, n, |t| {
            terms
                .iter()
                .map(|(d, c, g)| if *d == 0.0 { c / g } else { c * t.powf(*d) / g })
                .sum()
        })
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn intervals(&self) -> usize {
        self.samples.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.samples.len()).map(|i| i as f64 * h).collect()
    }

    fn step(&self) -> f64 {
        self.horizon / self.intervals() as f64
    }

    // value of t^p s(t) at node i > 0
    fn value(&self, i: usize) -> Complex64 {
        self.samples[i] * (i as f64 * self.step()).powf(self.exponent)
    }
}

/// One sampled function per class of exponents modulo 1, so every smooth part is a
/// polynomial in `t`.
pub fn components_from_series(f: &GenSeries, horizon: f64, n: usize) -> Result<Vec<SampledSingularFn>> {
    let mut classes: Vec<(Exponent, Vec<(Exponent, Complex64)>)> = Vec::new();
    for &(mu, c) in f.terms() {
        let frac = mu.checked_sub(&Exponent::integer(mu.floor()))?;
        match classes.iter_mut().find(|(r, _)| *r == frac) {
            Some((_, v)) => v.push((mu, c)),
            None => classes.push((frac, vec![(mu, c)])),
        }
    }
    classes
        .into_iter()
        .map(|(_, terms)| SampledSingularFn::from_series(&GenSeries::new(terms, f.truncation())?, horizon, n))
        .collect()
}

/// `grid_convolve` extended bilinearly to sums of sampled functions.
pub fn grid_convolve_sums(fs: &[SampledSingularFn], gs: &[SampledSingularFn]) -> Result<Vec<Complex64>> {
    let mut total: Option<Vec<Complex64>> = None;
    for f in fs {
        for g in gs {
            let part = grid_convolve(f, g)?;
            match total.as_mut() {
                None => total = Some(part),
                Some(t) => t.iter_mut().zip(part).for_each(|(a, b)| *a += b),
            }
        }
    }
    total.ok_or_else(|| Error::InvalidArgument("empty sum".into()))
}

// Moments of x^e on [t_j, t_(j+1)] in the form needed for linear interpolation:
// left[j] = int x^e (t_(j+1) - x) dx / h, right[j] = int x^e (x - t_j) dx / h.
fn interpolation_weights(e: f64, h: f64, count: usize) -> (Vec<f64>, Vec<f64>) {
    let p1: Vec<f64> = (0..=count).map(|j| (j as f64 * h).powf(e + 1.0) / (e + 1.0)).collect();
    let p2: Vec<f64> = (0..=count).map(|j| (j as f64 * h).powf(e + 2.0) / (e + 2.0)).collect();
    let mut left = Vec::with_capacity(count);
    let mut right = Vec::with_capacity(count);
    for j in 0..count {
        let (a, b) = (j as f64 * h, (j + 1) as f64 * h);
        let m0 = p1[j + 1] - p1[j];
        let m1 = p2[j + 1] - p2[j];
        left.push((b * m0 - m1) / h);
        right.push((m1 - a * m0) / h);
    }
    (left, right)
}

/// Samples of `(f * g)(t_k)` at every grid node by product integration.
///
/// The integral is split at `t_(floor(k/2))`; on each half the weight carrying the
/// singular power is integrated exactly against linear interpolation of the rest.
pub fn grid_convolve(f: &SampledSingularFn, g: &SampledSingularFn) -> Result<Vec<Complex64>> {
    let n = f.intervals();
    if g.intervals() != n || (f.horizon - g.horizon).abs() > 1e-14 * f.horizon {
        return Err(Error::InvalidArgument("grids differ".into()));
    }
    if n < 64 || !n.is_power_of_two() {
        return Err(Error::InvalidArgument(format!("N must be a power of two >= 64, got {n}")));
    }
    let (p, q) = (f.exponent, g.exponent);
    let h = f.step();
    let (wq_l, wq_r) = interpolation_weights(q, h, n);
    let (wp_l, wp_r) = interpolation_weights(p, h, n);
    let fv: Vec<Complex64> = (0..=n).map(|i| if i == 0 { Complex64::new(0.0, 0.0) } else { f.value(i) }).collect();
    let gv: Vec<Complex64> = (0..=n).map(|i| if i == 0 { Complex64::new(0.0, 0.0) } else { g.value(i) }).collect();
    let beta = gamma(p + 1.0) * gamma(q + 1.0) / gamma(p + q + 2.0);

    let mut out = vec![Complex64::new(0.0, 0.0); n + 1];
    if n >= 1 {
        let sf = (f.samples[0] + f.samples[1]) * 0.5;
        let sg = (g.samples[0] + g.samples[1]) * 0.5;
        out[1] = sf * sg * h.powf(p + q + 1.0) * beta;
    }
    for k in 2..=n {
        let m = k / 2;
        let mut acc = Complex64::new(0.0, 0.0);
        // tau in [0, t_m]: weight tau^q, phi(tau) = s_g(tau) f(t_k - tau)
        for j in 0..m {
            let phi_a = g.samples[j] * fv[k - j];
            let phi_b = g.samples[j + 1] * fv[k - j - 1];
            acc += phi_a * wq_l[j] + phi_b * wq_r[j];
        }
        // u = t_k - tau in [0, t_(k-m)]: weight u^p, psi(u) = s_f(u) g(t_k - u)
        for i in 0..k - m {
            let psi_a = f.samples[i] * gv[k - i];
            let psi_b = f.samples[i + 1] * gv[k - i - 1];
            acc += psi_a * wp_l[i] + psi_b * wp_r[i];
        }
        out[k] = acc;
    }
    Ok(out)
}

fn recip_gamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return 0.0;
    }
    if x >= 170.0 {
        return (-ln_gamma(x)).exp();
    }
    // statrs is accurate to rounding only near [1, 2); reach other arguments by recurrence
    let mut y = x;
    let mut r = 1.0;
    while y >= 2.0 {
        y -= 1.0;
        r /= y;
    }
    while y < 1.0 {
        r *= y;
        y += 1.0;
    }
    r / gamma(y)
}

/// `E_(alpha,beta)(z) = sum_j z^j / Gamma(alpha j + beta)` by direct compensated summation.
pub fn mittag_leffler(alpha: f64, beta: f64, z: Complex64) -> Result<Complex64> {
    ml_three_param(alpha, beta, 1, z)
}

/// `E^m_(alpha,beta)(z) = sum_j (m)_j z^j / (j! Gamma(alpha j + beta))`.
pub fn ml_three_param(alpha: f64, beta: f64, m: u32, z: Complex64) -> Result<Complex64> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
    }
    if m == 0 {
        return Err(Error::InvalidArgument("m must be >= 1".into()));
    }
    if !(z.norm() <= 5.0) {
        return Err(Error::InvalidArgument(format!("|z| = {} exceeds the oracle range 5", z.norm())));
    }
    let mut sum = Complex64::new(0.0, 0.0);
    let mut carry = Complex64::new(0.0, 0.0);
    let mut zpow = Complex64::new(1.0, 0.0);
    let mut weight = 1.0;
    for j in 0..200u32 {
        if j > 0 {
            zpow *= z;
            weight *= (m + j - 1) as f64 / j as f64;
        }
        let arg = alpha * j as f64 + beta;
        let r = recip_gamma(arg);
        if r == 0.0 && arg <= 0.0 {
            continue;
        }
        let term = zpow * (weight * r);
        // Kahan step
        let y = term - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
        if term.norm() < 1e-18 * sum.norm() {
            break;
        }
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::ex;
    use crate::series::Truncation;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn exponential_cases() {
        let e = std::f64::consts::E;
        assert!((mittag_leffler(1.0, 1.0, c(1.0)).unwrap() - c(e)).norm() < 4e-15);
        assert!((mittag_leffler(1.0, 2.0, c(1.0)).unwrap() - c(e - 1.0)).norm() < 4e-15);
        assert!((ml_three_param(1.0, 1.0, 1, c(1.0)).unwrap() - c(e)).norm() < 4e-15);
        for z in [c(-3.0), c(2.5), Complex64::new(1.0, -2.0)] {
            assert!((mittag_leffler(1.0, 1.0, z).unwrap() - z.exp()).norm() <= 1e-13 * z.exp().norm().max(1.0));
        }
    }

    #[test]
    fn reference_values() {
        // mpmath, 50 digits
        let v = mittag_leffler(0.5, 0.5, c(0.5)).unwrap();
        assert!((v - c(1.540_369_828_139_034_8)).norm() < 1e-14);
        let v = ml_three_param(0.5, 1.0, 2, c(0.3)).unwrap();
        assert!((v - c(2.053_937_844_883_117_1)).norm() < 1e-14);
    }

    #[test]
    fn gamma_poles_contribute_nothing() {
        // beta = 0: the j = 0 term has 1/Gamma(0) = 0, so E_(1,0)(z) = z e^z
        let z = c(0.7);
        assert!((mittag_leffler(1.0, 0.0, z).unwrap() - z * z.exp()).norm() < 1e-14);
    }

    #[test]
    fn out_of_range_arguments() {
        assert!(mittag_leffler(0.5, 1.0, c(6.0)).is_err());
        assert!(mittag_leffler(0.0, 1.0, c(1.0)).is_err());
    }

    #[test]
    fn grid_convolution_examples() {
        let one = SampledSingularFn::from_fn(0.0, 2.0, 64, |_| c(1.0)).unwrap();
        let r = grid_convolve(&one, &one).unwrap();
        assert!((r[32] - c(1.0)).norm() < 1e-6);
        let inv_sqrt = 1.0 / std::f64::consts::PI.sqrt();
        let h = SampledSingularFn::from_fn(-0.5, 2.0, 256, |_| c(inv_sqrt)).unwrap();
        let r = grid_convolve(&h, &h).unwrap();
        assert!((r[128] - c(1.0)).norm() < 1e-4);
    }

    #[test]
    fn sampling_from_series() {
        let f = GenSeries::new([(ex(1, 2), c(1.0)), (ex(2, 1), c(2.0))], Truncation::default()).unwrap();
        let s = SampledSingularFn::from_series(&f, 2.0, 64).unwrap();
        assert_eq!(s.exponent(), -0.5);
        // node 32 is t = 1: 1/sqrt(pi) + 2
        assert!((s.value(32) - c(2.564_189_583_547_756_3)).norm() < 1e-14);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(
            SampledSingularFn::from_fn(-1.0, 1.0, 64, |_| c(1.0)),
            Err(Error::NonIntegrableSingularity(-1.0))
        );
        let a = SampledSingularFn::from_fn(0.0, 1.0, 48, |_| c(1.0)).unwrap();
        assert!(grid_convolve(&a, &a).is_err());
    }
}
