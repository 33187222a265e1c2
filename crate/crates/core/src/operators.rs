//! General fractional integral `I f = kappa * f`, the Riemann-Liouville and Caputo type
//! general fractional derivatives, their m-fold versions, null spaces and projectors.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::series::GenSeries;
use crate::sonine::SoninePair;

/// Coefficients `(a_0, ..., a_(n-1))` of `sum_i a_i d^(n-1-i) kappa`, an element of the
/// null space of the derivative.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NullElement {
    pub coeffs: Vec<Complex64>,
}

impl NullElement {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        NullElement { coeffs }
    }

    pub fn zero(n: u32) -> Self {
        NullElement { coeffs: vec![Complex64::new(0.0, 0.0); n as usize] }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == Complex64::new(0.0, 0.0))
    }

    pub fn realize(&self, pair: &SoninePair) -> Result<GenSeries> {
        if self.coeffs.len() != pair.n() as usize {
            return Err(Error::InvalidArgument(format!(
                "null element has {} coefficients, the pair has order {}",
                self.coeffs.len(),
                pair.n()
            )));
        }
        combine(&self.coeffs, &null_space_basis(pair)?, pair)
    }
}

fn combine(coeffs: &[Complex64], basis: &[GenSeries], pair: &SoninePair) -> Result<GenSeries> {
    let mut acc = GenSeries::zero(pair.truncation());
    for (a, b) in coeffs.iter().zip(basis) {
        acc = &acc + &b.scale(*a);
    }
    Ok(acc)
}

pub fn gfi(pair: &SoninePair, f: &GenSeries) -> Result<GenSeries> {
    pair.kappa().conv(f)
}

/// `d^n/dt^n (k * f)`.
pub fn gfd_rl(pair: &SoninePair, f: &GenSeries) -> Result<GenSeries> {
    pair.k().conv(f)?.derivative(pair.n() as usize)
}

/// `gfd_rl` of `f - sum_(j<n) f^(j)(0) h_(j+1)`.
pub fn gfd_caputo(pair: &SoninePair, f: &GenSeries) -> Result<GenSeries> {
    let mut g = f.clone();
    for j in 0..pair.n() as usize {
        let v = f.deriv_at_zero(j)?;
        let h = GenSeries::atom(Exponent::integer(j as i64 + 1), v, f.truncation())?;
        g = &g - &h;
    }
    gfd_rl(pair, &g)
}

/// `[d^(n-1) kappa, ..., d kappa, kappa]`.
pub fn null_space_basis(pair: &SoninePair) -> Result<Vec<GenSeries>> {
    let n = pair.n() as usize;
    (0..n).map(|i| pair.kappa().derivative(n - 1 - i)).collect()
}

/// `a_i = (d^i (k * f))(0)` and `F f = sum_i a_i d^(n-1-i) kappa`.
pub fn projector(pair: &SoninePair, f: &GenSeries) -> Result<(NullElement, GenSeries)> {
    let kf = pair.k().conv(f)?;
    let coeffs = (0..pair.n() as usize)
        .map(|i| kf.deriv_at_zero(i))
        .collect::<Result<Vec<_>>>()?;
    let realization = combine(&coeffs, &null_space_basis(pair)?, pair)?;
    Ok((NullElement { coeffs }, realization))
}

/// `kappa^<m> * f`.
pub fn mfold_gfi(pair: &SoninePair, m: usize, f: &GenSeries) -> Result<GenSeries> {
    pair.kappa().conv_pow(m)?.conv(f)
}

/// `m` successive applications of [`gfd_rl`]; errors name the failing iteration (1-based).
pub fn mfold_gfd(pair: &SoninePair, m: usize, f: &GenSeries) -> Result<GenSeries> {
    if m == 0 {
        return Err(Error::UnsupportedConvolutionPower(0));
    }
    let mut g = f.clone();
    for index in 1..=m {
        g = gfd_rl(pair, &g).map_err(|e| Error::Iteration { index, source: Box::new(e) })?;
    }
    Ok(g)
}

/// `gamma_p = F(D^<p> f)` for `p < m` and `F_m f = sum_p I^<p> gamma_p`, so that
/// `f - I^<m> D^<m> f = F_m f`.
pub fn projector_m(pair: &SoninePair, m: usize, f: &GenSeries) -> Result<(Vec<NullElement>, GenSeries)> {
    if m == 0 {
        return Err(Error::UnsupportedConvolutionPower(0));
    }
    let mut elements = Vec::with_capacity(m);
    let mut total = GenSeries::zero(f.truncation());
    let mut g = f.clone();
    for p in 0..m {
        if p > 0 {
            g = gfd_rl(pair, &g).map_err(|e| Error::Iteration { index: p, source: Box::new(e) })?;
        }
        let (gamma, realized) = projector(pair, &g)?;
        let lifted = if p == 0 { realized } else { mfold_gfi(pair, p, &realized)? };
        total = &total + &lifted;
        elements.push(gamma);
    }
    Ok((elements, total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::ex;
    use crate::series::{max_abs_deviation, Truncation};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn series(terms: &[(Exponent, f64)]) -> GenSeries {
        GenSeries::new(terms.iter().map(|(e, v)| (*e, c(*v))), Truncation::default()).unwrap()
    }

    fn abel() -> SoninePair {
        SoninePair::power_law(ex(1, 2), 1, Truncation::default()).unwrap()
    }

    fn order_two() -> SoninePair {
        SoninePair::power_law(ex(3, 2), 2, Truncation::default()).unwrap()
    }

    #[test]
    fn gfi_examples() {
        let one = series(&[(ex(1, 1), 1.0)]);
        assert_eq!(gfi(&abel(), &one).unwrap().terms(), &[(ex(3, 2), c(1.0))]);
        assert!(gfi(&abel(), &GenSeries::zero(Truncation::default())).unwrap().is_zero());
    }

    #[test]
    fn gfd_examples() {
        let p = abel();
        let h32 = series(&[(ex(3, 2), 1.0)]);
        assert_eq!(gfd_rl(&p, &h32).unwrap().terms(), &[(ex(1, 1), c(1.0))]);
        assert!(gfd_rl(&p, p.kappa()).unwrap().is_zero());
    }

    #[test]
    fn gfd_outside_domain() {
        // k * h_(1/4) = h_(3/4), whose derivative leaves C-1
        let f = series(&[(ex(1, 4), 1.0)]);
        assert!(matches!(gfd_rl(&abel(), &f), Err(Error::DerivativeLeavesDomain { .. })));
    }

    #[test]
    fn caputo_examples() {
        let one = series(&[(ex(1, 1), 1.0)]);
        assert!(gfd_caputo(&abel(), &one).unwrap().is_zero());
        let p = order_two();
        assert!(gfd_caputo(&p, &series(&[(ex(2, 1), 1.0)])).unwrap().is_zero());
        // d^2 (h_1/2 * (h_3 - h_2)) with h_2 removed: d^2 h_(7/2) = h_(3/2)
        let f = series(&[(ex(3, 1), 1.0)]);
        assert_eq!(gfd_caputo(&p, &f).unwrap().terms(), &[(ex(3, 2), c(1.0))]);
        let g = series(&[(ex(1, 2), 1.0)]);
        assert!(matches!(gfd_caputo(&abel(), &g), Err(Error::ProjectorSingular { .. })));
    }

    #[test]
    fn riemann_liouville_null_space() {
        for (alpha, n) in [(ex(1, 2), 1u32), (ex(3, 2), 2), (ex(11, 4), 3)] {
            let p = SoninePair::power_law(alpha, n, Truncation::default()).unwrap();
            let basis = null_space_basis(&p).unwrap();
            assert_eq!(basis.len(), n as usize);
            for (i, b) in basis.iter().enumerate() {
                let expected = alpha
                    .checked_sub(&Exponent::integer(n as i64 - 1 - i as i64))
                    .unwrap();
                assert_eq!(b.terms(), &[(expected, c(1.0))]);
                assert!(gfd_rl(&p, b).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn projector_examples() {
        let p = order_two();
        let f = series(&[(ex(3, 2), 1.0), (ex(3, 1), 1.0)]);
        let (gamma, ff) = projector(&p, &f).unwrap();
        assert_eq!(gamma.coeffs, vec![c(0.0), c(1.0)]);
        assert_eq!(ff.terms(), &[(ex(3, 2), c(1.0))]);

        let phi = series(&[(ex(1, 3), 1.0), (ex(2, 1), -2.0)]);
        let (gamma, ff) = projector(&p, &gfi(&p, &phi).unwrap()).unwrap();
        assert!(gamma.is_zero());
        assert!(ff.is_zero());
    }

    #[test]
    fn second_fundamental_theorem() {
        let p = order_two();
        let f = series(&[(ex(1, 2), 0.3), (ex(3, 2), -1.0), (ex(9, 4), 2.0), (ex(3, 1), 0.5)]);
        let lhs = gfi(&p, &gfd_rl(&p, &f).unwrap()).unwrap();
        let (_, ff) = projector(&p, &f).unwrap();
        let rhs = &f - &ff;
        assert!(max_abs_deviation(&lhs, &rhs, None) <= 1e-14);
    }

    #[test]
    fn mfold_examples() {
        let p = abel();
        let one = series(&[(ex(1, 1), 1.0)]);
        assert_eq!(mfold_gfi(&p, 2, &one).unwrap().terms(), &[(ex(2, 1), c(1.0))]);
        let f = series(&[(ex(1, 3), 1.0), (ex(5, 2), 2.0)]);
        let back = mfold_gfd(&p, 3, &mfold_gfi(&p, 3, &f).unwrap()).unwrap();
        assert!(max_abs_deviation(&back, &f, None) <= 1e-15);
        let g = series(&[(ex(3, 2), 1.0), (ex(7, 3), 2.0)]);
        assert_eq!(mfold_gfd(&p, 1, &g).unwrap(), gfd_rl(&p, &g).unwrap());
    }

    #[test]
    fn mfold_error_names_iteration() {
        // h_(5/4) -> h_(3/4) -> h_(1/4), then k * h_(1/4) = h_(3/4) cannot be differentiated
        let f = series(&[(ex(5, 4), 1.0)]);
        let err = mfold_gfd(&abel(), 3, &f).unwrap_err();
        assert!(matches!(err, Error::Iteration { index: 3, .. }), "{err}");
    }

    #[test]
    fn projector_m_identity() {
        let p = abel();
        let f = series(&[(ex(1, 2), 1.0), (ex(1, 1), 2.0), (ex(3, 2), -1.0), (ex(7, 3), 0.5)]);
        let (gammas, fm) = projector_m(&p, 3, &f).unwrap();
        assert_eq!(gammas.len(), 3);
        let lhs = &f - &mfold_gfi(&p, 3, &mfold_gfd(&p, 3, &f).unwrap()).unwrap();
        assert!(max_abs_deviation(&lhs, &fm, None) <= 1e-14);
        let (gammas, fm) = projector_m(&p, 2, &mfold_gfi(&p, 2, &f).unwrap()).unwrap();
        assert!(gammas.iter().all(NullElement::is_zero));
        assert!(fm.is_zero());
    }

    #[test]
    fn null_element_realization() {
        let p = order_two();
        let g = NullElement::new(vec![c(2.0), c(-1.0)]);
        let r = g.realize(&p).unwrap();
        assert_eq!(r.terms(), &[(ex(1, 2), c(2.0)), (ex(3, 2), c(-1.0))]);
        assert!(mfold_gfd(&p, 3, &r).unwrap().is_zero());
        assert!(NullElement::new(vec![c(1.0)]).realize(&p).is_err());
    }
}
