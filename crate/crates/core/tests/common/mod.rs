#![allow(dead_code)]

use gfcalc::{ex, Exponent, GenSeries, NullElement, SoninePair, Truncation};
use num_complex::Complex64;
use proptest::prelude::*;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn series(terms: &[(Exponent, f64)]) -> GenSeries {
    GenSeries::new(terms.iter().map(|(e, v)| (*e, c(*v))), Truncation::default()).unwrap()
}

/// Offsets `num/den` with small denominators, added to `base`.
pub fn arb_series_above(base: Exponent, max_terms: usize) -> impl Strategy<Value = GenSeries> {
    prop::collection::vec(
        (0i64..12, prop::sample::select(vec![1i64, 2, 3, 4]), -2.0f64..2.0, -1.0f64..1.0),
        1..=max_terms,
    )
    .prop_map(move |v| {
        let terms = v
            .into_iter()
            .map(|(n, d, re, im)| (base.checked_add(&ex(n, d)).unwrap(), Complex64::new(re, im)));
        GenSeries::new(terms, Truncation::default()).unwrap()
    })
    .prop_filter("nonzero", |s| !s.is_zero())
}

pub fn arb_series(max_terms: usize) -> impl Strategy<Value = GenSeries> {
    arb_series_above(ex(1, 4), max_terms)
}

pub fn arb_real_series(max_terms: usize) -> impl Strategy<Value = GenSeries> {
    prop::collection::vec((0i64..12, prop::sample::select(vec![1i64, 2, 3, 4]), -2.0f64..2.0), 1..=max_terms)
        .prop_map(|v| {
            let terms = v.into_iter().map(|(n, d, re)| (ex(1, 4).checked_add(&ex(n, d)).unwrap(), c(re)));
            GenSeries::new(terms, Truncation::default()).unwrap()
        })
        .prop_filter("nonzero", |s| !s.is_zero())
}

pub fn arb_complex(scale: f64) -> impl Strategy<Value = Complex64> {
    (-scale..scale, -scale..scale).prop_map(|(re, im)| Complex64::new(re, im))
}

pub fn arb_null(n: u32) -> impl Strategy<Value = NullElement> {
    prop::collection::vec(arb_complex(1.5), n as usize).prop_map(NullElement::new)
}

/// Power-law pairs of orders 1 to 3 and perturbed lattice kernels `h_a + eps h_(a+d) + ...`.
pub fn catalog() -> Vec<SoninePair> {
    let t = Truncation::default();
    let mut out: Vec<SoninePair> = [(ex(1, 4), 1), (ex(1, 2), 1), (ex(3, 4), 1), (ex(3, 2), 2), (ex(7, 3), 3), (ex(5, 2), 3)]
        .into_iter()
        .map(|(a, n)| SoninePair::power_law(a, n, t).unwrap())
        .collect();
    for (kappa, n) in perturbed_kernels() {
        out.push(SoninePair::from_kernel(kappa, n).unwrap());
    }
    out
}

pub fn perturbed_kernels() -> Vec<(GenSeries, u32)> {
    vec![
        (series(&[(ex(1, 2), 1.0), (ex(1, 1), 0.5)]), 1),
        (series(&[(ex(1, 4), 1.0), (ex(1, 2), -0.5)]), 1),
        (series(&[(ex(2, 3), 1.0), (ex(4, 3), 0.5)]), 1),
        (series(&[(ex(3, 2), 1.0), (ex(7, 4), 0.25)]), 2),
        (series(&[(ex(5, 2), 1.0), (ex(8, 3), 0.5), (ex(17, 6), -0.25)]), 3),
    ]
}

pub fn arb_pair() -> impl Strategy<Value = SoninePair> {
    prop::sample::select(catalog())
}

pub fn rel_close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm()).max(1e-300)
}

/// `|a - b| <= tol * max(1, |b|)`.
pub fn mixed_close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * b.norm().max(1.0)
}

/// Largest `|a_mu - b_mu|` relative to `max(1, max_(nu <= mu) max(|a_nu|, |b_nu|))`, the
/// coefficient scale a term at `mu` is computed from.
pub fn prefix_relative_deviation(a: &GenSeries, b: &GenSeries) -> f64 {
    let cap = a.mu_max().min(b.mu_max());
    let mut exps: Vec<Exponent> = a.exponents().chain(b.exponents()).copied().filter(|e| *e <= cap).collect();
    exps.sort();
    exps.dedup();
    let mut scale: f64 = 1.0;
    let mut worst: f64 = 0.0;
    for e in &exps {
        let (x, y) = (a.coeff(e), b.coeff(e));
        scale = scale.max(x.norm()).max(y.norm());
        worst = worst.max((x - y).norm() / scale);
    }
    worst
}
