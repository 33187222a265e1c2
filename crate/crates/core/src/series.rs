//! Generalized power series: finite sums of power atoms `h_mu(t) = t^(mu-1)/Gamma(mu)`
//! with exact rational exponents and complex coefficients.
//!
//! Every series carries a [`Truncation`]: the cap `mu_max` is the exactness horizon
//! (every atom with exponent `<= mu_max` is represented, everything above it was dropped)
//! and `horizon` is the interval `[0, T]` on which dropped atoms are bounded.
//! Binary operations use the smaller cap; the `i`-th derivative lowers the cap by `i`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::accum::Accumulator;
use crate::error::{Error, Result};
use crate::exponent::{common_denominator, Exponent};
use crate::special;

pub const DEFAULT_MU_MAX: i64 = 60;
pub const DEFAULT_HORIZON: f64 = 2.0;

/// Relative level below which a coefficient is treated as cancellation noise.
pub const NOISE_LEVEL: f64 = 1e-15;

// Above this many lattice slots the convolution accumulates in a map instead of a vector.
const DENSE_LIMIT: i64 = 1 << 22;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Truncation {
    pub mu_max: Exponent,
    pub horizon: f64,
}

impl Truncation {
    pub fn new(mu_max: Exponent, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidArgument(format!("horizon must be positive, got {horizon}")));
        }
        Ok(Truncation { mu_max, horizon })
    }

    fn meet(&self, other: &Truncation) -> Truncation {
        Truncation {
            mu_max: self.mu_max.min(other.mu_max),
            horizon: self.horizon.max(other.horizon),
        }
    }
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation {
            mu_max: Exponent::integer(DEFAULT_MU_MAX),
            horizon: DEFAULT_HORIZON,
        }
    }
}

/// Sup-norm bound on `[0, horizon]` for everything a series has dropped.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailBound {
    pub bound: f64,
    pub horizon: f64,
}

/// `T^(mu-1)/Gamma(mu)`: the sup of `|h_mu|` on `[0, T]` when `mu >= 1`.
pub fn atom_weight(mu: &Exponent, horizon: f64) -> f64 {
    special::atom(mu.to_f64(), horizon)
}

/// One serialized term: exponent `num/den` and coefficient `re + i im`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesRecord {
    pub num: i64,
    pub den: i64,
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, PartialEq)]
pub struct GenSeries {
    terms: Vec<(Exponent, Complex64)>,
    trunc: Truncation,
    tail: f64,
}

impl GenSeries {
    /// Canonical series from arbitrary terms: sorted, like exponents merged,
    /// zero and cancellation-noise coefficients removed, terms above the cap
    /// moved into the tail bound.
    pub fn new<I>(terms: I, trunc: Truncation) -> Result<Self>
    where
        I: IntoIterator<Item = (Exponent, Complex64)>,
    {
        let mut map: BTreeMap<Exponent, Accumulator> = BTreeMap::new();
        for (mu, c) in terms {
            if !mu.is_positive() {
                return Err(Error::NonPositiveExponent(mu));
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::InvalidArgument(format!("non-finite coefficient at exponent {mu}")));
            }
            map.entry(mu).or_default().push(c);
        }
        Ok(Self::from_acc(map, trunc, 0.0))
    }

    fn from_acc(map: BTreeMap<Exponent, Accumulator>, trunc: Truncation, mut tail: f64) -> Self {
        let mut terms = Vec::with_capacity(map.len());
        for (mu, acc) in map {
            let c = acc.settled();
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            if mu > trunc.mu_max {
                tail += c.norm() * atom_weight(&mu, trunc.horizon);
            } else {
                terms.push((mu, c));
            }
        }
        GenSeries { terms, trunc, tail }
    }

    pub fn zero(trunc: Truncation) -> Self {
        GenSeries { terms: Vec::new(), trunc, tail: 0.0 }
    }

    /// The single atom `c * h_mu`.
    pub fn atom(mu: Exponent, c: Complex64, trunc: Truncation) -> Result<Self> {
        Self::new([(mu, c)], trunc)
    }

    /// The constant function `{1} = h_1`.
    pub fn one(trunc: Truncation) -> Self {
        Self::new([(Exponent::integer(1), Complex64::new(1.0, 0.0))], trunc).expect("h_1 is valid")
    }

    pub fn terms(&self) -> &[(Exponent, Complex64)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn truncation(&self) -> Truncation {
        self.trunc
    }

    pub fn mu_max(&self) -> Exponent {
        self.trunc.mu_max
    }

    pub fn horizon(&self) -> f64 {
        self.trunc.horizon
    }

    pub fn tail_bound(&self) -> TailBound {
        TailBound { bound: self.tail, horizon: self.trunc.horizon }
    }

    pub fn coeff(&self, mu: &Exponent) -> Complex64 {
        match self.terms.binary_search_by(|(e, _)| e.cmp(mu)) {
            Ok(i) => self.terms[i].1,
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn leading(&self) -> Option<(Exponent, Complex64)> {
        self.terms.first().copied()
    }

    pub fn leading_exponent(&self) -> Option<Exponent> {
        self.terms.first().map(|(e, _)| *e)
    }

    pub fn exponents(&self) -> impl Iterator<Item = &Exponent> + '_ {
        self.terms.iter().map(|(e, _)| e)
    }

    /// `sum |c_mu| T^(mu-1)/Gamma(mu)`; the sup on `[0, T]` when all exponents are `>= 1`.
    pub fn sup_bound(&self) -> f64 {
        self.terms.iter().map(|(mu, c)| c.norm() * atom_weight(mu, self.trunc.horizon)).sum()
    }

    /// `sum |c_mu| T^mu/Gamma(mu+1)`, an upper bound for the L1 norm on `[0, T]`.
    pub fn l1_bound(&self) -> f64 {
        let t = self.trunc.horizon;
        self.terms
            .iter()
            .map(|(mu, c)| c.norm() * special::atom_integral(mu.to_f64(), t))
            .sum()
    }

    /// Evaluate `sum c_mu t^(mu-1)/Gamma(mu)`.
    pub fn eval(&self, t: f64) -> Result<Complex64> {
        if t < 0.0 || t.is_nan() {
            return Err(Error::InvalidArgument(format!("evaluation point {t} must be >= 0")));
        }
        if t == 0.0 {
            if self.terms.iter().any(|(mu, _)| *mu < Exponent::integer(1)) {
                return Err(Error::SingularAtOrigin);
            }
            return Ok(self.coeff(&Exponent::integer(1)));
        }
        Ok(self
            .terms
            .iter()
            .map(|(mu, c)| c * special::atom(mu.to_f64(), t))
            .sum())
    }

    pub fn scale(&self, c: Complex64) -> GenSeries {
        if c == Complex64::new(0.0, 0.0) {
            return GenSeries::zero(self.trunc);
        }
        GenSeries {
            terms: self.terms.iter().map(|(e, v)| (*e, v * c)).collect(),
            trunc: self.trunc,
            tail: self.tail * c.norm(),
        }
    }

    pub(crate) fn with_extra_tail(mut self, extra: f64) -> GenSeries {
        self.tail += extra;
        self
    }

    /// Lower the cap to `mu_max` (no-op when it is already lower).
    pub fn restrict(&self, mu_max: Exponent) -> GenSeries {
        if mu_max >= self.trunc.mu_max {
            return self.clone();
        }
        let trunc = Truncation { mu_max, horizon: self.trunc.horizon };
        let mut tail = self.tail;
        let mut terms = Vec::with_capacity(self.terms.len());
        for &(e, c) in &self.terms {
            if e > mu_max {
                tail += c.norm() * atom_weight(&e, trunc.horizon);
            } else {
                terms.push((e, c));
            }
        }
        GenSeries { terms, trunc, tail }
    }

    /// Splits off the terms with exponent below `mu`; returns the rest and the largest
    /// removed coefficient magnitude.
    pub fn drop_below(&self, mu: &Exponent) -> (GenSeries, f64) {
        let mut largest: f64 = 0.0;
        let terms = self
            .terms
            .iter()
            .filter(|(e, c)| {
                let keep = e >= mu;
                if !keep {
                    largest = largest.max(c.norm());
                }
                keep
            })
            .copied()
            .collect();
        (GenSeries { terms, trunc: self.trunc, tail: self.tail }, largest)
    }

    /// Laplace convolution via the exact rule `h_a * h_b = h_(a+b)`.
    pub fn conv(&self, other: &GenSeries) -> Result<GenSeries> {
        let trunc = self.trunc.meet(&other.trunc);
        let carried = self.tail * other.l1_bound()
            + other.tail * self.l1_bound()
            + self.tail * other.tail * trunc.horizon;
        if self.is_zero() || other.is_zero() {
            return Ok(GenSeries { terms: Vec::new(), trunc, tail: carried });
        }

        let den = common_denominator(
            self.exponents().chain(other.exponents()).chain(std::iter::once(&trunc.mu_max)),
        )?;
        let scaled = |s: &GenSeries| -> Result<Vec<(i64, Complex64)>> {
            s.terms
                .iter()
                .map(|(e, c)| {
                    e.numer()
                        .checked_mul(den / e.denom())
                        .map(|n| (n, *c))
                        .ok_or(Error::ExponentOverflow)
                })
                .collect()
        };
        let a = scaled(self)?;
        let b = scaled(other)?;
        let cap = trunc.mu_max.floor_scaled(den);
        let lo = a[0].0.checked_add(b[0].0).ok_or(Error::ExponentOverflow)?;

        let mut dropped: BTreeMap<i64, Complex64> = BTreeMap::new();
        let mut kept: BTreeMap<i64, Accumulator> = BTreeMap::new();
        let span = cap.saturating_sub(lo).saturating_add(1);
        let mut dense = if (1..=DENSE_LIMIT).contains(&span) {
            vec![Accumulator::default(); span as usize]
        } else {
            Vec::new()
        };

        for &(ea, ca) in &a {
            for &(eb, cb) in &b {
                let s = ea.checked_add(eb).ok_or(Error::ExponentOverflow)?;
                if s > cap {
                    *dropped.entry(s).or_default() += ca * cb;
                } else if dense.is_empty() {
                    kept.entry(s).or_default().push_product(ca, cb);
                } else {
                    dense[(s - lo) as usize].push_product(ca, cb);
                }
            }
        }

        let mut tail = carried;
        for (s, c) in dropped {
            tail += c.norm() * atom_weight(&Exponent::new(s, den)?, trunc.horizon);
        }
        let mut terms = Vec::new();
        let mut emit = |s: i64, acc: &Accumulator| -> Result<()> {
            let c = acc.settled();
            if c != Complex64::new(0.0, 0.0) {
                terms.push((Exponent::new(s, den)?, c));
            }
            Ok(())
        };
        if dense.is_empty() {
            for (s, acc) in &kept {
                emit(*s, acc)?;
            }
        } else {
            for (i, acc) in dense.iter().enumerate() {
                emit(lo + i as i64, acc)?;
            }
        }
        Ok(GenSeries { terms, trunc, tail })
    }

    /// `g^<m>`, the m-fold convolution power, truncated after every step.
    pub fn conv_pow(&self, m: usize) -> Result<GenSeries> {
        if m == 0 {
            return Err(Error::UnsupportedConvolutionPower(0));
        }
        // square-and-multiply keeps the number of truncating products at O(log m)
        let mut result: Option<GenSeries> = None;
        let mut base = self.clone();
        let mut k = m;
        loop {
            if k & 1 == 1 {
                result = Some(match result {
                    None => base.clone(),
                    Some(r) => r.conv(&base)?,
                });
            }
            k >>= 1;
            if k == 0 {
                break;
            }
            base = base.conv(&base)?;
        }
        Ok(result.expect("m >= 1"))
    }

    /// Term-wise `d^i/dt^i h_mu = h_(mu-i)`; integer atoms with `mu <= i` vanish.
    pub fn derivative(&self, i: usize) -> Result<GenSeries> {
        if i == 0 {
            return Ok(self.clone());
        }
        let shift = Exponent::integer(i as i64);
        let mut terms = Vec::with_capacity(self.terms.len());
        for &(mu, c) in &self.terms {
            if mu <= shift {
                if mu.is_integer() {
                    continue;
                }
                return Err(Error::DerivativeLeavesDomain { exponent: mu, order: i });
            }
            terms.push((mu.checked_sub(&shift)?, c));
        }
        let trunc = Truncation {
            mu_max: self.trunc.mu_max.checked_sub(&shift)?,
            horizon: self.trunc.horizon,
        };
        Ok(GenSeries { terms, trunc, tail: self.tail })
    }

    /// `(d^i f/dt^i)(0)`: the coefficient of `h_(i+1)`.
    pub fn deriv_at_zero(&self, i: usize) -> Result<Complex64> {
        let target = Exponent::integer(i as i64 + 1);
        let mut value = Complex64::new(0.0, 0.0);
        for &(mu, c) in &self.terms {
            if mu == target {
                value = c;
            } else if mu < target && !mu.is_integer() {
                return Err(Error::ProjectorSingular { exponent: mu, order: i });
            }
        }
        Ok(value)
    }

    pub fn to_records(&self) -> Vec<SeriesRecord> {
        self.terms
            .iter()
            .map(|(e, c)| SeriesRecord { num: e.numer(), den: e.denom(), re: c.re, im: c.im })
            .collect()
    }

    pub fn from_records(records: &[SeriesRecord], trunc: Truncation) -> Result<Self> {
        let terms = records
            .iter()
            .map(|r| Ok((Exponent::new(r.num, r.den)?, Complex64::new(r.re, r.im))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(terms, trunc)
    }

    fn merge(&self, other: &GenSeries, sign: f64) -> GenSeries {
        let trunc = self.trunc.meet(&other.trunc);
        let mut map: BTreeMap<Exponent, Accumulator> = BTreeMap::new();
        for &(e, c) in &self.terms {
            map.entry(e).or_default().push(c);
        }
        for &(e, c) in &other.terms {
            map.entry(e).or_default().push(c * sign);
        }
        Self::from_acc(map, trunc, self.tail + other.tail)
    }
}

impl Serialize for GenSeries {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_records().serialize(serializer)
    }
}

impl fmt::Debug for GenSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GenSeries[")?;
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({}{:+}i)h_{}", c.re, c.im, e)?;
        }
        write!(f, "; mu_max={}, T={}]", self.trunc.mu_max, self.trunc.horizon)
    }
}

impl Add for &GenSeries {
    type Output = GenSeries;
    fn add(self, rhs: &GenSeries) -> GenSeries {
        self.merge(rhs, 1.0)
    }
}

impl Sub for &GenSeries {
    type Output = GenSeries;
    fn sub(self, rhs: &GenSeries) -> GenSeries {
        self.merge(rhs, -1.0)
    }
}

impl Neg for &GenSeries {
    type Output = GenSeries;
    fn neg(self) -> GenSeries {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

/// Largest `|a_mu - b_mu|` over exponents up to `upto` (default: the smaller cap).
pub fn max_abs_deviation(a: &GenSeries, b: &GenSeries, upto: Option<Exponent>) -> f64 {
    deviation(a, b, upto, false)
}

/// Largest `|a_mu - b_mu| / max(1, |a_mu|, |b_mu|)` over exponents up to `upto`
/// (default: the smaller cap).
pub fn max_relative_deviation(a: &GenSeries, b: &GenSeries, upto: Option<Exponent>) -> f64 {
    deviation(a, b, upto, true)
}

fn deviation(a: &GenSeries, b: &GenSeries, upto: Option<Exponent>, relative: bool) -> f64 {
    let cap = upto.unwrap_or_else(|| a.mu_max().min(b.mu_max()));
    let mut exps: Vec<Exponent> = a.exponents().chain(b.exponents()).copied().filter(|e| *e <= cap).collect();
    exps.sort();
    exps.dedup();
    exps.iter()
        .map(|e| {
            let (x, y) = (a.coeff(e), b.coeff(e));
            let d = (x - y).norm();
            if relative {
                d / 1f64.max(x.norm()).max(y.norm())
            } else {
                d
            }
        })
        .fold(0.0, f64::max)
}
