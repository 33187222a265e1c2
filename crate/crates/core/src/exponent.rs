//! Exact rational exponents for power atoms.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A reduced rational number `num/den` with `den > 0`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Exponent(Ratio<i64>);

impl Exponent {
    pub fn new(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::MalformedExponent(format!("{num}/{den}: zero denominator")));
        }
        if num == i64::MIN || den == i64::MIN {
            return Err(Error::ExponentOverflow);
        }
        Ok(Exponent(Ratio::new(num, den)))
    }

    pub const fn integer(n: i64) -> Self {
        Exponent(Ratio::new_raw(n, 1))
    }

    pub fn numer(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i64 {
        *self.0.denom()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(self.numer() as f64 / self.denom() as f64)
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn checked_add(&self, other: &Exponent) -> Result<Exponent> {
        self.0.checked_add(&other.0).map(Exponent).ok_or(Error::ExponentOverflow)
    }

    pub fn checked_sub(&self, other: &Exponent) -> Result<Exponent> {
        self.0.checked_sub(&other.0).map(Exponent).ok_or(Error::ExponentOverflow)
    }

    pub fn checked_mul_int(&self, m: i64) -> Result<Exponent> {
        self.0
            .checked_mul(&Ratio::from_integer(m))
            .map(Exponent)
            .ok_or(Error::ExponentOverflow)
    }

    /// Largest integer `<= self`.
    pub fn floor(&self) -> i64 {
        self.0.floor().to_integer()
    }

    /// `floor(self * scale)` for a positive integer scale, without overflow.
    pub(crate) fn floor_scaled(&self, scale: i64) -> i64 {
        let n = self.numer() as i128 * scale as i128;
        let d = self.denom() as i128;
        Integer::div_floor(&n, &d).clamp(i64::MIN as i128, i64::MAX as i128) as i64
    }

    /// Greatest common divisor of two positive rationals: `gcd(a/b, c/d) = gcd(a d', c b') / lcm(b, d)`.
    pub fn gcd(&self, other: &Exponent) -> Result<Exponent> {
        let l = self.denom().checked_lcm_ext(other.denom())?;
        let a = self.numer().checked_mul(l / self.denom()).ok_or(Error::ExponentOverflow)?;
        let c = other.numer().checked_mul(l / other.denom()).ok_or(Error::ExponentOverflow)?;
        Exponent::new(a.gcd(&c), l)
    }
}

trait CheckedLcm {
    fn checked_lcm_ext(self, other: Self) -> Result<i64>;
}

impl CheckedLcm for i64 {
    fn checked_lcm_ext(self, other: i64) -> Result<i64> {
        let g = self.gcd(&other);
        (self / g).checked_mul(other).map(i64::abs).ok_or(Error::ExponentOverflow)
    }
}

/// Least common multiple of the denominators, overflow-checked.
pub(crate) fn common_denominator<'a, I>(exps: I) -> Result<i64>
where
    I: IntoIterator<Item = &'a Exponent>,
{
    exps.into_iter().try_fold(1i64, |acc, e| acc.checked_lcm_ext(e.denom()))
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom() == 1 {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl serde::Serialize for Exponent {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::MalformedExponent(s.to_string());
        let s = s.trim();
        match s.split_once('/') {
            Some((n, d)) => {
                let n: i64 = n.trim().parse().map_err(|_| bad())?;
                let d: i64 = d.trim().parse().map_err(|_| bad())?;
                if d == 0 {
                    return Err(bad());
                }
                Exponent::new(n, d)
            }
            None => s.parse::<i64>().map(Exponent::integer).map_err(|_| bad()),
        }
    }
}

impl From<i64> for Exponent {
    fn from(n: i64) -> Self {
        Exponent::integer(n)
    }
}

/// Shorthand for `Exponent::new(num, den).unwrap()` on literal values.
///
/// Panics on a zero denominator.
pub fn ex(num: i64, den: i64) -> Exponent {
    Exponent::new(num, den).expect("literal exponent")
}
