//! Compensated complex accumulation: sums of terms and products carried in double-double
//! form, so a coefficient is rounded once at the end instead of once per contribution.

use num_complex::Complex64;

use crate::series::NOISE_LEVEL;

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn split(a: f64) -> (f64, f64) {
    // 2^27 + 1
    let c = 134_217_729.0 * a;
    let hi = c - (c - a);
    (hi, a - hi)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    if !p.is_finite() {
        return (p, 0.0);
    }
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    (p, ((ah * bh - p) + ah * bl + al * bh) + al * bl)
}

#[derive(Default, Clone, Copy, Debug)]
pub(crate) struct Accumulator {
    re: f64,
    re_err: f64,
    im: f64,
    im_err: f64,
    mag: f64,
    count: u32,
}

impl Accumulator {
    #[inline]
    fn add_re(&mut self, x: f64, err: f64) {
        let (s, e) = two_sum(self.re, x);
        self.re = s;
        self.re_err += e + err;
    }

    #[inline]
    fn add_im(&mut self, x: f64, err: f64) {
        let (s, e) = two_sum(self.im, x);
        self.im = s;
        self.im_err += e + err;
    }

    pub(crate) fn push(&mut self, c: Complex64) {
        self.add_re(c.re, 0.0);
        self.add_im(c.im, 0.0);
        self.mag += c.norm();
        self.count += 1;
    }

    /// Adds `a * b` with the rounding error of every partial product kept.
    pub(crate) fn push_product(&mut self, a: Complex64, b: Complex64) {
        let (p, e) = two_prod(a.re, b.re);
        self.add_re(p, e);
        let (p, e) = two_prod(-a.im, b.im);
        self.add_re(p, e);
        let (p, e) = two_prod(a.re, b.im);
        self.add_im(p, e);
        let (p, e) = two_prod(a.im, b.re);
        self.add_im(p, e);
        self.mag += a.norm() * b.norm();
        self.count += 1;
    }

    pub(crate) fn value(&self) -> Complex64 {
        Complex64::new(self.re + self.re_err, self.im + self.im_err)
    }

    /// The value, or zero when it is below the rounding level its contributions can carry.
    pub(crate) fn settled(&self) -> Complex64 {
        let v = self.value();
        let s = v.norm();
        let level = NOISE_LEVEL.max(self.count as f64 * f64::EPSILON);
        if s == 0.0 || s <= level * self.mag {
            Complex64::new(0.0, 0.0)
        } else {
            v
        }
    }
}
