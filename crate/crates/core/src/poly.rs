//! Complex polynomials in ascending coefficient order, simultaneous root finding
//! with multiplicity detection, and partial-fraction decomposition of `Q/P`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

const TRIM_LEVEL: f64 = 1e-14;
const MERGE_RADIUS: f64 = 1e-7;
const CLUSTER_RADIUS: f64 = 1e-3;
const CLUSTER_TAYLOR_LEVEL: f64 = 1e-11;
const MAX_ITER: usize = 1000;

fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

impl Polynomial {
    /// Leading coefficients below `1e-14` of the largest magnitude are removed.
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        let top = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.norm() <= TRIM_LEVEL * top) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(czero());
        }
        Polynomial { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// `c * prod_j (z - r_j)`.
    pub fn from_roots(c: Complex64, roots: &[Complex64]) -> Self {
        let mut p = vec![c];
        for r in roots {
            let mut next = vec![czero(); p.len() + 1];
            for (i, a) in p.iter().enumerate() {
                next[i + 1] += a;
                next[i] -= a * r;
            }
            p = next;
        }
        Self::new(p)
    }

    pub fn constant(c: Complex64) -> Self {
        Polynomial { coeffs: vec![c] }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> Complex64 {
        *self.coeffs.last().expect("nonempty")
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == czero())
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(czero(), |acc, c| acc * z + c)
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() == 1 {
            return Polynomial::constant(czero());
        }
        Polynomial {
            coeffs: self.coeffs.iter().enumerate().skip(1).map(|(i, c)| c * i as f64).collect(),
        }
    }

    /// `sum_i |c_i| |z|^i`, the rounding scale of `eval(z)`.
    pub fn magnitude_at(&self, z: Complex64) -> f64 {
        let r = z.norm();
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }

    /// Taylor coefficients of `P(c + w)` in `w` up to order `order - 1`, with their
    /// rounding scales `sum_i |c_i| binom(i, j) |c|^(i-j)`.
    pub fn taylor_at(&self, c: Complex64, order: usize) -> (Vec<Complex64>, Vec<f64>) {
        let mut vals = self.coeffs.clone();
        let mut mags: Vec<f64> = self.coeffs.iter().map(|x| x.norm()).collect();
        let r = c.norm();
        let mut out = Vec::with_capacity(order);
        let mut scales = Vec::with_capacity(order);
        // repeated synthetic division by (z - c)
        for _ in 0..order.min(self.coeffs.len()) {
            let n = vals.len();
            for i in (0..n - 1).rev() {
                let hi = vals[i + 1];
                vals[i] += hi * c;
                mags[i] += mags[i + 1] * r;
            }
            out.push(vals[0]);
            scales.push(mags[0]);
            vals.remove(0);
            mags.remove(0);
        }
        out.resize(order, czero());
        scales.resize(order, 0.0);
        (out, scales)
    }

    pub fn scale(&self, s: Complex64) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        Polynomial::new(
            (0..n)
                .map(|i| {
                    self.coeffs.get(i).copied().unwrap_or_default()
                        - other.coeffs.get(i).copied().unwrap_or_default()
                })
                .collect(),
        )
    }

    /// Roots with multiplicities, sorted by real then imaginary part.
    pub fn roots(&self) -> Result<RootSet> {
        find_roots(self)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Root {
    pub value: Complex64,
    pub multiplicity: usize,
    /// `|P(value)|`
    pub residual: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RootSet {
    pub roots: Vec<Root>,
    pub warnings: Vec<String>,
}

fn find_roots(p: &Polynomial) -> Result<RootSet> {
    let n = p.degree();
    if n == 0 {
        return Err(Error::InvalidArgument("constant polynomial has no roots".into()));
    }
    let lead = p.leading();
    let monic = Polynomial { coeffs: p.coeffs.iter().map(|c| c / lead).collect() };
    let dmonic = monic.derivative();

    let mut z = initial_guesses(&monic);
    let mut settled = vec![false; n];
    for _ in 0..MAX_ITER {
        let mut moved = false;
        for k in 0..n {
            if settled[k] {
                continue;
            }
            let pk = monic.eval(z[k]);
            if pk.norm() <= 4.0 * f64::EPSILON * monic.magnitude_at(z[k]) {
                settled[k] = true;
                continue;
            }
            let ratio = pk / dmonic.eval(z[k]);
            let s: Complex64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| Complex64::new(1.0, 0.0) / (z[k] - z[j]))
                .sum();
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            if !(w.re.is_finite() && w.im.is_finite()) {
                continue;
            }
            z[k] -= w;
            if w.norm() <= 2.0 * f64::EPSILON * (1.0 + z[k].norm()) {
                settled[k] = true;
            } else {
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }

    let worst = z
        .iter()
        .map(|&zk| monic.eval(zk).norm() / monic.magnitude_at(zk).max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    if !settled.iter().all(|&s| s) && !(worst <= 1e-6) {
        return Err(Error::RootFindingFailed { residual: worst });
    }

    let mut warnings = Vec::new();
    let groups = cluster(&monic, &z, &mut warnings);
    let mut roots: Vec<Root> = groups
        .into_iter()
        .map(|(center, m)| {
            let value = polish(&monic, center, m);
            Root { value, multiplicity: m, residual: p.eval(value).norm() }
        })
        .collect();
    roots.sort_by(|a, b| {
        a.value.re.total_cmp(&b.value.re).then(a.value.im.total_cmp(&b.value.im))
    });
    Ok(RootSet { roots, warnings })
}

fn initial_guesses(monic: &Polynomial) -> Vec<Complex64> {
    let n = monic.degree();
    let r = (0..n)
        .map(|i| monic.coeffs[i].norm().powf(1.0 / (n - i) as f64))
        .fold(0.0, f64::max);
    let r = if r > 0.0 { r } else { 1.0 };
    (0..n)
        .map(|k| Complex64::from_polar(r, std::f64::consts::TAU * k as f64 / n as f64 + 0.4))
        .collect()
}

fn find(parent: &mut [usize], i: usize) -> usize {
    let mut r = i;
    while parent[r] != r {
        r = parent[r];
    }
    parent[i] = r;
    r
}

fn groups_within(points: &[(Complex64, usize)], radius: f64) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            let d = (points[i].0 - points[j].0).norm();
            if d <= radius * (1.0 + points[i].0.norm().max(points[j].0.norm())) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = out.len();
            out.push(Vec::new());
        }
        out[slot[r]].push(i);
    }
    out
}

fn centroid(points: &[(Complex64, usize)], idx: &[usize]) -> (Complex64, usize) {
    let m: usize = idx.iter().map(|&i| points[i].1).sum();
    let s: Complex64 = idx.iter().map(|&i| points[i].0 * points[i].1 as f64).sum();
    (s / m as f64, m)
}

// Strict merge within 1e-7(1+|z|), then wider groups whose polished centroid is a
// numerical root of the combined multiplicity.
fn cluster(monic: &Polynomial, z: &[Complex64], warnings: &mut Vec<String>) -> Vec<(Complex64, usize)> {
    let points: Vec<(Complex64, usize)> = z.iter().map(|&v| (v, 1)).collect();
    let strict: Vec<(Complex64, usize)> = groups_within(&points, MERGE_RADIUS)
        .iter()
        .map(|g| centroid(&points, g))
        .collect();

    let mut out = Vec::new();
    for cand in groups_within(&strict, CLUSTER_RADIUS) {
        if cand.len() == 1 {
            out.push(strict[cand[0]]);
            continue;
        }
        let (c0, m) = centroid(&strict, &cand);
        let c = polish(monic, c0, m);
        let (t, scale) = monic.taylor_at(c, m);
        let degenerate = t.iter().zip(&scale).all(|(v, s)| v.norm() <= CLUSTER_TAYLOR_LEVEL * s);
        if degenerate {
            let spread = cand.iter().map(|&i| (strict[i].0 - c).norm()).fold(0.0, f64::max);
            warnings.push(format!(
                "ill-conditioned root cluster near {:.6}{:+.6}i merged into multiplicity {m} (spread {spread:.2e})",
                c.re, c.im
            ));
            out.push((c, m));
        } else {
            out.extend(cand.iter().map(|&i| strict[i]));
        }
    }
    out
}

// Newton on P^(m-1), where a root of multiplicity m is simple; kept only if it helps.
fn polish(monic: &Polynomial, start: Complex64, m: usize) -> Complex64 {
    let mut q = monic.clone();
    for _ in 1..m {
        q = q.derivative();
    }
    let dq = q.derivative();
    let mut best = start;
    let mut best_res = q.eval(start).norm();
    let mut x = start;
    for _ in 0..8 {
        let d = dq.eval(x);
        if d == czero() {
            break;
        }
        x -= q.eval(x) / d;
        let r = q.eval(x).norm();
        if !(r < best_res) {
            break;
        }
        best = x;
        best_res = r;
    }
    best
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Pole {
    pub lambda: Complex64,
    pub multiplicity: usize,
    /// `coeffs[i-1]` multiplies `1/(z - lambda)^i`.
    pub coeffs: Vec<Complex64>,
    pub residual: f64,
}

/// `Q/P = constant + sum_j sum_i c_ij / (z - lambda_j)^i`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartialFractionForm {
    pub poles: Vec<Pole>,
    pub constant: Complex64,
    pub warnings: Vec<String>,
}

impl PartialFractionForm {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = self.constant;
        for pole in &self.poles {
            let inv = Complex64::new(1.0, 0.0) / (z - pole.lambda);
            let mut pw = inv;
            for c in &pole.coeffs {
                acc += c * pw;
                pw *= inv;
            }
        }
        acc
    }
}

pub fn partial_fractions(q: &Polynomial, p: &Polynomial) -> Result<PartialFractionForm> {
    if p.degree() == 0 {
        return partial_fractions_with_roots(q, p, &RootSet::default());
    }
    partial_fractions_with_roots(q, p, &p.roots()?)
}

/// As [`partial_fractions`], reusing roots already found for `p`.
pub fn partial_fractions_with_roots(q: &Polynomial, p: &Polynomial, rootset: &RootSet) -> Result<PartialFractionForm> {
    if p.is_zero() {
        return Err(Error::InvalidArgument("zero denominator polynomial".into()));
    }
    if q.degree() > p.degree() {
        return Err(Error::ImproperRational { num: q.degree(), den: p.degree() });
    }
    let mut q = q.clone();
    let mut constant = czero();
    if q.degree() == p.degree() {
        constant = q.leading() / p.leading();
        let mut rem = q.sub(&p.scale(constant)).coeffs;
        rem.truncate(p.degree());
        q = Polynomial::new(rem);
    }
    let roots = &rootset.roots;
    if roots.iter().map(|r| r.multiplicity).sum::<usize>() != p.degree() {
        return Err(Error::InvalidArgument("root multiplicities do not match the degree".into()));
    }
    let mut poles = Vec::with_capacity(roots.len());
    for (j, root) in roots.iter().enumerate() {
        let m = root.multiplicity;
        // Taylor series of D_j(lambda_j + w) = p_m prod_(l != j) (w + lambda_j - lambda_l)^m_l
        let mut d = vec![czero(); m];
        d[0] = p.leading();
        for (l, other) in roots.iter().enumerate() {
            if l == j {
                continue;
            }
            let shift = root.value - other.value;
            for _ in 0..other.multiplicity {
                for i in (0..m).rev() {
                    let lower = if i > 0 { d[i - 1] } else { czero() };
                    d[i] = d[i] * shift + lower;
                }
            }
        }
        let (qt, _) = q.taylor_at(root.value, m);
        // series quotient qt / d up to order m - 1
        let mut quot = vec![czero(); m];
        for k in 0..m {
            let mut s = qt[k];
            for i in 1..=k {
                s -= d[i] * quot[k - i];
            }
            quot[k] = s / d[0];
        }
        // c_i = [w^(m-i)]
        let coeffs = (1..=m).map(|i| quot[m - i]).collect();
        poles.push(Pole { lambda: root.value, multiplicity: m, coeffs, residual: root.residual });
    }
    Ok(PartialFractionForm { poles, constant, warnings: rootset.warnings.clone() })
}
