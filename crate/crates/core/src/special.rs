//! Gamma function and the power atom `h_mu(t) = t^(mu-1)/Gamma(mu)`.

/// Gamma(x) for real `x`. Nonpositive integers return `f64::INFINITY`.
pub fn gamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return f64::INFINITY;
    }
    libm::tgamma(x)
}

/// ln |Gamma(x)|.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// The power atom `h_mu(t) = t^(mu - 1) / Gamma(mu)` for `t > 0`, `mu > 0`.
pub fn atom(mu: f64, t: f64) -> f64 {
    if mu <= 150.0 {
        t.powf(mu - 1.0) / gamma(mu)
    } else {
        ((mu - 1.0) * t.ln() - ln_gamma(mu)).exp()
    }
}

/// `int_0^T h_mu(t) dt = T^mu / Gamma(mu + 1)`.
pub fn atom_integral(mu: f64, horizon: f64) -> f64 {
    atom(mu + 1.0, horizon)
}
