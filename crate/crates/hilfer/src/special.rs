//! Gamma-family helpers shared by the modules.

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// ln|Γ(x)|.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// sin(πx) with argument reduction done before the multiplication by π.
pub fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (0.5 * x).round();
    if r == 0.0 || r.abs() == 1.0 {
        return 0.0;
    }
    (std::f64::consts::PI * r).sin()
}

/// ln|1/Γ(x)| and the sign of 1/Γ(x). Poles give `(-inf, 0.0)`.
pub fn ln_rgamma(x: f64) -> (f64, f64) {
    if x > 0.0 {
        return (-ln_gamma(x), 1.0);
    }
    if x == x.floor() {
        return (f64::NEG_INFINITY, 0.0);
    }
    // reflection: 1/Γ(x) = sin(πx) Γ(1-x) / π
    let s = sin_pi(x);
    (ln_gamma(1.0 - x) + (s.abs() / std::f64::consts::PI).ln(), s.signum())
}

/// 1/Γ(x), zero at the poles.
pub fn rgamma(x: f64) -> f64 {
    if x > 0.0 && x < 170.0 {
        return 1.0 / gamma(x);
    }
    let (l, s) = ln_rgamma(x);
    if s == 0.0 {
        0.0
    } else {
        s * l.exp()
    }
}

/// Euler beta function for positive arguments.
pub fn beta(a: f64, b: f64) -> f64 {
    (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp()
}

/// Regularized incomplete beta I_x(a, b).
pub fn beta_reg(a: f64, b: f64, x: f64) -> f64 {
    statrs::function::beta::beta_reg(a, b, x.clamp(0.0, 1.0))
}
