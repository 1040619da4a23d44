//! Mittag-Leffler functions
//!
//! E_{α,β}(z) = Σ_k z^k / Γ(αk + β) for real arguments. The power series is
//! used near the origin, switching to multiprecision arithmetic when the
//! alternating terms cancel too much for doubles. Large negative arguments go
//! through the algebraic asymptotic expansion or a parabolic contour integral.

mod bigfloat;
mod cheb;

pub use cheb::MlTable;

use crate::error::{domain, Error, Result};
use crate::special::{ln_gamma, ln_rgamma, rgamma};
use num_complex::Complex64;

pub const DEFAULT_TOL: f64 = 1e-14;
pub const SERIES_RADIUS: f64 = 5.0;
/// Minimum number of series terms before giving up.
pub const MIN_TERMS: usize = 400;
/// Series beyond this peak index are refused.
const MAX_PEAK: f64 = 50_000.0;
/// Largest peak index for which `ml_global` still prefers the series
/// outside the series radius.
const EXTENDED_PEAK: f64 = 2_000.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MlfParams {
    pub alpha: f64,
    pub beta_p: f64,
    pub tol: f64,
    pub series_radius: f64,
}

impl MlfParams {
    pub fn new(alpha: f64, beta_p: f64) -> Result<Self> {
        Self::with_tol(alpha, beta_p, DEFAULT_TOL)
    }

    pub fn with_tol(alpha: f64, beta_p: f64, tol: f64) -> Result<Self> {
        let p = MlfParams {
            alpha,
            beta_p,
            tol,
            series_radius: SERIES_RADIUS,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return domain(format!("alpha must be positive, got {}", self.alpha));
        }
        if !(self.beta_p > 0.0 && self.beta_p.is_finite()) {
            return domain(format!("beta must be positive, got {}", self.beta_p));
        }
        if !(self.tol > 0.0 && self.tol < 1e-2) {
            return domain(format!("tol must lie in (0, 1e-2), got {}", self.tol));
        }
        if !(self.series_radius > 0.0) {
            return domain("series radius must be positive");
        }
        Ok(())
    }
}

/// ln|z^k / Γ(αk+β)|.
fn log_term(alpha: f64, beta: f64, lnz: f64, k: usize) -> f64 {
    k as f64 * lnz - ln_gamma(alpha * k as f64 + beta)
}

/// Index of the largest series term.
fn peak_index(alpha: f64, beta: f64, az: f64) -> f64 {
    ((az.powf(1.0 / alpha) - beta) / alpha).max(0.0)
}

/// Term cap: the bulk of the series sits around the peak with a width
/// growing like its square root, so the cap scales with the peak.
fn term_cap(alpha: f64, beta: f64, az: f64) -> usize {
    let pk = peak_index(alpha, beta, az);
    MIN_TERMS + (3.0 * pk + 20.0 * (pk / alpha).sqrt()) as usize
}

/// Power series evaluation.
///
/// Doubles are used when the summed magnitudes allow it; otherwise the sum
/// is redone with enough working precision to absorb the cancellation.
pub fn ml_series(p: &MlfParams, z: f64) -> Result<f64> {
    p.validate()?;
    if !z.is_finite() {
        return domain("non-finite argument");
    }
    let (a, b) = (p.alpha, p.beta_p);
    if z == 0.0 {
        return Ok(rgamma(b));
    }
    let az = z.abs();
    let peak = peak_index(a, b, az);
    if peak > MAX_PEAK {
        return domain(format!("|z| = {az} is too large for the power series"));
    }
    let cap = term_cap(a, b, az);
    let lnz = az.ln();
    let neg = z < 0.0;

    // Neumaier summation
    let mut s = 0.0f64;
    let mut c = 0.0f64;
    let mut abs_sum = 0.0f64;
    let mut err = 0.0f64;
    let mut max_log = f64::NEG_INFINITY;
    let mut converged = false;
    let mut k = 0usize;
    while k < cap {
        let x = a * k as f64 + b;
        let kl = k as f64 * lnz;
        let (mag, rel) = if x < 170.0 && kl < 700.0 {
            (az.powi(k as i32) * rgamma(x), 8.0)
        } else {
            let l = kl - ln_gamma(x);
            (l.exp(), 8.0 + l.abs() + kl)
        };
        let t = if neg && k % 2 == 1 { -mag } else { mag };
        max_log = max_log.max(log_term(a, b, lnz, k));
        let u = s + t;
        if s.abs() >= t.abs() {
            c += (s - u) + t;
        } else {
            c += (t - u) + s;
        }
        s = u;
        abs_sum += mag;
        err += mag * rel * f64::EPSILON;
        k += 1;
        let total = s + c;
        if (k as f64) > peak + 1.0 && mag <= p.tol * 1e-2 * total.abs() {
            converged = true;
            break;
        }
        if mag == 0.0 && (k as f64) > peak + 1.0 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Divergence(format!(
            "{cap} terms at z = {z} without reaching tol {}",
            p.tol
        )));
    }
    let total = s + c;
    let _ = abs_sum;
    if err <= 0.5 * p.tol * total.abs() {
        return Ok(total);
    }
    bigfloat::series(a, b, z, p.tol, cap, max_log, peak)
}

/// Sum of the algebraic expansion -Σ_{k≥1} z^{-k}/Γ(β-αk) at z = -y,
/// returned only when its smallest term is below tol relative to the sum.
///
/// Terms are judged by the envelope Γ(1-β+αk)/(π y^k) ≥ |1/Γ(β-αk)| y^{-k}
/// so that terms that are small only because β-αk sits near a pole of Γ do
/// not end the sum early.
fn ml_asymptotic(alpha: f64, beta: f64, y: f64, tol: f64) -> Option<f64> {
    let lny = y.ln();
    let mut s = 0.0f64;
    let mut prev = f64::INFINITY;
    let mut smallest = f64::INFINITY;
    for k in 1..2000usize {
        let arg = beta - alpha * k as f64;
        let env = (ln_gamma(1.0 - arg) - std::f64::consts::PI.ln() - k as f64 * lny).exp();
        if env > prev {
            break;
        }
        prev = env;
        smallest = env;
        let near_pole = arg <= 0.0 && (arg - arg.round()).abs() <= 1e-12 * arg.abs().max(1.0);
        if !near_pole {
            let (lr, sg) = ln_rgamma(arg);
            // -(-y)^{-k} = -(-1)^k y^{-k}
            let sign = if k % 2 == 0 { -sg } else { sg };
            s += sign * (lr - k as f64 * lny).exp();
        }
        if s != 0.0 && env < 1e-3 * tol * s.abs() {
            break;
        }
    }
    if alpha == 1.0 {
        // exponentially small part e^{-y} y^{1-β} not captured by the expansion
        smallest = smallest.max((-y + (1.0 - beta) * lny).exp());
    }
    if s != 0.0 && smallest <= tol * s.abs() {
        Some(s)
    } else {
        None
    }
}

/// E_{α,β}(x) for x ≤ 0 and 0 < α ≤ 1.
pub fn ml_global(p: &MlfParams, x: f64) -> Result<f64> {
    p.validate()?;
    if x > 0.0 || x.is_nan() {
        return domain(format!("ml_global needs x <= 0, got {x}"));
    }
    if p.alpha > 1.0 {
        return domain(format!("ml_global needs alpha in (0,1], got {}", p.alpha));
    }
    let (a, b) = (p.alpha, p.beta_p);
    if x == 0.0 {
        return Ok(rgamma(b));
    }
    if x == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    let y = -x;
    if a == 1.0 && b == 1.0 {
        return Ok(x.exp());
    }
    if y <= p.series_radius {
        return ml_series(p, x);
    }
    if let Some(v) = ml_asymptotic(a, b, y, p.tol) {
        return Ok(v);
    }
    // Between the series radius and the asymptotic regime the peak index
    // stays small, so the extended-precision series is cheap.
    if peak_index(a, b, y) <= EXTENDED_PEAK {
        return ml_series(p, x);
    }
    ml_contour(p, x)
}

/// E_{α,β}(z) for any real z: `ml_global` on the negative axis, the series
/// (no cancellation there) on the positive one.
pub fn ml_eval(p: &MlfParams, z: f64) -> Result<f64> {
    if z <= 0.0 && p.alpha <= 1.0 {
        ml_global(p, z)
    } else {
        ml_series(p, z)
    }
}

/// Node count of the contour rule.
pub const CONTOUR_NODES: usize = 20;

/// E_{α,β}(x), x ≤ 0, as the inverse Laplace transform of
/// s^{α-β}/(s^α - x) on the parabola s(u) = μ(1+iu)².
pub fn ml_contour(p: &MlfParams, x: f64) -> Result<f64> {
    ml_contour_nodes(p, x, CONTOUR_NODES)
}

/// `ml_contour` with an explicit node count.
pub fn ml_contour_nodes(p: &MlfParams, x: f64, n: usize) -> Result<f64> {
    p.validate()?;
    if x > 0.0 || !x.is_finite() {
        return domain(format!("contour route needs finite x <= 0, got {x}"));
    }
    if p.alpha > 1.0 {
        return domain("contour route needs alpha in (0,1]");
    }
    if n < 8 {
        return domain("contour needs at least 8 nodes");
    }
    let (a, b) = (p.alpha, p.beta_p);
    let (h, mu) = contour_parameters(n);
    let g = |u: f64| -> Complex64 {
        let w = Complex64::new(1.0, u);
        let s = mu * w * w;
        let ds = Complex64::new(0.0, 2.0 * mu) * w;
        let f = s.powf(a - b) / (s.powf(a) - x);
        s.exp() * f * ds
    };
    let mut acc = 0.5 * g(0.0).im;
    for k in 1..=n {
        acc += g(k as f64 * h).im;
    }
    let v = acc * h / std::f64::consts::PI;
    if !v.is_finite() {
        return Err(Error::Contour(format!("non-finite contour sum at x = {x}")));
    }
    Ok(v)
}

/// Step and scale of the parabolic rule with `n` nodes on the half line.
pub fn contour_parameters(n: usize) -> (f64, f64) {
    let n = n as f64;
    (3.0 / n, std::f64::consts::PI * n / 12.0)
}

/// sup over x ∈ [0, domain_max] of x^μ |E_{α,β}(-x)|: log-spaced scan
/// (x = 0 included) refined by golden-section search around the best point.
pub fn ml_weighted(p: &MlfParams, mu: f64, domain_max: f64) -> Result<f64> {
    if mu < 0.0 || mu.is_nan() {
        return domain(format!("weight exponent must be >= 0, got {mu}"));
    }
    if !(domain_max > 0.0) {
        return domain("domain_max must be positive");
    }
    let f = |x: f64| -> Result<f64> {
        let e = ml_global(p, -x)?.abs();
        Ok(if x == 0.0 {
            if mu == 0.0 {
                e
            } else {
                0.0
            }
        } else {
            x.powf(mu) * e
        })
    };
    const SCAN: usize = 400;
    let lo = (domain_max * 1e-8).min(1e-6);
    let ratio = (domain_max / lo).ln() / (SCAN - 1) as f64;
    let mut xs = Vec::with_capacity(SCAN + 1);
    xs.push(0.0);
    for i in 0..SCAN {
        xs.push((lo.ln() + ratio * i as f64).exp().min(domain_max));
    }
    let mut best = 0usize;
    let mut vals = Vec::with_capacity(xs.len());
    for (i, &x) in xs.iter().enumerate() {
        let v = f(x)?;
        if v > vals.get(best).copied().unwrap_or(f64::NEG_INFINITY) {
            best = i;
        }
        vals.push(v);
    }
    let mut sup = vals[best];
    if best > 0 {
        let mut l = xs[best - 1];
        let mut r = xs[(best + 1).min(xs.len() - 1)];
        let gr = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = r - gr * (r - l);
        let mut d = l + gr * (r - l);
        let mut fc = f(c)?;
        let mut fd = f(d)?;
        for _ in 0..80 {
            if fc > fd {
                r = d;
                d = c;
                fd = fc;
                c = r - gr * (r - l);
                fc = f(c)?;
            } else {
                l = c;
                c = d;
                fc = fd;
                d = l + gr * (r - l);
                fd = f(d)?;
            }
            if (r - l) <= 1e-12 * r.abs().max(1e-300) {
                break;
            }
        }
        sup = sup.max(fc).max(fd);
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(a: f64, b: f64) -> MlfParams {
        MlfParams::new(a, b).unwrap()
    }

    #[test]
    fn series_exponential() {
        let v = ml_series(&p(1.0, 1.0), 1.0).unwrap();
        assert!((v - std::f64::consts::E).abs() <= 1e-12);
    }

    #[test]
    fn series_at_zero() {
        let v = ml_series(&p(0.7, 1.3), 0.0).unwrap();
        assert_eq!(v, rgamma(1.3));
    }

    #[test]
    fn series_half_order_erfc() {
        // E_{1/2}(-1) = e·erfc(1)
        let want = std::f64::consts::E * libm::erfc(1.0);
        let v = ml_series(&p(0.5, 1.0), -1.0).unwrap();
        assert!((v - 0.4275835761558070).abs() < 1e-10);
        assert!((v - want).abs() < 1e-14);
    }

    #[test]
    fn global_exponential_cases() {
        let v = ml_global(&p(1.0, 1.0), -20.0).unwrap();
        assert!((v / (-20f64).exp() - 1.0).abs() < 1e-13);
        let v = ml_global(&p(1.0, 2.0), -3.0).unwrap();
        let want = (1.0 - (-3f64).exp()) / 3.0;
        assert!((v - want).abs() < 1e-14);
        for &x in &[-7.0, -30.0, -80.0, -500.0] {
            let v = ml_global(&p(1.0, 2.0), x).unwrap();
            let want = (1.0 - x.exp()) / -x;
            assert!((v / want - 1.0).abs() < 1e-13, "x={x}");
        }
    }

    #[test]
    fn global_rejects_bad_domain() {
        assert!(matches!(ml_global(&p(0.5, 1.0), 1.0), Err(Error::Domain(_))));
        assert!(matches!(ml_global(&p(1.5, 1.0), -1.0), Err(Error::Domain(_))));
        assert!(MlfParams::with_tol(0.5, 1.0, 0.5).is_err());
        assert!(MlfParams::new(0.0, 1.0).is_err());
    }

    #[test]
    fn half_order_large_argument_matches_erfcx() {
        // E_{1/2}(-y) = erfcx(y); for large y use the continued-fraction-free
        // asymptotic erfcx(y) ~ 1/(y√π) Σ (-1)^n (2n-1)!!/(2y²)^n
        for &y in &[10.0f64, 40.0, 1e3, 1e6] {
            let mut s = 0.0;
            let mut t = 1.0;
            for n in 0..60 {
                if n > 0 {
                    t *= -(2.0 * n as f64 - 1.0) / (2.0 * y * y);
                }
                if t.abs() < 1e-18 {
                    break;
                }
                s += t;
            }
            let want = s / (y * std::f64::consts::PI.sqrt());
            let v = ml_global(&p(0.5, 1.0), -y).unwrap();
            assert!((v / want - 1.0).abs() < 1e-12, "y={y} v={v} want={want}");
        }
    }

    #[test]
    fn contour_matches_series_inside_radius() {
        for &a in &[0.3, 0.5, 0.7, 0.9, 1.0] {
            for &b in &[a, 1.0, 2.0 * a + 1.0] {
                let pp = p(a, b);
                for i in 0..=10 {
                    let x = -0.5 * i as f64;
                    let s = ml_series(&pp, x).unwrap();
                    let c = ml_contour(&pp, x).unwrap();
                    assert!(
                        (s - c).abs() <= 1e-11 * s.abs().max(1e-3),
                        "a={a} b={b} x={x} s={s} c={c}"
                    );
                }
            }
        }
    }

    #[test]
    fn contour_matches_global_beyond_radius() {
        for &a in &[0.3, 0.6, 0.9] {
            for &b in &[a, 1.0, 2.0 * a + 1.0] {
                let pp = p(a, b);
                for &x in &[-6.0, -12.0, -30.0, -100.0] {
                    let g = ml_global(&pp, x).unwrap();
                    let c = ml_contour(&pp, x).unwrap();
                    assert!((g - c).abs() <= 1e-10 * g.abs(), "a={a} b={b} x={x}");
                }
            }
        }
    }

    #[test]
    fn continuity_at_switchover() {
        for &a in &[0.3, 0.5, 0.7, 0.9] {
            for &b in &[a, 1.0, 2.0 * a + 1.0] {
                let pp = p(a, b);
                let r = pp.series_radius;
                let inside = ml_global(&pp, -r).unwrap();
                let outside = ml_global(&pp, -r * (1.0 + 1e-12)).unwrap();
                assert!((inside - outside).abs() <= 10.0 * pp.tol * inside.abs() + 1e-12);
            }
        }
    }

    #[test]
    fn weighted_trivial_cases() {
        let v = ml_weighted(&p(0.5, 1.0), 0.0, 100.0).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
        let v = ml_weighted(&p(1.0, 1.0), 1.0, 50.0).unwrap();
        assert!((v - (-1f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn weighted_not_below_dense_scan() {
        // dense uniform scan as an independent estimate of the supremum
        let pp = p(0.6, 0.6);
        let sup = ml_weighted(&pp, 0.8, 100.0).unwrap();
        let mut dense: f64 = 0.0;
        let n = 20_000;
        for i in 1..=n {
            let x = 100.0 * (i as f64 / n as f64).powi(2);
            dense = dense.max(x.powf(0.8) * ml_global(&pp, -x).unwrap().abs());
        }
        assert!(sup >= dense * (1.0 - 1e-12));
        assert!(sup <= dense * (1.0 + 1e-5));
    }

    #[test]
    fn monotone_decreasing_in_unit_interval() {
        for &a in &[0.3, 0.6, 1.0] {
            let pp = p(a, 1.0);
            let mut prev = ml_global(&pp, 0.0).unwrap();
            assert_eq!(prev, 1.0);
            for i in 1..=10_000 {
                let x = -(i as f64) * 1e-2;
                let v = ml_global(&pp, x).unwrap();
                assert!(v < prev && v > 0.0, "a={a} x={x}");
                prev = v;
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn exp_identity(x in -50.0f64..0.0) {
            let v = ml_global(&p(1.0, 1.0), x).unwrap();
            prop_assert!((v / x.exp() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn shift_recurrence(a in 0.2f64..1.0, b in 0.2f64..2.5, x in -40.0f64..0.0) {
            // E_{α,β}(z) = z E_{α,β+α}(z) + 1/Γ(β)
            let lhs = ml_global(&p(a, b), x).unwrap();
            let rhs = x * ml_global(&p(a, b + a), x).unwrap() + rgamma(b);
            let scale = lhs.abs().max(rgamma(b).abs());
            prop_assert!((lhs - rhs).abs() <= 1e-9 * scale, "lhs={} rhs={}", lhs, rhs);
        }
    }
}
