//! ψ-Riemann-Liouville integrals and ψ-Hilfer derivatives of sampled functions.
//!
//! Everything is discretized in the variable w = ψ(s): the kernel
//! (ψ(u) - ψ(s))^{ν-1} ψ'(s) ds becomes (W - w)^{ν-1} dw, whose moments against
//! a piecewise-linear interpolant are integrated exactly.

use crate::error::{domain, Error, Result};
use crate::special::{beta, beta_reg, gamma};
use rayon::prelude::*;
use std::fmt;
use std::sync::Arc;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Increasing map ψ with its derivative.
#[derive(Clone)]
pub struct PsiFunction {
    psi: RealFn,
    dpsi: RealFn,
    label: String,
}

impl fmt::Debug for PsiFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PsiFunction").field("label", &self.label).finish()
    }
}

impl PsiFunction {
    pub fn new(
        label: impl Into<String>,
        psi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dpsi: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        PsiFunction {
            psi: Arc::new(psi),
            dpsi: Arc::new(dpsi),
            label: label.into(),
        }
    }

    pub fn identity() -> Self {
        Self::new("identity", |u| u, |_| 1.0)
    }

    pub fn square() -> Self {
        Self::new("square", |u| u * u, |u| 2.0 * u)
    }

    pub fn log1p() -> Self {
        Self::new("log1p", f64::ln_1p, |u| 1.0 / (1.0 + u))
    }

    /// Look up a built-in by label.
    pub fn builtin(label: &str) -> Result<Self> {
        match label {
            "identity" | "id" => Ok(Self::identity()),
            "square" => Ok(Self::square()),
            "log1p" => Ok(Self::log1p()),
            other => Err(Error::Config(format!("unknown psi function '{other}'"))),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, u: f64) -> f64 {
        (self.psi)(u)
    }

    pub fn deriv(&self, u: f64) -> f64 {
        (self.dpsi)(u)
    }

    /// Checks strict increase on `mesh` and ψ' > 0 at every point but the
    /// first (ψ' may vanish at the left end, as for u² at 0).
    pub fn validate_on(&self, mesh: &[f64]) -> Result<()> {
        let mut prev = f64::NEG_INFINITY;
        for (i, &u) in mesh.iter().enumerate() {
            let p = self.eval(u);
            let d = self.deriv(u);
            if !p.is_finite() || !d.is_finite() {
                return domain(format!("psi '{}' not finite at {u}", self.label));
            }
            if p <= prev {
                return domain(format!("psi '{}' not increasing at {u}", self.label));
            }
            if i > 0 && d <= 0.0 {
                return domain(format!("psi '{}' has non-positive derivative at {u}", self.label));
            }
            prev = p;
        }
        Ok(())
    }

    /// Image of a mesh.
    pub fn map(&self, mesh: &[f64]) -> Vec<f64> {
        mesh.iter().map(|&u| self.eval(u)).collect()
    }
}

/// (α, β, γ = α + β(1-α)).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FracOrder {
    pub alpha: f64,
    pub beta_t: f64,
    pub gamma: f64,
}

impl FracOrder {
    pub fn new(alpha: f64, beta_t: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return domain(format!("order alpha must lie in (0,1], got {alpha}"));
        }
        if !(0.0..=1.0).contains(&beta_t) {
            return domain(format!("type beta must lie in [0,1], got {beta_t}"));
        }
        Ok(FracOrder {
            alpha,
            beta_t,
            gamma: alpha + beta_t * (1.0 - alpha),
        })
    }

    /// Order of the inner integral, (1-β)(1-α).
    pub fn inner(&self) -> f64 {
        (1.0 - self.beta_t) * (1.0 - self.alpha)
    }

    /// Order of the outer integral, β(1-α).
    pub fn outer(&self) -> f64 {
        self.beta_t * (1.0 - self.alpha)
    }
}

/// Function values on a strictly increasing mesh. A non-finite first value
/// marks an integrable singularity at the left end.
#[derive(Clone, Debug, PartialEq)]
pub struct Sampled {
    pub mesh: Vec<f64>,
    pub values: Vec<f64>,
}

impl Sampled {
    pub fn new(mesh: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if mesh.len() != values.len() {
            return Err(Error::Mesh(format!(
                "{} mesh points but {} values",
                mesh.len(),
                values.len()
            )));
        }
        if mesh.len() < 2 {
            return Err(Error::Mesh("need at least two mesh points".into()));
        }
        if mesh.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Mesh("mesh must be strictly increasing".into()));
        }
        Ok(Sampled { mesh, values })
    }

    /// Samples `f` on `mesh`.
    pub fn from_fn(mesh: &[f64], f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(mesh.to_vec(), mesh.iter().map(|&u| f(u)).collect())
    }

    pub fn len(&self) -> usize {
        self.mesh.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mesh.is_empty()
    }

    /// Index of the mesh point equal to `u` (relative tolerance 1e-12).
    pub fn node_index(&self, u: f64) -> Option<usize> {
        let tol = 1e-12 * u.abs().max(1e-300);
        let i = self.mesh.partition_point(|&t| t < u - tol);
        (i < self.mesh.len() && (self.mesh[i] - u).abs() <= tol).then_some(i)
    }

    /// Linear interpolation at `u`.
    pub fn value_at(&self, u: f64) -> Result<f64> {
        let g = self.truncated_at(u)?;
        Ok(*g.values.last().unwrap())
    }

    fn check_in_range(&self, u: f64) -> Result<()> {
        let (lo, hi) = (self.mesh[0], *self.mesh.last().unwrap());
        if !(u >= lo && u <= hi * (1.0 + 1e-14)) {
            return Err(Error::Mesh(format!("u = {u} outside [{lo}, {hi}]")));
        }
        Ok(())
    }

    /// Copy truncated at `u`, with `u` appended as a node if it is not one.
    fn truncated_at(&self, u: f64) -> Result<Sampled> {
        self.check_in_range(u)?;
        if let Some(i) = self.node_index(u) {
            return Ok(Sampled {
                mesh: self.mesh[..=i].to_vec(),
                values: self.values[..=i].to_vec(),
            });
        }
        let i = self.mesh.partition_point(|&t| t < u);
        let (t0, t1) = (self.mesh[i - 1], self.mesh[i]);
        let (f0, f1) = (self.values[i - 1], self.values[i]);
        let fu = if f0.is_finite() {
            f0 + (f1 - f0) * (u - t0) / (t1 - t0)
        } else {
            f1
        };
        let mut mesh = self.mesh[..i].to_vec();
        let mut values = self.values[..i].to_vec();
        mesh.push(u);
        values.push(fu);
        Ok(Sampled { mesh, values })
    }
}

/// ∫_0^h (A-σ)^{ν-1} dσ and ∫_0^h (A-σ)^{ν-1} σ dσ for 0 < h ≤ A.
pub(crate) fn moments(nu: f64, a: f64, h: f64) -> (f64, f64) {
    let r = (h / a).min(1.0);
    let an = (nu * a.ln()).exp();
    let i0 = an * (-(nu * (-r).ln_1p()).exp_m1()) / nu;
    let j1 = if r < 0.1 {
        // Σ_n (1-ν)_n/n! r^{n+2}/(n+2)
        let mut c = 1.0;
        let mut rp = r * r;
        let mut s = 0.0;
        for n in 0..40 {
            let t = c * rp / (n as f64 + 2.0);
            s += t;
            if t.abs() <= 1e-17 * s.abs() {
                break;
            }
            c *= (n as f64 + 1.0 - nu) / (n as f64 + 1.0);
            rp *= r;
        }
        an * a * s
    } else {
        let l = (-r).ln_1p();
        let p0 = -(nu * l).exp_m1() / nu;
        let p1 = -((nu + 1.0) * l).exp_m1() / (nu + 1.0);
        an * a * (p0 - p1)
    };
    (i0, j1)
}

/// Power fit f ≈ c (w - w0)^p through nodes 1 and 2, if the data allow it.
fn power_fit(w: &[f64], f: &[f64]) -> Option<(f64, f64)> {
    if w.len() < 3 || !(f[1].is_finite() && f[2].is_finite()) {
        return None;
    }
    if f[1] == 0.0 || f[2] == 0.0 || f[1].signum() != f[2].signum() {
        return None;
    }
    let p = (f[2] / f[1]).ln() / ((w[2] - w[0]) / (w[1] - w[0])).ln();
    if !(p > -1.0) || !p.is_finite() {
        return None;
    }
    let c = f[1] / (w[1] - w[0]).powf(p);
    Some((c, p))
}

/// (1/Γ(ν)) ∫_{w0}^{w_m} (w_m - w)^{ν-1} f(w) dw with f piecewise linear in w.
///
/// If f(w0) is not finite and `fit` = (c, p) is given, f is written as
/// (w - w0)^p g with g piecewise linear and the weight (W-w)^{ν-1}(w-w0)^p is
/// integrated exactly through incomplete beta functions. Without a fit the
/// first interval uses the constant f(w1).
pub(crate) fn integrate_nodes(nu: f64, w: &[f64], f: &[f64], m: usize, fit: Option<(f64, f64)>) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let big_w = w[m];
    if !f[0].is_finite() {
        if let Some((c, p)) = fit {
            return integrate_factored(nu, w, f, m, c, p);
        }
    }
    let mut sum = 0.0;
    let mut start = 0;
    if !f[0].is_finite() {
        start = 1;
        let (i0, _) = moments(nu, big_w - w[0], w[1] - w[0]);
        sum += f[1] * i0;
    }
    for i in start..m {
        let h = w[i + 1] - w[i];
        let (i0, j1) = moments(nu, big_w - w[i], h);
        sum += f[i] * (i0 - j1 / h) + f[i + 1] * (j1 / h);
    }
    sum / gamma(nu)
}

fn integrate_factored(nu: f64, w: &[f64], f: &[f64], m: usize, c: f64, p: f64) -> f64 {
    let w0 = w[0];
    let l = w[m] - w0;
    let g = |i: usize| if i == 0 { c } else { f[i] / (w[i] - w0).powf(p) };
    let (a0, a1) = (p + 1.0, p + 2.0);
    let (bb0, bb1) = (beta(a0, nu), beta(a1, nu));
    let (mut prev0, mut prev1) = (0.0, 0.0);
    let mut gi = g(0);
    let mut sum = 0.0;
    for i in 0..m {
        let (c0, c1) = if i + 1 == m {
            (1.0, 1.0)
        } else {
            let x1 = (w[i + 1] - w0) / l;
            (beta_reg(a0, nu, x1), beta_reg(a1, nu, x1))
        };
        let b0 = bb0 * (c0 - prev0);
        let b1 = bb1 * (c1 - prev1);
        let gn = g(i + 1);
        let slope = (gn - gi) / (w[i + 1] - w[i]);
        sum += gi * b0 + slope * (l * b1 - (w[i] - w0) * b0);
        prev0 = c0;
        prev1 = c1;
        gi = gn;
    }
    l.powf(nu + p) * sum / gamma(nu)
}

/// I^{ν;ψ} f at every mesh node (the value at the first node is 0 for
/// finite data and NaN when f is singular there).
pub fn psi_frac_integral_nodes(nu: f64, psi: &PsiFunction, f: &Sampled) -> Result<Vec<f64>> {
    if !(nu > 0.0) {
        return domain(format!("integral order must be positive, got {nu}"));
    }
    let w = psi.map(&f.mesh);
    let fit = power_fit(&w, &f.values);
    let mut out: Vec<f64> = (0..w.len())
        .into_par_iter()
        .map(|m| integrate_nodes(nu, &w, &f.values, m, fit))
        .collect();
    if !f.values[0].is_finite() {
        out[0] = f64::NAN;
    }
    Ok(out)
}

/// (1/Γ(α)) ∫_a^u ψ'(s)(ψ(u) - ψ(s))^{α-1} f(s) ds.
pub fn psi_frac_integral(alpha: f64, psi: &PsiFunction, f: &Sampled, u: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return domain(format!("alpha must lie in (0,1], got {alpha}"));
    }
    psi_frac_integral_any(alpha, psi, f, u)
}

/// Same as `psi_frac_integral` for any positive order.
pub fn psi_frac_integral_any(nu: f64, psi: &PsiFunction, f: &Sampled, u: f64) -> Result<f64> {
    if !(nu > 0.0) {
        return domain(format!("integral order must be positive, got {nu}"));
    }
    let fit = power_fit(&psi.map(&f.mesh), &f.values);
    let g = f.truncated_at(u)?;
    let w = psi.map(&g.mesh);
    Ok(integrate_nodes(nu, &w, &g.values, w.len() - 1, fit))
}

/// d/dw on a nonuniform mesh: 3-point centered inside, 3-point one-sided at
/// the ends. Nodes before `first` are skipped (left NaN).
fn derivative_in_w(w: &[f64], g: &[f64], first: usize) -> Result<Vec<f64>> {
    let n = w.len();
    if n < first + 3 {
        return Err(Error::Mesh("difference stencil needs three usable points".into()));
    }
    let mut d = vec![f64::NAN; n];
    let one_sided = |i0: usize, i1: usize, i2: usize, at: usize| -> f64 {
        // derivative at w[at] of the quadratic through the three nodes
        let (x0, x1, x2) = (w[i0], w[i1], w[i2]);
        let x = w[at];
        let l0 = ((x - x1) + (x - x2)) / ((x0 - x1) * (x0 - x2));
        let l1 = ((x - x0) + (x - x2)) / ((x1 - x0) * (x1 - x2));
        let l2 = ((x - x0) + (x - x1)) / ((x2 - x0) * (x2 - x1));
        l0 * g[i0] + l1 * g[i1] + l2 * g[i2]
    };
    d[first] = one_sided(first, first + 1, first + 2, first);
    for i in first + 1..n - 1 {
        let h1 = w[i] - w[i - 1];
        let h2 = w[i + 1] - w[i];
        d[i] = -h2 / (h1 * (h1 + h2)) * g[i - 1]
            + (h2 - h1) / (h1 * h2) * g[i]
            + h1 / (h2 * (h1 + h2)) * g[i + 1];
    }
    d[n - 1] = one_sided(n - 3, n - 2, n - 1, n - 1);
    Ok(d)
}

/// ψ-Hilfer derivative I^{β(1-α)} (1/ψ' d/du) I^{(1-β)(1-α)} f at every node.
/// The first node (and the second, when the inner integral is undefined at
/// the origin) carry NaN.
pub fn hilfer_derivative_nodes(ord: &FracOrder, psi: &PsiFunction, f: &Sampled) -> Result<Vec<f64>> {
    if f.len() < 4 {
        return Err(Error::Mesh("Hilfer derivative needs at least four nodes".into()));
    }
    psi.validate_on(&f.mesh)?;
    let w = psi.map(&f.mesh);
    let inner_order = ord.inner();
    let g: Vec<f64> = if inner_order == 0.0 {
        f.values.clone()
    } else {
        let mut g = psi_frac_integral_nodes(inner_order, psi, f)?;
        g[0] = f64::NAN;
        g
    };
    let first = usize::from(!g[0].is_finite());
    let mut h = derivative_in_w(&w, &g, first)?;
    let outer = ord.outer();
    if outer == 0.0 {
        return Ok(h);
    }
    h[0] = f64::NAN;
    let fit = power_fit(&w, &h);
    let out: Vec<f64> = (0..w.len())
        .into_par_iter()
        .map(|m| if m == 0 { f64::NAN } else { integrate_nodes(outer, &w, &h, m, fit) })
        .collect();
    Ok(out)
}

/// ψ-Hilfer derivative at a single point `u` (linear interpolation between
/// nodes when `u` is not one).
pub fn hilfer_derivative(ord: &FracOrder, psi: &PsiFunction, f: &Sampled, u: f64) -> Result<f64> {
    f.check_in_range(u)?;
    if u <= f.mesh[1] {
        return Err(Error::Mesh(format!("u = {u} too close to the left end")));
    }
    let all = hilfer_derivative_nodes(ord, psi, f)?;
    let i = f.mesh.partition_point(|&t| t < u).min(f.len() - 1);
    if let Some(k) = f.node_index(u) {
        return Ok(all[k]);
    }
    let (t0, t1) = (f.mesh[i - 1], f.mesh[i]);
    Ok(all[i - 1] + (all[i] - all[i - 1]) * (u - t0) / (t1 - t0))
}

/// lim_{u→0+} I^{1-γ} f(u), extrapolated from the three smallest positive
/// nodes with the model J(u) = J0 + c u^p.
pub fn rl_initial_functional(gamma_: f64, f: &Sampled, eps_extrap: f64) -> Result<f64> {
    if !(gamma_ > 0.0 && gamma_ <= 1.0) {
        return domain(format!("gamma must lie in (0,1], got {gamma_}"));
    }
    let start = usize::from(f.mesh[0] <= 0.0);
    let idx: Vec<usize> = (start..f.len()).take(3).collect();
    if idx.len() < 3 || f.mesh[idx[2]] > eps_extrap {
        return Err(Error::Mesh(format!(
            "fewer than three mesh points below {eps_extrap}"
        )));
    }
    let id = PsiFunction::identity();
    let mut j = [0.0; 3];
    for (k, &i) in idx.iter().enumerate() {
        j[k] = if gamma_ == 1.0 {
            f.values[i]
        } else {
            psi_frac_integral_any(1.0 - gamma_, &id, f, f.mesh[i])?
        };
    }
    let t = [f.mesh[idx[0]], f.mesh[idx[1]], f.mesh[idx[2]]];
    Ok(extrapolate_to_zero(t, j))
}

/// J0 from J(t) = J0 + c t^p through three points, p found by bisection.
fn extrapolate_to_zero(t: [f64; 3], j: [f64; 3]) -> f64 {
    let d1 = j[1] - j[0];
    let d2 = j[2] - j[1];
    if d1 == 0.0 || d1.abs() <= 1e-15 * j[0].abs() {
        return j[0];
    }
    let target = d2 / d1;
    let ratio = |p: f64| (t[2].powf(p) - t[1].powf(p)) / (t[1].powf(p) - t[0].powf(p));
    let (mut lo, mut hi) = (1e-6, 8.0);
    let (rlo, rhi) = (ratio(lo), ratio(hi));
    let p = if !(target > rlo.min(rhi) && target < rlo.max(rhi)) {
        1.0
    } else {
        let increasing = rhi > rlo;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (ratio(mid) < target) == increasing {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let c = d1 / (t[1].powf(p) - t[0].powf(p));
    j[0] - c * t[0].powf(p)
}

/// Graded mesh τ (j/N)^r, j = 0..N.
pub fn graded_mesh(tau: f64, n: usize, r: f64) -> Vec<f64> {
    (0..=n)
        .map(|j| {
            if j == n {
                tau
            } else {
                tau * (j as f64 / n as f64).powf(r)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlf::{ml_global, MlfParams};
    use proptest::prelude::*;

    fn power_rule(alpha: f64, mu: f64, u: f64) -> f64 {
        gamma(mu + 1.0) / gamma(mu + alpha + 1.0) * u.powf(mu + alpha)
    }

    /// Adaptive Gauss-Kronrod-free oracle: substitution s = u(1 - x^{1/α})
    /// removes the kernel singularity, then composite Simpson.
    fn quad_oracle(alpha: f64, f: impl Fn(f64) -> f64, u: f64) -> f64 {
        // ∫_0^u (u-s)^{α-1} f(s) ds with u - s = u y^{1/α}: = (u^α/α) ∫_0^1 f(u - u y^{1/α}) dy
        let n = 200_000;
        let h = 1.0 / n as f64;
        let g = |y: f64| f(u - u * y.powf(1.0 / alpha));
        let mut s = g(0.0) + g(1.0);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * g(i as f64 * h);
        }
        s * h / 3.0 * u.powf(alpha) / alpha / gamma(alpha)
    }

    #[test]
    fn constant_integrates_to_power() {
        let mesh = graded_mesh(1.0, 256, 1.0);
        let f = Sampled::from_fn(&mesh, |_| 1.0).unwrap();
        for &a in &[0.3, 0.5, 0.9] {
            let v = psi_frac_integral(a, &PsiFunction::identity(), &f, 0.7).unwrap();
            let want = 0.7f64.powf(a) / gamma(a + 1.0);
            assert!((v - want).abs() < 1e-14, "a={a}");
        }
    }

    #[test]
    fn plain_integral_of_square() {
        let mesh = graded_mesh(1.0, 2048, 1.0);
        let f = Sampled::from_fn(&mesh, |s| s * s).unwrap();
        let v = psi_frac_integral(1.0, &PsiFunction::identity(), &f, 1.0).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-7);
    }

    #[test]
    fn half_order_of_power() {
        let mesh = graded_mesh(1.0, 4096, 2.0);
        let f = Sampled::from_fn(&mesh, |s| s.powf(1.5)).unwrap();
        let v = psi_frac_integral(0.5, &PsiFunction::identity(), &f, 1.0).unwrap();
        let want = gamma(2.5) / gamma(3.0);
        assert!((want - 0.6646701940895685).abs() < 1e-15);
        assert!((v / want - 1.0).abs() < 1e-6, "v={v}");
        let q = quad_oracle(0.5, |s| s.powf(1.5), 1.0);
        assert!((q / want - 1.0).abs() < 1e-9, "q={q}");
    }

    #[test]
    fn off_node_evaluation() {
        let mesh = graded_mesh(1.0, 1000, 1.0);
        let f = Sampled::from_fn(&mesh, |s| s).unwrap();
        let v = psi_frac_integral(0.5, &PsiFunction::identity(), &f, 0.12345).unwrap();
        assert!((v / power_rule(0.5, 1.0, 0.12345) - 1.0).abs() < 1e-12);
        assert!(matches!(
            psi_frac_integral(0.5, &PsiFunction::identity(), &f, 1.5),
            Err(Error::Mesh(_))
        ));
    }

    #[test]
    fn singular_start_is_integrated_exactly_for_powers() {
        let mesh = graded_mesh(1.0, 64, 1.0);
        let f = Sampled::from_fn(&mesh, |s| s.powf(-0.25)).unwrap();
        assert!(f.values[0].is_infinite());
        let v = psi_frac_integral_any(0.25, &PsiFunction::identity(), &f, mesh[1]).unwrap();
        assert!((v - gamma(0.75)).abs() < 1e-12);
    }

    #[test]
    fn refinement_order_on_square() {
        let mut errs = Vec::new();
        for &n in &[256usize, 512, 1024, 2048] {
            let mesh = graded_mesh(1.0, n, 1.0);
            let f = Sampled::from_fn(&mesh, |s| s * s).unwrap();
            let v = psi_frac_integral(0.4, &PsiFunction::identity(), &f, 1.0).unwrap();
            errs.push((v - power_rule(0.4, 2.0, 1.0)).abs());
        }
        for w in errs.windows(2) {
            assert!(w[1] <= w[0] * 2f64.powf(-1.5), "{errs:?}");
        }
    }

    #[test]
    fn psi_change_of_variables() {
        // I^{α;u²}[s^{2μ}](u) = Γ(μ+1)/Γ(μ+α+1) u^{2(μ+α)}
        let psi = PsiFunction::square();
        let mesh = graded_mesh(1.0, 2048, 1.0);
        let f = Sampled::from_fn(&mesh, |s| s.powi(2)).unwrap();
        for &a in &[0.3, 0.7] {
            let v = psi_frac_integral(a, &psi, &f, 0.9).unwrap();
            let want = gamma(2.0) / gamma(2.0 + a) * 0.9f64.powf(2.0 * (1.0 + a));
            assert!((v / want - 1.0).abs() < 1e-6, "a={a}");
            // same quantity on a mesh uniform in w = s², with ψ = id
            let wmesh = graded_mesh(0.81, 2048, 1.0);
            let g = Sampled::from_fn(&wmesh, |w| w).unwrap();
            let v2 = psi_frac_integral(a, &PsiFunction::identity(), &g, 0.81).unwrap();
            assert!((v - v2).abs() < 1e-6 * want);
        }
    }

    #[test]
    fn log1p_psi_matches_oracle() {
        // I^{α;ln(1+u)}[1](u) = ln(1+u)^α / Γ(α+1)
        let psi = PsiFunction::log1p();
        let mesh = graded_mesh(2.0, 500, 1.0);
        let f = Sampled::from_fn(&mesh, |_| 1.0).unwrap();
        let v = psi_frac_integral(0.6, &psi, &f, 2.0).unwrap();
        assert!((v - 3f64.ln().powf(0.6) / gamma(1.6)).abs() < 1e-13);
    }

    #[test]
    fn psi_validation() {
        assert!(PsiFunction::square().validate_on(&[0.0, 0.5, 1.0]).is_ok());
        let bad = PsiFunction::new("neg", |u| -u, |_| -1.0);
        assert!(bad.validate_on(&[0.0, 1.0]).is_err());
        assert!(PsiFunction::builtin("nope").is_err());
    }

    #[test]
    fn order_validation() {
        let o = FracOrder::new(0.5, 0.5).unwrap();
        assert_eq!(o.gamma, 0.75);
        assert!(FracOrder::new(0.0, 0.5).is_err());
        assert!(FracOrder::new(0.5, 1.5).is_err());
    }

    #[test]
    fn hilfer_first_order_is_derivative() {
        let mesh = graded_mesh(1.0, 400, 1.0);
        let f = Sampled::from_fn(&mesh, |u| u * u).unwrap();
        for &b in &[0.0, 0.5, 1.0] {
            let o = FracOrder::new(1.0, b).unwrap();
            let v = hilfer_derivative(&o, &PsiFunction::identity(), &f, 1.0).unwrap();
            assert!((v - 2.0).abs() < 1e-10, "b={b} v={v}");
        }
    }

    #[test]
    fn caputo_of_linear() {
        let mesh = graded_mesh(1.0, 2048, 2.0);
        let f = Sampled::from_fn(&mesh, |u| u).unwrap();
        let o = FracOrder::new(0.5, 1.0).unwrap();
        let v = hilfer_derivative(&o, &PsiFunction::identity(), &f, 1.0).unwrap();
        assert!((v - 1.1283791670955126).abs() < 1e-6, "v={v}");
    }

    #[test]
    fn initial_functional_cases() {
        let mesh = graded_mesh(1.0, 2000, 2.0);
        let f = Sampled::from_fn(&mesh, |u| 3.0 + u).unwrap();
        let v = rl_initial_functional(1.0, &f, 1e-3).unwrap();
        assert!((v - 3.0).abs() < 1e-10);

        let f = Sampled::from_fn(&mesh, |u| u.powf(-0.25)).unwrap();
        let v = rl_initial_functional(0.75, &f, 1e-3).unwrap();
        assert!((v - gamma(0.75)).abs() < 1e-6, "v={v}");

        let p = MlfParams::new(0.5, 0.75).unwrap();
        let f = Sampled::from_fn(&mesh, |u| u.powf(-0.25) * ml_global(&p, -u.sqrt()).unwrap()).unwrap();
        let v = rl_initial_functional(0.75, &f, 1e-3).unwrap();
        assert!((v - 1.0).abs() < 1e-3, "v={v}");

        assert!(matches!(rl_initial_functional(0.75, &f, 1e-12), Err(Error::Mesh(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn linear_in_data(a in 0.1f64..1.0, c1 in -3.0f64..3.0, c2 in -3.0f64..3.0) {
            let mesh = graded_mesh(1.0, 64, 1.5);
            let id = PsiFunction::identity();
            let f = Sampled::from_fn(&mesh, |s| s.sin()).unwrap();
            let g = Sampled::from_fn(&mesh, |s| s * s).unwrap();
            let h = Sampled::from_fn(&mesh, |s| c1 * s.sin() + c2 * s * s).unwrap();
            let lhs = psi_frac_integral(a, &id, &h, 0.8).unwrap();
            let rhs = c1 * psi_frac_integral(a, &id, &f, 0.8).unwrap()
                + c2 * psi_frac_integral(a, &id, &g, 0.8).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }

        #[test]
        fn positivity(a in 0.1f64..1.0, u in 0.01f64..1.0) {
            let mesh = graded_mesh(1.0, 64, 2.0);
            let f = Sampled::from_fn(&mesh, |s| 1.0 + s).unwrap();
            let v = psi_frac_integral(a, &PsiFunction::identity(), &f, u).unwrap();
            prop_assert!(v > 0.0);
        }

        #[test]
        fn moments_match_closed_form(nu in 0.05f64..3.0, r in 1e-4f64..1.0) {
            let a = 1.3;
            let h = r * a;
            let (i0, j1) = moments(nu, a, h);
            let b = a - h;
            let i0_ref = (a.powf(nu) - b.powf(nu)) / nu;
            let j1_ref = a * i0_ref - (a.powf(nu + 1.0) - b.powf(nu + 1.0)) / (nu + 1.0);
            prop_assert!((i0 - i0_ref).abs() <= 1e-12 * i0_ref.abs());
            prop_assert!((j1 - j1_ref).abs() <= 1e-10 * i0_ref.abs() * h);
        }
    }
}
