//! ε-regular nonlinearity classes, built-in members and the beta-function
//! constant bundles.
//!
//! Every built-in is separable, value(u, x) = time_factor(u) · state_map(x),
//! and works on eigen-coordinates of a symmetric model.

use crate::error::{domain, Error, Result};
use crate::operator::SectorialModel;
use crate::special::beta;
use rand::Rng;

/// Growth/Lipschitz class with exponents (ε, ρ, γ̃(ε), q₁, q₁*, v) and the
/// modulus 𝒱(u) = δ·min(1, u)^p.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsRegularClass {
    pub eps: f64,
    pub rho: f64,
    /// γ̃(ε) for the f-class, η(ε) for the g-class.
    pub gamma_eps: f64,
    /// q₁ (l for the g-class).
    pub q1: f64,
    /// q₁* (l* for the g-class).
    pub q1s: f64,
    pub v: f64,
    /// C in c(u) ≤ C u^v.
    pub c_const: f64,
    pub delta: f64,
    pub vmod_power: f64,
}

impl EpsRegularClass {
    pub fn vmod(&self, u: f64) -> f64 {
        if self.delta == 0.0 {
            return 0.0;
        }
        self.delta * u.min(1.0).powf(self.vmod_power)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::ClassViolation(msg));
        let (e, r, g, v) = (self.eps, self.rho, self.gamma_eps, self.v);
        if ![e, r, g, self.q1, self.q1s, v, self.c_const, self.delta, self.vmod_power]
            .iter()
            .all(|x| x.is_finite())
        {
            return bad("non-finite class parameter".into());
        }
        if !(r > 1.0) {
            return bad(format!("rho must exceed 1, got {r}"));
        }
        if e < 0.0 {
            return bad(format!("eps must be non-negative, got {e}"));
        }
        if !(r * e <= g && g < 1.0) {
            return bad(format!("need rho*eps <= gamma_eps < 1, got rho*eps = {}, gamma_eps = {g}", r * e));
        }
        if !(r * e - 1.0 < v && v <= 0.0) {
            return bad(format!("need rho*eps - 1 < v <= 0, got v = {v}"));
        }
        if !(-v - g + e <= self.q1 && self.q1 <= 0.0) {
            return bad(format!("q1 = {} outside [{}, 0]", self.q1, -v - g + e));
        }
        if !(-v - g <= self.q1s && self.q1s <= 0.0) {
            return bad(format!("q1s = {} outside [{}, 0]", self.q1s, -v - g));
        }
        if !(self.c_const > 0.0) {
            return bad("C must be positive".into());
        }
        if self.delta < 0.0 {
            return bad("delta must be non-negative".into());
        }
        if self.delta > 0.0 && !(self.vmod_power > 0.0) {
            return bad("the modulus must vanish at 0: need a positive power".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum NonlinearityKind {
    Zero,
    /// B x with B diagonal in the eigenbasis.
    Linear { coeffs: Vec<f64> },
    /// c₀ u^v ‖x‖_{1+ε}^{ρ-1} A^{1+ε-γ̃} x
    Power { c0: f64 },
    /// c₀ 𝒱(u) u^{v+q₁*} A^{-γ̃} e, e a unit modal direction.
    Forced { c0: f64, direction: Vec<f64> },
    /// Memory kernel g(τ, x) = c₀ τ^q x.
    Memory { c0: f64, q: f64 },
    /// State-independent kernel g(τ, x) = c₀ τ^q w.
    Kernel { c0: f64, q: f64, w: Vec<f64> },
}

#[derive(Clone, Debug)]
pub struct TestNonlinearity {
    pub kind: NonlinearityKind,
    pub class: EpsRegularClass,
}

impl TestNonlinearity {
    pub fn zero(class: EpsRegularClass) -> Self {
        TestNonlinearity {
            kind: NonlinearityKind::Zero,
            class,
        }
    }

    /// The power member with c(u) = c₀u^v. The declared C is c₀ for ρ ≤ 2
    /// and c₀ρ above.
    pub fn power(c0: f64, mut class: EpsRegularClass) -> Result<Self> {
        class.c_const = if class.rho <= 2.0 { c0 } else { c0 * class.rho };
        class.validate()?;
        Ok(TestNonlinearity {
            kind: NonlinearityKind::Power { c0 },
            class,
        })
    }

    pub fn forced(c0: f64, direction: Vec<f64>, mut class: EpsRegularClass) -> Result<Self> {
        let n = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(n > 0.0) {
            return domain("forcing direction must be non-zero");
        }
        class.c_const = c0;
        class.validate()?;
        Ok(TestNonlinearity {
            kind: NonlinearityKind::Forced {
                c0,
                direction: direction.iter().map(|x| x / n).collect(),
            },
            class,
        })
    }

    pub fn is_zero(&self) -> bool {
        match &self.kind {
            NonlinearityKind::Zero => true,
            NonlinearityKind::Linear { coeffs } => coeffs.iter().all(|&c| c == 0.0),
            NonlinearityKind::Power { c0 } | NonlinearityKind::Forced { c0, .. } => *c0 == 0.0,
            NonlinearityKind::Memory { c0, .. } | NonlinearityKind::Kernel { c0, .. } => *c0 == 0.0,
        }
    }

    /// True when the value does not depend on the state.
    pub fn state_independent(&self) -> bool {
        matches!(
            self.kind,
            NonlinearityKind::Zero | NonlinearityKind::Forced { .. } | NonlinearityKind::Kernel { .. }
        )
    }

    /// Singular power of the time factor near 0 (τ^q kernels), if any.
    pub fn kernel_power(&self) -> Option<f64> {
        match self.kind {
            NonlinearityKind::Memory { q, .. } | NonlinearityKind::Kernel { q, .. } => Some(q),
            _ => None,
        }
    }

    /// Scalar factor multiplying `state_map`.
    pub fn time_factor(&self, u: f64) -> f64 {
        let c = &self.class;
        match &self.kind {
            NonlinearityKind::Zero => 0.0,
            NonlinearityKind::Linear { .. } => 1.0,
            NonlinearityKind::Power { c0 } => c0 * u.powf(c.v),
            NonlinearityKind::Forced { c0, .. } => {
                let m = c.vmod(u);
                if m == 0.0 {
                    0.0
                } else {
                    c0 * m * u.powf(c.v + c.q1s)
                }
            }
            NonlinearityKind::Memory { c0, q } | NonlinearityKind::Kernel { c0, q, .. } => c0 * u.powf(*q),
        }
    }

    /// State part in eigen-coordinates.
    pub fn state_map(&self, x: &[f64], model: &SectorialModel) -> Vec<f64> {
        let lam = model.eigenvalues.as_slice();
        let c = &self.class;
        match &self.kind {
            NonlinearityKind::Zero => vec![0.0; x.len()],
            NonlinearityKind::Linear { coeffs } => x.iter().zip(coeffs).map(|(a, b)| a * b).collect(),
            NonlinearityKind::Power { .. } => {
                let nx = model.modal_norm(1.0 + c.eps, x);
                let s = if nx == 0.0 { 0.0 } else { nx.powf(c.rho - 1.0) };
                let p = 1.0 + c.eps - c.gamma_eps;
                x.iter().zip(lam).map(|(xi, l)| s * l.powf(p) * xi).collect()
            }
            NonlinearityKind::Forced { direction, .. } => direction
                .iter()
                .zip(lam)
                .map(|(e, l)| e * l.powf(-c.gamma_eps))
                .collect(),
            NonlinearityKind::Memory { .. } => x.to_vec(),
            NonlinearityKind::Kernel { w, .. } => w.clone(),
        }
    }

    /// f(u, x) in eigen-coordinates.
    pub fn eval(&self, u: f64, x: &[f64], model: &SectorialModel) -> Vec<f64> {
        let t = self.time_factor(u);
        if t == 0.0 {
            return vec![0.0; x.len()];
        }
        let mut y = self.state_map(x, model);
        for v in &mut y {
            *v *= t;
        }
        y
    }
}

#[derive(Clone, Debug, Default)]
pub struct MembershipReport {
    /// max of ‖f(u,x)-f(u,y)‖_γ̃ / [c(u)‖x-y‖_{1+ε}(‖x‖^{ρ-1}+‖y‖^{ρ-1}+𝒱u^{q₁})].
    pub lipschitz_ratio: f64,
    /// max of ‖f(u,x)‖_γ̃ / [c(u)(‖x‖^ρ + 𝒱u^{q₁*})].
    pub growth_ratio: f64,
    pub samples: usize,
}

/// Evaluates both class inequalities at every sample (u, x, y) given in
/// eigen-coordinates, with c(u) = C u^v.
pub fn check_class_membership(
    f: &TestNonlinearity,
    samples: &[(f64, Vec<f64>, Vec<f64>)],
    model: &SectorialModel,
) -> Result<MembershipReport> {
    let c = &f.class;
    c.validate()?;
    let mut rep = MembershipReport {
        samples: samples.len(),
        ..Default::default()
    };
    let tol = 1.0 + 1e-9;
    for (u, x, y) in samples {
        let u = *u;
        if !(u > 0.0) {
            return domain("sample times must be positive");
        }
        model.check_dim(&nalgebra::DVector::from_column_slice(x))?;
        let cu = c.c_const * u.powf(c.v);
        let m = c.vmod(u);
        let fx = f.eval(u, x, model);
        let fy = f.eval(u, y, model);
        let nx = model.modal_norm(1.0 + c.eps, x);
        let ny = model.modal_norm(1.0 + c.eps, y);
        let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        let dfy: Vec<f64> = fx.iter().zip(&fy).map(|(a, b)| a - b).collect();
        let lhs = model.modal_norm(c.gamma_eps, &dfy);
        let rhs = cu * model.modal_norm(1.0 + c.eps, &d) * (nx.powf(c.rho - 1.0) + ny.powf(c.rho - 1.0) + m * u.powf(c.q1));
        let lr = ratio(lhs, rhs);
        let glhs = model.modal_norm(c.gamma_eps, &fx);
        let grhs = cu * (nx.powf(c.rho) + m * u.powf(c.q1s));
        let gr = ratio(glhs, grhs);
        if lr > tol || gr > tol {
            return Err(Error::ClassViolation(format!(
                "sample u = {u}, |x| = {nx}, |y| = {ny}: Lipschitz ratio {lr}, growth ratio {gr}"
            )));
        }
        rep.lipschitz_ratio = rep.lipschitz_ratio.max(lr);
        rep.growth_ratio = rep.growth_ratio.max(gr);
    }
    Ok(rep)
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else if rhs == 0.0 {
        f64::INFINITY
    } else {
        lhs / rhs
    }
}

/// Random samples (u, x, y) with u ∈ (0, u_max] and x, y in the
/// 𝔹_{1+ε}-ball of the given radius, in eigen-coordinates.
pub fn random_samples<R: Rng>(
    rng: &mut R,
    model: &SectorialModel,
    eps: f64,
    radius: f64,
    u_max: f64,
    n: usize,
) -> Vec<(f64, Vec<f64>, Vec<f64>)> {
    let dim = model.dim;
    let draw = |rng: &mut R| {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let nv = model.modal_norm(1.0 + eps, &v).max(f64::MIN_POSITIVE);
        let r = radius * rng.random_range(0.0..1.0f64);
        v.into_iter().map(|a| a * r / nv).collect::<Vec<f64>>()
    };
    (0..n)
        .map(|_| {
            let u = u_max * rng.random_range(1e-6..1.0f64);
            let x = draw(rng);
            let y = draw(rng);
            (u, x, y)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bundle {
    /// max over the three beta values of the f-class display (first
    /// argument α(γ̃-θ)).
    F,
    /// max over the three beta values of the g-class display (first
    /// argument η-θ).
    G,
}

fn checked_beta(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return domain(format!("beta arguments must be positive, got B({a}, {b})"));
    }
    Ok(beta(a, b))
}

pub fn beta_bundle(class: &EpsRegularClass, theta: f64, alpha: f64, which: Bundle) -> Result<f64> {
    let c = class;
    let vals = match which {
        Bundle::F => {
            let a = alpha * (c.gamma_eps - theta);
            [
                checked_beta(a, 1.0 - c.rho * c.eps)?,
                checked_beta(a, 1.0 + c.q1s)?,
                checked_beta(a, 1.0 + c.q1 - c.eps)?,
            ]
        }
        Bundle::G => {
            let a = c.gamma_eps - theta;
            [
                checked_beta(a, 2.0 + c.v + c.q1s)?,
                checked_beta(a, 2.0 + c.v + c.rho * c.eps)?,
                checked_beta(a, 2.0 + c.v + c.q1 - c.eps)?,
            ]
        }
    };
    Ok(vals.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

/// The largest bundle entering the contraction argument:
/// max{𝓑_g(θ=ε₂), 𝓑_g(θ=ε₁), 𝓑_f(θ=ε₂), 𝓑_f(θ=ε₁), B(1+l, 1+v-ε₂), B(1+l*, 1+v)}.
pub fn combined_bundle(f: &EpsRegularClass, g: &EpsRegularClass, alpha: f64) -> Result<f64> {
    let vals = [
        beta_bundle(g, g.eps, alpha, Bundle::G)?,
        beta_bundle(g, f.eps, alpha, Bundle::G)?,
        beta_bundle(f, g.eps, alpha, Bundle::F)?,
        beta_bundle(f, f.eps, alpha, Bundle::F)?,
        checked_beta(1.0 + g.q1, 1.0 + g.v - g.eps)?,
        checked_beta(1.0 + g.q1s, 1.0 + g.v)?,
    ];
    Ok(vals.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

/// Left sides of the two smallness conditions,
/// ΘΦ𝓑̃(μ^{ρ₂-1}/(1+v-ρ₂ε₂) + μ^{ρ₁-1}) and ΘΦ𝓑̃(δ₁ + δ₂𝓑).
pub fn smallness_lhs(
    mu: f64,
    f: &EpsRegularClass,
    g: &EpsRegularClass,
    theta: f64,
    phi: f64,
    b_tilde: f64,
    b_inner: f64,
) -> (f64, f64) {
    let k = theta * phi * b_tilde;
    let l1 = k * (mu.powf(g.rho - 1.0) / (1.0 + g.v - g.rho * g.eps) + mu.powf(f.rho - 1.0));
    let l2 = k * (f.delta + g.delta * b_inner);
    (l1, l2)
}

/// Whether both smallness conditions hold at μ ∈ (0, 1].
pub fn smallness_check(
    mu: f64,
    f: &EpsRegularClass,
    g: &EpsRegularClass,
    theta: f64,
    phi: f64,
    b_tilde: f64,
    b_inner: f64,
) -> Result<bool> {
    if !(mu > 0.0 && mu <= 1.0) {
        return domain(format!("mu must lie in (0,1], got {mu}"));
    }
    let (l1, l2) = smallness_lhs(mu, f, g, theta, phi, b_tilde, b_inner);
    Ok(l1 <= mu / 8.0 && l2 <= mu / 8.0)
}
