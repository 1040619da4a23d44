//! ψ-fractional Gronwall bounds: the iterated-kernel series, its
//! Mittag-Leffler closed form and a pointwise checker.

use crate::error::{domain, Error, Result};
use crate::frac_ops::{graded_mesh, moments, psi_frac_integral_any, PsiFunction, Sampled};
use rayon::prelude::*;
use crate::mlf::{ml_eval, MlfParams};
use crate::special::gamma;

pub const SERIES_TOL: f64 = 1e-14;
pub const DEFAULT_KMAX: usize = 60;

#[derive(Clone)]
pub struct GronwallInstance {
    pub alpha: f64,
    pub psi: PsiFunction,
    pub v: Sampled,
    pub g: Sampled,
    pub a: f64,
    pub b: f64,
}

impl GronwallInstance {
    pub fn new(alpha: f64, psi: PsiFunction, v: Sampled, g: Sampled) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return domain(format!("alpha must lie in (0,1], got {alpha}"));
        }
        if v.mesh != g.mesh {
            return Err(Error::Mesh("v and g must share a mesh".into()));
        }
        psi.validate_on(&v.mesh)?;
        if v.values.iter().any(|&x| !(x >= 0.0)) {
            return domain("v must be non-negative");
        }
        if g.values.iter().any(|&x| !(x >= 0.0)) {
            return domain("g must be non-negative");
        }
        if !nondecreasing(&g.values) {
            return Err(Error::Monotonicity("g must be nondecreasing".into()));
        }
        let a = v.mesh[0];
        let b = *v.mesh.last().unwrap();
        Ok(GronwallInstance { alpha, psi, v, g, a, b })
    }

    /// Constant v and g on `mesh`.
    pub fn constant(alpha: f64, psi: PsiFunction, mesh: &[f64], v: f64, g: f64) -> Result<Self> {
        Self::new(
            alpha,
            psi,
            Sampled::from_fn(mesh, |_| v)?,
            Sampled::from_fn(mesh, |_| g)?,
        )
    }

    pub fn mesh(&self) -> &[f64] {
        &self.v.mesh
    }

    pub fn v_nondecreasing(&self) -> bool {
        nondecreasing(&self.v.values)
    }

    fn check_u(&self, u: f64) -> Result<()> {
        if !(u > self.a && u <= self.b * (1.0 + 1e-14)) {
            return domain(format!("u = {u} outside ({}, {}]", self.a, self.b));
        }
        Ok(())
    }
}

fn nondecreasing(x: &[f64]) -> bool {
    x.windows(2).all(|w| w[1] >= w[0] - 1e-14 * w[0].abs())
}

/// Adds the series terms until the relative size drops below `SERIES_TOL`
/// past the largest term; `term(k)` is the k-th term.
fn sum_terms(v0: f64, kmax: usize, mut term: impl FnMut(usize) -> Result<f64>) -> Result<f64> {
    let mut sum = v0;
    let mut prev = f64::INFINITY;
    let mut last = 0.0;
    for k in 1..=kmax {
        let t = term(k)?;
        sum += t;
        last = t;
        if t.abs() <= SERIES_TOL * sum.abs() && t.abs() <= prev {
            return Ok(sum);
        }
        prev = t.abs();
    }
    if last == 0.0 {
        return Ok(sum);
    }
    Err(Error::Truncation(format!(
        "Gronwall series not converged after {kmax} terms (last {last:e}, sum {sum:e})"
    )))
}

/// v(u) + Σ_k [g(u)Γ(α)]^k/Γ(αk) ∫_a^u ψ'(τ)(ψ(u)-ψ(τ))^{αk-1} v(τ) dτ.
pub fn gronwall_series_bound(inst: &GronwallInstance, u: f64, kmax: usize) -> Result<f64> {
    inst.check_u(u)?;
    let vu = inst.v.value_at(u)?;
    let c = inst.g.value_at(u)? * gamma(inst.alpha);
    if c == 0.0 {
        return Ok(vu);
    }
    sum_terms(vu, kmax, |k| {
        let ik = psi_frac_integral_any(inst.alpha * k as f64, &inst.psi, &inst.v, u)?;
        Ok(c.powi(k as i32) * ik)
    })
}

/// Packed lower-triangular weights of the piecewise-linear product rule for
/// (1/Γ(α)) ∫_a^u ψ'(ψ(u)-ψ)^{α-1} f: row m holds the m+1 node weights.
pub struct DiscreteIntegral {
    rows: Vec<Vec<f64>>,
}

impl DiscreteIntegral {
    pub fn new(alpha: f64, psi: &PsiFunction, mesh: &[f64]) -> Self {
        let w = psi.map(mesh);
        let scale = 1.0 / gamma(alpha);
        let rows = (0..w.len())
            .into_par_iter()
            .map(|m| {
                let mut row = vec![0.0; m + 1];
                for i in 0..m {
                    let h = w[i + 1] - w[i];
                    let (i0, j1) = moments(alpha, w[m] - w[i], h);
                    row[i] += scale * (i0 - j1 / h);
                    row[i + 1] += scale * j1 / h;
                }
                row
            })
            .collect();
        DiscreteIntegral { rows }
    }

    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().zip(f).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Weight of the last node in row m.
    pub fn diagonal(&self, m: usize) -> f64 {
        self.rows[m][m]
    }
}

/// Number of series terms needed for relative accuracy `SERIES_TOL` when the
/// largest closed-form argument is `x`.
pub fn terms_needed(alpha: f64, x: f64) -> usize {
    if x <= 0.0 {
        return 1;
    }
    let lx = x.ln();
    let mut best = f64::NEG_INFINITY;
    let mut k = 0usize;
    loop {
        let lt = k as f64 * lx - crate::special::ln_gamma(alpha * k as f64 + 1.0);
        best = best.max(lt);
        if lt < best + SERIES_TOL.ln() - 2.0 || k > 100_000 {
            return k;
        }
        k += 1;
    }
}

/// The series bound at every mesh node, with each iterated integral taken
/// as a power of the discrete product rule (the rule used by the hypothesis
/// check in `gronwall_verify`).
pub fn gronwall_series_nodes(inst: &GronwallInstance, kmax: usize) -> Result<Vec<f64>> {
    let op = DiscreteIntegral::new(inst.alpha, &inst.psi, inst.mesh());
    series_nodes_with(inst, &op, kmax)
}

fn series_nodes_with(inst: &GronwallInstance, op: &DiscreteIntegral, kmax: usize) -> Result<Vec<f64>> {
    let n = inst.mesh().len();
    let c: Vec<f64> = inst.g.values.iter().map(|g| g * gamma(inst.alpha)).collect();
    let mut sum = inst.v.values.clone();
    let mut prev = vec![f64::INFINITY; n];
    let mut done: Vec<bool> = c.iter().map(|&ci| ci == 0.0).collect();
    done[0] = true;
    let mut cpow = vec![1.0; n];
    let mut j = inst.v.values.clone();
    for _ in 1..=kmax {
        if done.iter().all(|&d| d) {
            return Ok(sum);
        }
        j = op.apply(&j);
        for m in 1..n {
            if done[m] {
                continue;
            }
            cpow[m] *= c[m];
            let t = cpow[m] * j[m];
            sum[m] += t;
            if t == 0.0 || (t.abs() <= SERIES_TOL * sum[m].abs() && t.abs() <= prev[m]) {
                done[m] = true;
            }
            prev[m] = t.abs();
        }
    }
    if let Some(m) = done.iter().position(|&d| !d) {
        return Err(Error::Truncation(format!(
            "Gronwall series not converged after {kmax} terms at u = {}",
            inst.mesh()[m]
        )));
    }
    Ok(sum)
}

/// v(u) E_α(g(u)Γ(α)[ψ(u)-ψ(a)]^α).
pub fn gronwall_ml_bound(inst: &GronwallInstance, u: f64) -> Result<f64> {
    if !inst.v_nondecreasing() {
        return Err(Error::Monotonicity("v must be nondecreasing for the closed-form bound".into()));
    }
    inst.check_u(u)?;
    let vu = inst.v.value_at(u)?;
    let gu = inst.g.value_at(u)?;
    ml_closed_form(inst, vu, gu, u)
}

fn ml_closed_form(inst: &GronwallInstance, vu: f64, gu: f64, u: f64) -> Result<f64> {
    if gu == 0.0 {
        return Ok(vu);
    }
    let p = MlfParams::new(inst.alpha, 1.0)?;
    let w = inst.psi.eval(u) - inst.psi.eval(inst.a);
    Ok(vu * ml_eval(&p, gu * gamma(inst.alpha) * w.powf(inst.alpha))?)
}

#[derive(Clone, Debug)]
pub struct GronwallPoint {
    pub u: f64,
    pub zeta: f64,
    pub hypothesis_rhs: f64,
    pub series_bound: f64,
    pub ml_bound: Option<f64>,
    /// series bound - ζ(u).
    pub margin: f64,
    /// (closed-form bound - ζ(u)) / closed-form bound.
    pub ml_margin_rel: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct GronwallReport {
    pub points: Vec<GronwallPoint>,
    pub worst_margin: f64,
    pub worst_ml_margin_rel: Option<f64>,
}

/// Slack allowed in the hypothesis check.
pub fn hypothesis_tolerance(rhs: f64) -> f64 {
    1e-9 + 1e-6 * rhs.abs()
}

/// Checks ζ ≤ v + g ∫ψ'(ψ(u)-ψ)^{α-1}ζ at every node, then reports the
/// margins of ζ under the series and (for nondecreasing v) closed-form bounds.
/// The hypothesis integral and the series share one discrete product rule,
/// so an exact solution of the discrete equality has zero series margin up
/// to rounding; the closed-form margin also carries the rule's error.
pub fn gronwall_verify(inst: &GronwallInstance, zeta: &Sampled) -> Result<GronwallReport> {
    if zeta.mesh != inst.v.mesh {
        return Err(Error::Mesh("zeta must be sampled on the instance mesh".into()));
    }
    if zeta.values.iter().any(|&z| !(z >= 0.0)) {
        return domain("zeta must be non-negative");
    }
    let ga = gamma(inst.alpha);
    let op = DiscreteIntegral::new(inst.alpha, &inst.psi, inst.mesh());
    let iz = op.apply(&zeta.values);
    let mesh = inst.mesh();
    for m in 1..mesh.len() {
        let rhs = inst.v.values[m] + inst.g.values[m] * ga * iz[m];
        if zeta.values[m] > rhs + hypothesis_tolerance(rhs) {
            return Err(Error::Hypothesis(format!(
                "zeta({}) = {} exceeds the hypothesis right side {rhs}",
                mesh[m], zeta.values[m]
            )));
        }
    }
    let gmax = inst.g.values.iter().fold(0.0f64, |a, &b| a.max(b));
    let span = inst.psi.eval(inst.b) - inst.psi.eval(inst.a);
    let kmax = DEFAULT_KMAX.max(terms_needed(inst.alpha, gmax * ga * span.powf(inst.alpha)) + 10);
    let series = series_nodes_with(inst, &op, kmax)?;
    let mono = inst.v_nondecreasing();
    let mut points = Vec::with_capacity(mesh.len() - 1);
    let mut worst = f64::INFINITY;
    let mut worst_ml = None;
    for m in 1..mesh.len() {
        let u = mesh[m];
        let ml = if mono {
            ml_closed_form(inst, inst.v.values[m], inst.g.values[m], u).ok()
        } else {
            None
        };
        let margin = series[m] - zeta.values[m];
        worst = worst.min(margin);
        let ml_margin_rel = ml.map(|b| (b - zeta.values[m]) / b);
        if let Some(r) = ml_margin_rel {
            worst_ml = Some(worst_ml.map_or(r, |w: f64| w.min(r)));
        }
        points.push(GronwallPoint {
            u,
            zeta: zeta.values[m],
            hypothesis_rhs: inst.v.values[m] + inst.g.values[m] * ga * iz[m],
            series_bound: series[m],
            ml_bound: ml,
            margin,
            ml_margin_rel,
        });
    }
    Ok(GronwallReport {
        points,
        worst_margin: worst,
        worst_ml_margin_rel: worst_ml,
    })
}

/// ζ = 1 + c ∫_0^u (u-s)^{α-1} ζ(s) ds on the mesh u_max (j/n)^2: implicit
/// product integration with piecewise-linear ζ on this mesh and on its
/// bisection, combined by Richardson extrapolation.
pub fn volterra_equality_solution(alpha: f64, c: f64, u_max: f64, n: usize) -> Result<Sampled> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return domain(format!("alpha must lie in (0,1], got {alpha}"));
    }
    if n < 2 || !(u_max > 0.0) {
        return domain("need n >= 2 and u_max > 0");
    }
    let coarse = volterra_equality_on(alpha, c, graded_mesh(u_max, n, 2.0))?;
    let fine = volterra_equality_on(alpha, c, graded_mesh(u_max, 2 * n, 2.0))?;
    let values = coarse
        .values
        .iter()
        .enumerate()
        .map(|(j, z)| (4.0 * fine.values[2 * j] - z) / 3.0)
        .collect();
    Sampled::new(coarse.mesh, values)
}

/// Same as `volterra_equality_solution` on a given mesh starting at 0.
pub fn volterra_equality_on(alpha: f64, c: f64, t: Vec<f64>) -> Result<Sampled> {
    if t.len() < 2 || t[0] != 0.0 {
        return Err(Error::Mesh("mesh must start at 0 with at least two points".into()));
    }
    let n = t.len() - 1;
    let mut z = vec![0.0; n + 1];
    z[0] = 1.0;
    for m in 1..=n {
        let big = t[m];
        let mut acc = 0.0;
        let mut diag = 0.0;
        for i in 0..m {
            let h = t[i + 1] - t[i];
            let (i0, j1) = moments(alpha, big - t[i], h);
            acc += z[i] * (i0 - j1 / h);
            if i + 1 < m {
                acc += z[i + 1] * (j1 / h);
            } else {
                diag = j1 / h;
            }
        }
        z[m] = (1.0 + c * acc) / (1.0 - c * diag);
    }
    Sampled::new(t, z)
}
