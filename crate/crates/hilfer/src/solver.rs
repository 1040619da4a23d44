//! Mild solutions on a graded mesh: product integration against the
//! Mittag-Leffler resolvent kernel, mode by mode, and Picard iteration.

use crate::error::{domain, Error, Result};
use crate::frac_ops::{graded_mesh, moments, FracOrder};
use crate::mlf::{MlTable, MlfParams};
use crate::nonlinearity::{NonlinearityKind, TestNonlinearity};
use crate::operator::{ml_modal_factors, SectorialModel};
use crate::special::gamma;
use nalgebra::DVector;
use rayon::prelude::*;
use std::io::Write;
use std::path::Path;
use std::sync::OnceLock;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 200;
/// Largest resolvent weight table kept in memory; above it rows are
/// recomputed on every sweep.
pub const WEIGHT_CACHE_BYTES: usize = 256 << 20;

/// Intervals shorter than this fraction of their distance to the
/// evaluation point use Gauss-Legendre instead of primitive differences.
const GAUSS_SWITCH: f64 = 0.005;
const GL2: [(f64, f64); 2] = [(-0.577_350_269_189_625_8, 1.0), (0.577_350_269_189_625_8, 1.0)];

/// t_j = τ₀ (j/N)^r.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    pub tau0: f64,
    pub n: usize,
    pub r_grade: f64,
    pub points: Vec<f64>,
}

impl TimeGrid {
    pub fn new(tau0: f64, n: usize, r_grade: f64) -> Result<Self> {
        if !(tau0 > 0.0 && tau0.is_finite()) {
            return Err(Error::Mesh(format!("horizon must be positive, got {tau0}")));
        }
        if n < 2 {
            return Err(Error::Mesh("need at least two intervals".into()));
        }
        if !(r_grade >= 1.0 && r_grade.is_finite()) {
            return Err(Error::Mesh(format!("grading exponent must be >= 1, got {r_grade}")));
        }
        let points = graded_mesh(tau0, n, r_grade);
        if points.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Mesh("grid points not strictly increasing".into()));
        }
        Ok(TimeGrid {
            tau0,
            n,
            r_grade,
            points,
        })
    }

    /// Grading max(2, 2/α).
    pub fn default_grade(alpha: f64) -> f64 {
        (2.0f64).max(2.0 / alpha)
    }

    pub fn with_default_grade(tau0: f64, n: usize, alpha: f64) -> Result<Self> {
        Self::new(tau0, n, Self::default_grade(alpha))
    }

    /// Index of the grid point equal to u up to rounding.
    pub fn index_of(&self, u: f64) -> Option<usize> {
        let i = self.points.partition_point(|&t| t < u);
        [i.checked_sub(1), Some(i)]
            .into_iter()
            .flatten()
            .filter(|&k| k < self.points.len())
            .find(|&k| (self.points[k] - u).abs() <= 1e-12 * u.abs().max(1e-300))
    }
}

/// Values on a grid, stored as eigen-coordinates, row-major (point, mode).
#[derive(Clone, Debug, PartialEq)]
pub struct GridValues {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl GridValues {
    pub fn zeros(points: usize, dim: usize) -> Self {
        GridValues {
            dim,
            data: vec![0.0; points * dim],
        }
    }

    pub fn from_fn(grid: &TimeGrid, dim: usize, mut f: impl FnMut(usize, f64) -> Vec<f64>) -> Self {
        let mut data = Vec::with_capacity(grid.points.len() * dim);
        for (j, &t) in grid.points.iter().enumerate() {
            let v = f(j, t);
            assert_eq!(v.len(), dim);
            data.extend(v);
        }
        GridValues { dim, data }
    }

    pub fn points(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.data[j * self.dim..(j + 1) * self.dim]
    }

    pub fn row_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.dim..(j + 1) * self.dim]
    }

    pub fn sub(&self, other: &GridValues) -> GridValues {
        GridValues {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn add_assign(&mut self, other: &GridValues) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn scale(&self, s: f64) -> GridValues {
        GridValues {
            dim: self.dim,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct MildProblem {
    pub ord: FracOrder,
    pub model: SectorialModel,
    pub f_term: TestNonlinearity,
    pub g_term: TestNonlinearity,
    /// Initial datum, physical coordinates.
    pub zeta0: DVector<f64>,
}

impl MildProblem {
    pub fn new(
        ord: FracOrder,
        model: SectorialModel,
        f_term: TestNonlinearity,
        g_term: TestNonlinearity,
        zeta0: DVector<f64>,
    ) -> Result<Self> {
        let p = MildProblem {
            ord,
            model,
            f_term,
            g_term,
            zeta0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.check_dim(&self.zeta0)?;
        if !self.model.symmetric {
            return domain("the solver needs a symmetric model");
        }
        if self.zeta0.iter().any(|x| !x.is_finite()) {
            return domain("initial datum must be finite");
        }
        let (f, g) = (&self.f_term.class, &self.g_term.class);
        f.validate()?;
        g.validate()?;
        let lo = f.gamma_eps.min(g.gamma_eps);
        let hi = f.eps.max(g.eps);
        if !(lo > hi) {
            return Err(Error::ClassViolation(format!(
                "need min(gamma_eps, eta) > max(eps1, eps2), got {lo} <= {hi}"
            )));
        }
        let d = self.model.dim;
        for t in [&self.f_term, &self.g_term] {
            let len = match &t.kind {
                NonlinearityKind::Linear { coeffs } => Some(coeffs.len()),
                NonlinearityKind::Forced { direction, .. } => Some(direction.len()),
                NonlinearityKind::Kernel { w, .. } => Some(w.len()),
                _ => None,
            };
            if let Some(l) = len {
                if l != d {
                    return Err(Error::Dimension { expected: d, got: l });
                }
            }
        }
        Ok(())
    }

    pub fn eps_list(&self) -> Vec<f64> {
        vec![self.f_term.class.eps, self.g_term.class.eps]
    }

    pub fn zeta0_modal(&self) -> Vec<f64> {
        self.model
            .to_modal(&self.zeta0)
            .expect("validated symmetric model")
            .as_slice()
            .to_vec()
    }
}

/// g(τ, x) = c₀ τ^q · state_map(x) as (c₀, q).
fn memory_form(g: &TestNonlinearity) -> (f64, f64) {
    match &g.kind {
        NonlinearityKind::Zero => (0.0, 0.0),
        NonlinearityKind::Linear { .. } => (1.0, 0.0),
        NonlinearityKind::Memory { c0, q } | NonlinearityKind::Kernel { c0, q, .. } => (*c0, *q),
        NonlinearityKind::Power { c0 } => (*c0, g.class.v),
        // δ·min(1, τ)^p τ^{v+q₁*} with τ ≤ τ₀ ≤ 1
        NonlinearityKind::Forced { c0, .. } => {
            let c = &g.class;
            (c0 * c.delta, c.vmod_power + c.v + c.q1s)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub ratio: f64,
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct MildSolution {
    pub grid: TimeGrid,
    /// Eigen-coordinates; row 0 holds the weighted limit lim t^{1-γ}ζ(t).
    pub values: GridValues,
    /// (ε, sup_j t_j^{εγ}‖ζ(t_j)‖_{1+ε}).
    pub weighted_norms: Vec<(f64, f64)>,
    pub iterations: Vec<IterationRecord>,
}

impl MildSolution {
    pub fn modal_at(&self, j: usize) -> &[f64] {
        self.values.row(j)
    }

    pub fn physical_at(&self, model: &SectorialModel, j: usize) -> Result<DVector<f64>> {
        model.from_modal(&DVector::from_column_slice(self.values.row(j)))
    }

    pub fn write_csv(&self, prob: &MildProblem, path: &Path) -> Result<()> {
        let mut w = csv_writer(path)?;
        let dim = self.values.dim;
        let eps = prob.eps_list();
        let mut head = vec!["t".to_string()];
        head.extend((0..dim).map(|k| format!("mode_{k}")));
        head.extend(eps.iter().enumerate().map(|(i, _)| format!("weighted_{i}")));
        w.write_record(&head).map_err(csv_err)?;
        for (j, &t) in self.grid.points.iter().enumerate() {
            let row = self.values.row(j);
            let mut rec: Vec<String> = vec![fmt(t)];
            rec.extend(row.iter().map(|&x| fmt(x)));
            for &e in &eps {
                let v = if j == 0 {
                    f64::NAN
                } else {
                    t.powf(e * prob.ord.gamma) * prob.model.modal_norm(1.0 + e, row)
                };
                rec.push(fmt(v));
            }
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_trace_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv_writer(path)?;
        w.write_record(["iter", "ratio", "residual"]).map_err(csv_err)?;
        for r in &self.iterations {
            w.write_record([r.iter.to_string(), fmt(r.ratio), fmt(r.residual)])
                .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Round-trip exact decimal form.
pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

pub(crate) fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(csv_err)
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        k => Error::Io(std::io::Error::other(format!("{k:?}"))),
    }
}

/// u^{γ-1} E_{α,γ}(-u^α A) ζ₀ in physical coordinates.
pub fn homogeneous_term(prob: &MildProblem, u: f64) -> Result<DVector<f64>> {
    if !(u > 0.0) && prob.ord.gamma < 1.0 {
        return Err(Error::Singularity("homogeneous term at u = 0 with gamma < 1".into()));
    }
    let c = homogeneous_modal(prob, &prob.zeta0_modal(), u)?;
    prob.model.from_modal(&DVector::from_vec(c))
}

fn homogeneous_modal(prob: &MildProblem, z0: &[f64], u: f64) -> Result<Vec<f64>> {
    let g = prob.ord.gamma;
    let fac = ml_modal_factors(prob.ord.alpha, g, g - 1.0, u, &prob.model)?;
    Ok(z0.iter().zip(fac).map(|(a, b)| a * b).collect())
}

/// Mode-wise weights of ∫₀^u (u-s)^{α-1}E_{α,α}(-λ(u-s)^α) φ(s) ds for φ
/// piecewise linear on the grid.
struct ResolventKernel {
    alpha: f64,
    lambdas: Vec<f64>,
    t: Vec<f64>,
    /// E_{α,α}, E_{α,α+1}, E_{α,α+2}
    tables: [MlTable; 3],
    cache: OnceLock<Option<Vec<Vec<f64>>>>,
}

impl ResolventKernel {
    fn new(alpha: f64, model: &SectorialModel, t: &[f64]) -> Result<Self> {
        let lambdas = model.eigenvalues.as_slice().to_vec();
        let xmax = model.lambda_max() * t.last().unwrap().powf(alpha);
        let tab = |b: f64| MlTable::new(MlfParams::new(alpha, b)?, xmax);
        let tables = [tab(alpha)?, tab(alpha + 1.0)?, tab(alpha + 2.0)?];
        Ok(ResolventKernel {
            alpha,
            lambdas,
            t: t.to_vec(),
            tables,
            cache: OnceLock::new(),
        })
    }

    fn cached_rows(&self) -> Option<&Vec<Vec<f64>>> {
        self.cache
            .get_or_init(|| {
                let n = self.t.len();
                let bytes = self.dim() * n * (n + 1) / 2 * 8;
                (bytes <= WEIGHT_CACHE_BYTES)
                    .then(|| (0..n).into_par_iter().map(|j| self.row(self.t[j])).collect())
            })
            .as_ref()
    }

    fn dim(&self) -> usize {
        self.lambdas.len()
    }

    /// Weights for nodes 0..m at the point u, laid out (node, mode).
    fn row(&self, u: f64) -> Vec<f64> {
        let d = self.dim();
        let t = &self.t;
        let nint = t.partition_point(|&s| s < u).min(t.len() - 1);
        if nint == 0 {
            return vec![0.0; d];
        }
        let a = self.alpha;
        let mut w = vec![0.0; (nint + 1) * d];
        // primitives P, Q at node σ = u - t_m, filled on demand
        let mut pq: Vec<Option<Vec<(f64, f64)>>> = vec![None; nint + 1];
        let prim = |sig: f64| -> Vec<(f64, f64)> {
            if sig <= 0.0 {
                return vec![(0.0, 0.0); d];
            }
            let sa = sig.powf(a);
            self.lambdas
                .iter()
                .map(|&l| {
                    let e1 = self.tables[1].eval(l * sa);
                    let e2 = self.tables[2].eval(l * sa);
                    (sa * e1, sig * sa * (e1 - e2))
                })
                .collect()
        };
        for i in 0..nint {
            let h = t[i + 1] - t[i];
            let shi = u - t[i];
            let slo = (u - t[i + 1]).max(0.0);
            let (wl, wr) = w[i * d..(i + 2) * d].split_at_mut(d);
            if shi - slo <= GAUSS_SWITCH * slo {
                let mid = 0.5 * (shi + slo);
                let half = 0.5 * (shi - slo);
                for &(x, gw) in &GL2 {
                    let s = mid + half * x;
                    let sa = s.powf(a);
                    let base = gw * half * sa / s;
                    let lin = (shi - s) / h;
                    for k in 0..d {
                        let kv = base * self.tables[0].eval(self.lambdas[k] * sa);
                        wl[k] += kv * (1.0 - lin);
                        wr[k] += kv * lin;
                    }
                }
            } else {
                if pq[i].is_none() {
                    pq[i] = Some(prim(shi));
                }
                if pq[i + 1].is_none() {
                    pq[i + 1] = Some(prim(slo));
                }
                let (hi, lo) = (pq[i].as_ref().unwrap(), pq[i + 1].as_ref().unwrap());
                for k in 0..d {
                    let m0 = hi[k].0 - lo[k].0;
                    let m1 = shi * m0 - (hi[k].1 - lo[k].1);
                    wl[k] += m0 - m1 / h;
                    wr[k] += m1 / h;
                }
            }
        }
        w
    }

    fn dot(&self, w: &[f64], psi: &GridValues) -> Vec<f64> {
        let d = self.dim();
        let mut out = vec![0.0; d];
        for (m, wm) in w.chunks_exact(d).enumerate() {
            let p = psi.row(m);
            for k in 0..d {
                out[k] += wm[k] * p[k];
            }
        }
        out
    }

    fn apply(&self, psi: &GridValues) -> GridValues {
        let cache = self.cached_rows();
        let rows: Vec<Vec<f64>> = (0..self.t.len())
            .into_par_iter()
            .map(|j| match cache {
                Some(c) => self.dot(&c[j], psi),
                None => self.dot(&self.row(self.t[j]), psi),
            })
            .collect();
        GridValues {
            dim: self.dim(),
            data: rows.concat(),
        }
    }

    fn apply_at(&self, u: f64, psi: &GridValues) -> Vec<f64> {
        self.dot(&self.row(u), psi)
    }
}

/// ∫₀^s (s-r)^q φ(r) dr for piecewise linear φ, as a packed lower
/// triangle of scalar weights.
struct MemoryWeights {
    rows: Vec<Vec<f64>>,
}

impl MemoryWeights {
    fn new(q: f64, t: &[f64]) -> Self {
        let nu = q + 1.0;
        let rows = (0..t.len())
            .into_par_iter()
            .map(|m| {
                let mut w = vec![0.0; m + 1];
                for i in 0..m {
                    let h = t[i + 1] - t[i];
                    let shi = t[m] - t[i];
                    let (i0, j1) = moments(nu, shi, h);
                    w[i] += i0 - j1 / h;
                    w[i + 1] += j1 / h;
                }
                w
            })
            .collect();
        MemoryWeights { rows }
    }
}

/// The mild-solution map Λ on a fixed grid with all reusable weights.
pub struct MildOperator<'a> {
    pub prob: &'a MildProblem,
    pub grid: &'a TimeGrid,
    homogeneous: GridValues,
    kernel: ResolventKernel,
    memory: Option<MemoryWeights>,
}

impl<'a> MildOperator<'a> {
    pub fn new(prob: &'a MildProblem, grid: &'a TimeGrid) -> Result<Self> {
        prob.validate()?;
        if matches!(prob.g_term.kind, NonlinearityKind::Forced { .. }) && grid.tau0 > 1.0 {
            return domain("a forced memory kernel needs tau0 <= 1");
        }
        let d = prob.model.dim;
        let z0 = prob.zeta0_modal();
        let g = prob.ord.gamma;
        let alpha = prob.ord.alpha;
        let lam = prob.model.eigenvalues.as_slice();
        let table = MlTable::new(MlfParams::new(alpha, g)?, prob.model.lambda_max() * grid.tau0.powf(alpha))?;
        let rows: Vec<Vec<f64>> = grid
            .points
            .par_iter()
            .enumerate()
            .map(|(j, &t)| {
                if j == 0 {
                    z0.iter().map(|x| x / gamma(g)).collect()
                } else {
                    let (pre, ta) = (t.powf(g - 1.0), t.powf(alpha));
                    z0.iter().zip(lam).map(|(x, l)| x * pre * table.eval(l * ta)).collect()
                }
            })
            .collect();
        let homogeneous = GridValues { dim: d, data: rows.concat() };
        let kernel = ResolventKernel::new(prob.ord.alpha, &prob.model, &grid.points)?;
        let (c0, q) = memory_form(&prob.g_term);
        let memory = (c0 != 0.0 && !prob.g_term.state_independent()).then(|| MemoryWeights::new(q, &grid.points));
        Ok(MildOperator {
            prob,
            grid,
            homogeneous,
            kernel,
            memory,
        })
    }

    pub fn homogeneous(&self) -> &GridValues {
        &self.homogeneous
    }

    fn singular_start(&self) -> bool {
        self.prob.ord.gamma < 1.0
    }

    /// Node values of a state map with the row at t₀ replaced by the
    /// row at t₁ when ζ(t₀) is not a value.
    fn node_values(&self, zeta: &GridValues, f: impl Fn(usize, f64, &[f64]) -> Vec<f64> + Sync) -> GridValues {
        let t = &self.grid.points;
        let rows: Vec<Vec<f64>> = (0..t.len())
            .into_par_iter()
            .map(|j| f(j, t[j], zeta.row(j)))
            .collect();
        let mut out = GridValues {
            dim: zeta.dim,
            data: rows.concat(),
        };
        if self.singular_start() || out.row(0).iter().any(|x| !x.is_finite()) {
            let r1 = out.row(1).to_vec();
            out.row_mut(0).copy_from_slice(&r1);
        }
        out
    }

    /// f(t_j, ζ(t_j)).
    pub fn f_nodes(&self, zeta: &GridValues) -> GridValues {
        let f = &self.prob.f_term;
        let m = &self.prob.model;
        self.node_values(zeta, |_, t, z| f.eval(t, z, m))
    }

    /// ∫₀^{t_j} g(t_j - r, ζ(r)) dr.
    pub fn g_inner(&self, zeta: &GridValues) -> GridValues {
        let g = &self.prob.g_term;
        let d = zeta.dim;
        let t = &self.grid.points;
        let (c0, q) = memory_form(g);
        if c0 == 0.0 || g.is_zero() {
            return GridValues::zeros(t.len(), d);
        }
        let m = &self.prob.model;
        if g.state_independent() {
            let w = g.state_map(zeta.row(0), m);
            return GridValues::from_fn(self.grid, d, |_, s| {
                let c = c0 * s.powf(q + 1.0) / (q + 1.0);
                w.iter().map(|x| x * c).collect()
            });
        }
        let psi = self.node_values(zeta, |_, _, z| g.state_map(z, m));
        let mw = self.memory.as_ref().expect("memory weights");
        let rows: Vec<Vec<f64>> = mw
            .rows
            .par_iter()
            .map(|w| {
                let mut acc = vec![0.0; d];
                for (i, wi) in w.iter().enumerate() {
                    for (a, p) in acc.iter_mut().zip(psi.row(i)) {
                        *a += c0 * wi * p;
                    }
                }
                acc
            })
            .collect();
        GridValues { dim: d, data: rows.concat() }
    }

    /// Resolvent convolution of arbitrary node values.
    pub fn convolve(&self, psi: &GridValues) -> GridValues {
        self.kernel.apply(psi)
    }

    pub fn f_convolution(&self, zeta: &GridValues) -> GridValues {
        if self.prob.f_term.is_zero() {
            return GridValues::zeros(self.grid.points.len(), zeta.dim);
        }
        self.convolve(&self.f_nodes(zeta))
    }

    pub fn g_double_convolution(&self, zeta: &GridValues) -> GridValues {
        if self.prob.g_term.is_zero() {
            return GridValues::zeros(self.grid.points.len(), zeta.dim);
        }
        self.convolve(&self.g_inner(zeta))
    }

    fn integrand(&self, zeta: &GridValues) -> Option<GridValues> {
        let fz = self.prob.f_term.is_zero();
        let gz = self.prob.g_term.is_zero();
        match (fz, gz) {
            (true, true) => None,
            (false, true) => Some(self.f_nodes(zeta)),
            (true, false) => Some(self.g_inner(zeta)),
            (false, false) => {
                let mut p = self.f_nodes(zeta);
                p.add_assign(&self.g_inner(zeta));
                Some(p)
            }
        }
    }

    /// Λζ at every grid point.
    pub fn apply(&self, zeta: &GridValues) -> GridValues {
        let mut out = self.homogeneous.clone();
        if let Some(p) = self.integrand(zeta) {
            let mut c = self.convolve(&p);
            c.row_mut(0).fill(0.0);
            out.add_assign(&c);
        }
        out
    }

    /// Λζ at an arbitrary u ∈ (0, τ₀], from grid values of ζ.
    pub fn apply_at(&self, u: f64, zeta: &GridValues) -> Result<Vec<f64>> {
        if !(u > 0.0 && u <= self.grid.tau0 * (1.0 + 1e-12)) {
            return domain(format!("evaluation point {u} outside (0, tau0]"));
        }
        let mut h = homogeneous_modal(self.prob, &self.prob.zeta0_modal(), u)?;
        if let Some(p) = self.integrand(zeta) {
            for (a, b) in h.iter_mut().zip(self.kernel.apply_at(u, &p)) {
                *a += b;
            }
        }
        Ok(h)
    }

    pub fn weighted_norm(&self, zeta: &GridValues) -> f64 {
        weighted_norm(zeta, self.grid, &self.prob.eps_list(), &self.prob.ord, &self.prob.model)
    }
}

/// f-part of Λ at t_j (eigen-coordinates).
pub fn f_convolution(prob: &MildProblem, grid: &TimeGrid, zeta: &GridValues, j: usize) -> Result<Vec<f64>> {
    let op = MildOperator::new(prob, grid)?;
    Ok(op.f_convolution(zeta).row(j).to_vec())
}

/// g-part of Λ at t_j (eigen-coordinates).
pub fn g_double_convolution(prob: &MildProblem, grid: &TimeGrid, zeta: &GridValues, j: usize) -> Result<Vec<f64>> {
    let op = MildOperator::new(prob, grid)?;
    Ok(op.g_double_convolution(zeta).row(j).to_vec())
}

pub fn apply_lambda(prob: &MildProblem, grid: &TimeGrid, zeta: &GridValues) -> Result<GridValues> {
    Ok(MildOperator::new(prob, grid)?.apply(zeta))
}

/// max_i max_{j≥1} t_j^{ε_iγ} ‖ζ(t_j)‖_{1+ε_i}.
pub fn weighted_norm(zeta: &GridValues, grid: &TimeGrid, eps_list: &[f64], ord: &FracOrder, model: &SectorialModel) -> f64 {
    eps_list
        .iter()
        .map(|&e| weighted_norm_single(zeta, grid, e, ord.gamma, model))
        .fold(0.0, f64::max)
}

pub fn weighted_norm_single(zeta: &GridValues, grid: &TimeGrid, eps: f64, gamma_: f64, model: &SectorialModel) -> f64 {
    (1..grid.points.len())
        .map(|j| grid.points[j].powf(eps * gamma_) * model.modal_norm(1.0 + eps, zeta.row(j)))
        .fold(0.0, f64::max)
}

/// Plain Picard iteration from the homogeneous term.
pub fn picard_solve(prob: &MildProblem, grid: &TimeGrid, tol: f64, max_iter: usize) -> Result<MildSolution> {
    let op = MildOperator::new(prob, grid)?;
    picard_with(&op, tol, max_iter)
}

pub fn picard_with(op: &MildOperator<'_>, tol: f64, max_iter: usize) -> Result<MildSolution> {
    let mut zeta = op.homogeneous().clone();
    let mut trace = Vec::new();
    let mut prev = f64::NAN;
    for it in 1..=max_iter.max(1) {
        let next = op.apply(&zeta);
        let res = op.weighted_norm(&next.sub(&zeta));
        let size = op.weighted_norm(&next);
        let ratio = if it == 1 || prev == 0.0 { f64::NAN } else { res / prev };
        trace.push(IterationRecord {
            iter: it,
            ratio,
            residual: res,
        });
        if !res.is_finite() || !size.is_finite() {
            return Err(Error::NonConvergence { iterations: it, ratio });
        }
        zeta = next;
        if res <= tol * size.max(1.0) {
            let eps = op.prob.eps_list();
            let weighted_norms = eps
                .iter()
                .map(|&e| (e, weighted_norm_single(&zeta, op.grid, e, op.prob.ord.gamma, &op.prob.model)))
                .collect();
            return Ok(MildSolution {
                grid: op.grid.clone(),
                values: zeta,
                weighted_norms,
                iterations: trace,
            });
        }
        prev = res;
    }
    let ratio = trace.last().map_or(f64::NAN, |r| r.ratio);
    Err(Error::NonConvergence {
        iterations: max_iter,
        ratio,
    })
}

/// The solution at an arbitrary u by one Nyström step from the grid values.
pub fn evaluate_at(prob: &MildProblem, sol: &MildSolution, u: f64) -> Result<Vec<f64>> {
    let op = MildOperator::new(prob, &sol.grid)?;
    op.apply_at(u, &sol.values)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LimitKind {
    RiemannLiouville,
    Caputo,
}

/// The same problem with the type parameter pinned to 0 or 1. The datum
/// keeps its meaning as lim I^{1-γ}ζ.
pub fn limit_variant(prob: &MildProblem, which: LimitKind) -> Result<MildProblem> {
    let beta_t = match which {
        LimitKind::RiemannLiouville => 0.0,
        LimitKind::Caputo => 1.0,
    };
    let mut p = prob.clone();
    p.ord = FracOrder::new(prob.ord.alpha, beta_t)?;
    Ok(p)
}

/// Writes one "key = value" line per entry.
pub fn write_summary(path: &Path, lines: &[(String, String)]) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    for (k, v) in lines {
        writeln!(f, "{k} = {v}")?;
    }
    Ok(())
}
