//! Finite-dimensional positive sectorial operators, their fractional power
//! scale and the operator Mittag-Leffler families.
//!
//! Two independent evaluation routes exist: spectral (eigen-decomposition,
//! symmetric models) and the Hankel contour integral of the resolvent
//! (any model with spectrum in the open right half plane).

use crate::error::{domain, Error, Result};
use crate::mlf::{contour_parameters, ml_global, ml_weighted, MlfParams};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::fmt::Write as _;
use std::path::Path;

#[derive(Clone, Debug)]
pub struct SectorialModel {
    pub dim: usize,
    pub matrix: DMatrix<f64>,
    /// Ascending. Real parts for non-symmetric models.
    pub eigenvalues: DVector<f64>,
    /// Orthonormal columns matching `eigenvalues` (symmetric models only).
    pub eigenvectors: DMatrix<f64>,
    /// Smallest eigenvalue (real part); positive.
    pub sector_margin: f64,
    pub symmetric: bool,
}

/// The norm of 𝔹_θ, ‖x‖_θ = ‖A^θ x‖.
#[derive(Clone, Copy, Debug)]
pub struct ScaleNorm<'a> {
    pub theta: f64,
    pub model: &'a SectorialModel,
}

/// Which contour-defined family to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// E_α(-u^α A)
    First,
    /// E_{α,α}(-u^α A)
    Second,
}

impl SectorialModel {
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        let dim = matrix.nrows();
        if dim == 0 || matrix.ncols() != dim {
            return Err(Error::Dimension {
                expected: dim,
                got: matrix.ncols(),
            });
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return domain("matrix has non-finite entries");
        }
        let scale = matrix.norm().max(f64::MIN_POSITIVE);
        let asym = (&matrix - matrix.transpose()).norm();
        if asym <= 1e-12 * scale {
            let sym = (&matrix + matrix.transpose()) * 0.5;
            let eig = sym.clone().symmetric_eigen();
            let mut order: Vec<usize> = (0..dim).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
            let eigenvalues = DVector::from_iterator(dim, order.iter().map(|&i| eig.eigenvalues[i]));
            let mut eigenvectors = DMatrix::zeros(dim, dim);
            for (j, &i) in order.iter().enumerate() {
                let mut v = eig.eigenvectors.column(i).into_owned();
                // deterministic sign: largest component positive
                let imax = v.iamax();
                if v[imax] < 0.0 {
                    v = -v;
                }
                eigenvectors.set_column(j, &v);
            }
            let sector_margin = eigenvalues[0];
            if !(sector_margin > 0.0) {
                return domain(format!("operator not positive: smallest eigenvalue {sector_margin}"));
            }
            let model = SectorialModel {
                dim,
                matrix: sym,
                eigenvalues,
                eigenvectors,
                sector_margin,
                symmetric: true,
            };
            let rec = model.reconstruction_error();
            if rec > 1e-10 {
                return domain(format!("eigen-decomposition reconstruction error {rec}"));
            }
            Ok(model)
        } else {
            let ev = matrix.complex_eigenvalues();
            let mut re: Vec<f64> = ev.iter().map(|z| z.re).collect();
            re.sort_by(f64::total_cmp);
            let sector_margin = re[0];
            if !(sector_margin > 0.0) {
                return domain(format!(
                    "spectrum must lie in the right half plane, min real part {sector_margin}"
                ));
            }
            Ok(SectorialModel {
                dim,
                matrix,
                eigenvalues: DVector::from_vec(re),
                eigenvectors: DMatrix::zeros(0, 0),
                sector_margin,
                symmetric: false,
            })
        }
    }

    pub fn diag(values: &[f64]) -> Result<Self> {
        Self::from_matrix(DMatrix::from_diagonal(&DVector::from_column_slice(values)))
    }

    /// scale · (-d²/dx²) on `n` interior points of [0, length], Dirichlet ends.
    pub fn build_dirichlet_laplacian(n: usize, length: f64, scale: f64) -> Result<Self> {
        if n < 1 {
            return domain("Laplacian needs at least one interior point");
        }
        if !(length > 0.0 && scale > 0.0) {
            return domain("length and scale must be positive");
        }
        let h = length / (n as f64 + 1.0);
        let c = scale / (h * h);
        let m = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                2.0 * c
            } else if i.abs_diff(j) == 1 {
                -c
            } else {
                0.0
            }
        });
        Self::from_matrix(m)
    }

    /// ‖V diag(λ) Vᵀ - A‖_F / ‖A‖_F.
    pub fn reconstruction_error(&self) -> f64 {
        let d = DMatrix::from_diagonal(&self.eigenvalues);
        let r = &self.eigenvectors * d * self.eigenvectors.transpose();
        (r - &self.matrix).norm() / self.matrix.norm()
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues[self.dim - 1]
    }

    fn require_symmetric(&self) -> Result<()> {
        if self.symmetric {
            Ok(())
        } else {
            domain("spectral route needs a symmetric model")
        }
    }

    pub fn check_dim(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Coordinates in the eigenbasis, Vᵀx.
    pub fn to_modal(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.require_symmetric()?;
        self.check_dim(x)?;
        Ok(self.eigenvectors.tr_mul(x))
    }

    /// Back from eigen-coordinates, Vc.
    pub fn from_modal(&self, c: &DVector<f64>) -> Result<DVector<f64>> {
        self.require_symmetric()?;
        self.check_dim(c)?;
        Ok(&self.eigenvectors * c)
    }

    /// ‖A^θ x‖ from eigen-coordinates.
    pub fn modal_norm(&self, theta: f64, c: &[f64]) -> f64 {
        c.iter()
            .zip(self.eigenvalues.iter())
            .map(|(ci, &l)| {
                let v = ci * l.powf(theta);
                v * v
            })
            .sum::<f64>()
            .sqrt()
    }

    /// ‖A^θ x‖.
    pub fn norm(&self, theta: f64, x: &DVector<f64>) -> Result<f64> {
        let c = self.to_modal(x)?;
        Ok(self.modal_norm(theta, c.as_slice()))
    }

    /// A^θ x.
    pub fn power_apply(&self, theta: f64, x: &DVector<f64>) -> Result<DVector<f64>> {
        let mut c = self.to_modal(x)?;
        for (ci, &l) in c.iter_mut().zip(self.eigenvalues.iter()) {
            *ci *= l.powf(theta);
        }
        self.from_modal(&c)
    }

    /// Whitespace-separated rows, one per line.
    pub fn export_text(&self) -> String {
        let mut s = String::new();
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim).map(|j| format!("{:.16e}", self.matrix[(i, j)])).collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
        s
    }

    /// Parses the format written by `export_text`; blank lines and lines
    /// starting with '#' are ignored.
    pub fn import_text(text: &str) -> Result<Self> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row: std::result::Result<Vec<f64>, _> = line.split_whitespace().map(str::parse).collect();
            rows.push(row.map_err(|e| Error::Config(format!("matrix line {}: {e}", ln + 1)))?);
        }
        let n = rows.len();
        if n == 0 {
            return Err(Error::Config("empty matrix file".into()));
        }
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::Config(format!("matrix is not square: row of {} in {n} rows", r.len())));
        }
        Self::from_matrix(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::import_text(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.export_text())?;
        Ok(())
    }
}

/// ‖x‖ in the scale space 𝔹_θ.
pub fn theta_norm(x: &DVector<f64>, s: &ScaleNorm<'_>) -> Result<f64> {
    if s.theta < 0.0 {
        return domain("scale index must be non-negative");
    }
    s.model.norm(s.theta, x)
}

/// λ ↦ t^p E_{α,b}(-t^α λ) at every eigenvalue.
pub fn ml_modal_factors(alpha: f64, second: f64, prefactor: f64, t: f64, model: &SectorialModel) -> Result<Vec<f64>> {
    if t < 0.0 {
        return domain("time must be non-negative");
    }
    if t == 0.0 && prefactor < 0.0 {
        return Err(Error::Singularity(format!(
            "t^{prefactor} at t = 0"
        )));
    }
    let p = MlfParams::new(alpha, second)?;
    let pre = if prefactor == 0.0 { 1.0 } else { t.powf(prefactor) };
    let ta = t.powf(alpha);
    model
        .eigenvalues
        .iter()
        .map(|&l| Ok(pre * ml_global(&p, -ta * l)?))
        .collect()
}

/// t^p E_{α,b}(-t^α A) x by the spectral route.
pub fn ml_operator(
    ord_alpha: f64,
    second_param: f64,
    power_prefactor: f64,
    t: f64,
    model: &SectorialModel,
    x: &DVector<f64>,
) -> Result<DVector<f64>> {
    let mut c = model.to_modal(x)?;
    let f = ml_modal_factors(ord_alpha, second_param, power_prefactor, t, model)?;
    for (ci, fi) in c.iter_mut().zip(f) {
        *ci *= fi;
    }
    model.from_modal(&c)
}

/// Nodes per half line of the operator contour rule.
pub const OPERATOR_CONTOUR_NODES: usize = 20;
/// Agreement required between the two node counts of the internal check.
pub const CONTOUR_CHECK_TOL: f64 = 1e-7;

fn contour_sum(alpha: f64, u: f64, model: &SectorialModel, x: &DVector<f64>, which: Family, n: usize) -> Result<DVector<f64>> {
    let dim = model.dim;
    let (h, mu) = contour_parameters(n);
    let a = model.matrix.map(|v| Complex64::new(v, 0.0));
    let xc = x.map(|v| Complex64::new(v, 0.0));
    let mut acc = DVector::<f64>::zeros(dim);
    for k in 0..=n {
        let v = k as f64 * h;
        let wv = Complex64::new(1.0, v);
        // σ on the parabola, λ = σ/u
        let sigma = mu * wv * wv;
        let dsigma = Complex64::new(0.0, 2.0 * mu) * wv;
        let lam = sigma / u;
        let la = lam.powf(alpha);
        let mut m = a.clone();
        for i in 0..dim {
            m[(i, i)] += la;
        }
        let lu = m.lu();
        let y = lu
            .solve(&xc)
            .ok_or_else(|| Error::Resolvent(format!("singular resolvent at λ = {lam}")))?;
        if y.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Resolvent(format!("non-finite resolvent solve at λ = {lam}")));
        }
        let weight = match which {
            Family::First => lam.powf(alpha - 1.0),
            Family::Second => Complex64::new(u.powf(1.0 - alpha), 0.0),
        };
        // dλ = dσ/u
        let factor = sigma.exp() * weight * dsigma / u;
        let half = if k == 0 { 0.5 } else { 1.0 };
        for i in 0..dim {
            acc[i] += half * (factor * y[i]).im;
        }
    }
    Ok(acc * (h / std::f64::consts::PI))
}

/// E_α(-u^α A)x or E_{α,α}(-u^α A)x from the resolvent integral over a
/// parabolic Hankel path, with dense complex LU solves at every node.
pub fn hankel_contour_operator(
    alpha: f64,
    u: f64,
    model: &SectorialModel,
    x: &DVector<f64>,
    which: Family,
) -> Result<DVector<f64>> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("contour families need alpha in (0,1), got {alpha}"));
    }
    if !(u > 0.0 && u.is_finite()) {
        return domain(format!("contour families need u > 0, got {u}"));
    }
    model.check_dim(x)?;
    let n = OPERATOR_CONTOUR_NODES;
    let v1 = contour_sum(alpha, u, model, x, which, n)?;
    let v2 = contour_sum(alpha, u, model, x, which, n - 4)?;
    let scale = v1.norm().max(f64::MIN_POSITIVE);
    let diff = (&v1 - &v2).norm();
    if diff > CONTOUR_CHECK_TOL * scale {
        return Err(Error::Contour(format!(
            "node counts {n} and {} disagree by {:e} relative",
            n - 4,
            diff / scale
        )));
    }
    Ok(v1)
}

/// sup over u in `u_grid` and eigenvalues λ of (u^α λ)^w |E_{α,b}(-u^α λ)|,
/// raised to the continuous supremum over [0, max u^α λ].
pub fn estimate_theta_family(model: &SectorialModel, alpha: f64, second: f64, weight: f64, u_grid: &[f64]) -> Result<f64> {
    if u_grid.iter().any(|&u| !(u > 0.0)) {
        return domain("u grid must be positive");
    }
    if weight < 0.0 {
        return domain("weight exponent must be non-negative");
    }
    let p = MlfParams::new(alpha, second)?;
    let mut sup: f64 = 0.0;
    let mut xmax: f64 = 0.0;
    for &u in u_grid {
        let ua = u.powf(alpha);
        for &l in model.eigenvalues.iter() {
            let x = ua * l;
            xmax = xmax.max(x);
            let v = ml_global(&p, -x)?.abs();
            sup = sup.max(if weight == 0.0 { v } else { x.powf(weight) * v });
        }
    }
    if weight == 0.0 {
        // E_{α,b}(-x) is completely monotone for b ≥ α: the sup sits at 0
        sup = sup.max(ml_global(&p, 0.0)?.abs());
    }
    if xmax > 0.0 {
        sup = sup.max(ml_weighted(&p, weight, xmax)?);
    }
    Ok(sup)
}

/// Θ with ‖E_α(-u^α A)x‖_{β̃} ≤ Θ u^{-αβ̃}‖x‖ on the given grid.
pub fn estimate_theta_constant(model: &SectorialModel, alpha: f64, beta_tilde: f64, u_grid: &[f64]) -> Result<f64> {
    if !(0.0..=1.0).contains(&beta_tilde) {
        return domain("beta_tilde must lie in [0,1]");
    }
    estimate_theta_family(model, alpha, 1.0, beta_tilde, u_grid)
}

/// `n` log-spaced points in [lo, hi].
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}
