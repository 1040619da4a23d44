//! Run configuration: a flat, sectioned `key = value` file.
//!
//! ```text
//! [problem]
//! alpha = 0.6
//! beta_t = 0.5
//! model = laplacian        ; laplacian | diag | file
//! model_n = 8
//! zeta0 = 0.1              ; one value broadcasts, otherwise one per mode
//!
//! [f]
//! kind = power             ; zero | linear | power | forced | memory | kernel
//! c0 = 0.0005
//! eps = 0.1
//! rho = 2
//! gamma_eps = 0.5
//!
//! [grid]
//! tau0 = 1
//! n = 256
//!
//! [verify]
//! checks = lemma2, lemma4, contraction
//! ```
//!
//! `zeta0` is in physical coordinates; the vectors `coeffs`, `direction`
//! and `w` of the f/g sections are in eigen-coordinates of the model.
//!
//! Everything is validated by [`RunConfig::from_str`], before any
//! numerical work.

use crate::error::{Error, Result};
use crate::frac_ops::FracOrder;
use crate::nonlinearity::{EpsRegularClass, NonlinearityKind, TestNonlinearity};
use crate::operator::SectorialModel;
use crate::solver::{MildProblem, TimeGrid, DEFAULT_MAX_ITER, DEFAULT_TOL};
use ini::{Ini, Properties};
use nalgebra::DVector;
use std::path::{Path, PathBuf};

/// Checks understood by `verify`, in run order.
pub const ALL_CHECKS: [&str; 8] = [
    "lemma2",
    "lemma3",
    "lemma4",
    "lemma5",
    "uniqueness",
    "smoothing",
    "contraction",
    "dependence",
];

#[derive(Clone, Debug)]
pub struct GridConfig {
    pub tau0: f64,
    pub n: usize,
    pub r_grade: f64,
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
}

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub checks: Vec<String>,
    pub seed: u64,
    /// Ball radius for the contraction check; `None` picks the largest
    /// radius in (0,1] that passes the smallness test.
    pub mu: Option<f64>,
    pub pairs: usize,
    pub dependence_pairs: usize,
    pub dependence_delta: f64,
    pub smoothing_beta: Vec<f64>,
    pub smoothing_samples: usize,
    /// Pass threshold for the N vs 2N disagreement.
    pub uniqueness_tol: f64,
}

#[derive(Clone, Debug)]
pub struct MlfConfig {
    pub alpha: f64,
    pub beta: f64,
    pub z: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub problem: MildProblem,
    pub grid: GridConfig,
    pub solver: SolverConfig,
    pub verify: VerifyConfig,
    pub mlf: Option<MlfConfig>,
    pub out_dir: PathBuf,
}

fn cfg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

struct Section<'a> {
    name: &'a str,
    props: Option<&'a Properties>,
}

impl<'a> Section<'a> {
    fn new(ini: &'a Ini, name: &'a str) -> Self {
        Section {
            name,
            props: ini.section(Some(name)),
        }
    }

    fn raw(&self, key: &str) -> Option<&'a str> {
        self.props.and_then(|p| p.get(key)).map(str::trim)
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.raw(key) {
            None => Ok(default),
            Some(s) => parse_f64(s).or_else(|_| cfg(format!("[{}] {key}: not a number: {s:?}", self.name))),
        }
    }

    fn f64_req(&self, key: &str) -> Result<f64> {
        match self.raw(key) {
            None => cfg(format!("[{}] {key} is required", self.name)),
            Some(_) => self.f64_or(key, 0.0),
        }
    }

    fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.raw(key) {
            None => Ok(default),
            Some(s) => s
                .parse()
                .or_else(|_| cfg(format!("[{}] {key}: not a non-negative integer: {s:?}", self.name))),
        }
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.raw(key) {
            None => Ok(None),
            Some(s) => parse_list(s)
                .map(Some)
                .or_else(|_| cfg(format!("[{}] {key}: bad number list: {s:?}", self.name))),
        }
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        if let Some(p) = self.props {
            for (k, _) in p.iter() {
                if !allowed.contains(&k) {
                    return cfg(format!("[{}] unknown key {k:?}", self.name));
                }
            }
        }
        Ok(())
    }
}

fn parse_f64(s: &str) -> std::result::Result<f64, ()> {
    let v: f64 = match s {
        "pi" => std::f64::consts::PI,
        _ => s.parse().map_err(|_| ())?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(())
    }
}

/// Comma- or whitespace-separated numbers.
pub fn parse_list(s: &str) -> std::result::Result<Vec<f64>, ()> {
    let v: Vec<f64> = s
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(parse_f64)
        .collect::<std::result::Result<_, _>>()?;
    if v.is_empty() {
        Err(())
    } else {
        Ok(v)
    }
}

fn broadcast(v: Vec<f64>, dim: usize, what: &str) -> Result<Vec<f64>> {
    match v.len() {
        1 => Ok(vec![v[0]; dim]),
        n if n == dim => Ok(v),
        n => cfg(format!("{what}: expected 1 or {dim} values, got {n}")),
    }
}

const CLASS_KEYS: [&str; 9] = [
    "eps",
    "rho",
    "gamma_eps",
    "q1",
    "q1s",
    "v",
    "c_const",
    "delta",
    "vmod_power",
];

fn term(ini: &Ini, name: &'static str, dim: usize) -> Result<TestNonlinearity> {
    let s = Section::new(ini, name);
    let mut keys = CLASS_KEYS.to_vec();
    keys.extend(["kind", "c0", "coeffs", "direction", "q", "w"]);
    s.check_keys(&keys)?;
    let class = EpsRegularClass {
        eps: s.f64_or("eps", 0.1)?,
        rho: s.f64_or("rho", 2.0)?,
        gamma_eps: s.f64_or("gamma_eps", 0.5)?,
        q1: s.f64_or("q1", 0.0)?,
        q1s: s.f64_or("q1s", 0.0)?,
        v: s.f64_or("v", 0.0)?,
        c_const: s.f64_or("c_const", 1.0)?,
        delta: s.f64_or("delta", 0.0)?,
        vmod_power: s.f64_or("vmod_power", 1.0)?,
    };
    let vec_of = |key: &str| -> Result<Vec<f64>> {
        match s.list(key)? {
            Some(v) => broadcast(v, dim, &format!("[{name}] {key}")),
            None => cfg(format!("[{name}] {key} is required for this kind")),
        }
    };
    let t = match s.raw("kind").unwrap_or("zero") {
        "zero" => TestNonlinearity::zero(class),
        "linear" => TestNonlinearity {
            kind: NonlinearityKind::Linear { coeffs: vec_of("coeffs")? },
            class,
        },
        "power" => TestNonlinearity::power(s.f64_req("c0")?, class)?,
        "forced" => TestNonlinearity::forced(s.f64_req("c0")?, vec_of("direction")?, class)?,
        "memory" => TestNonlinearity {
            kind: NonlinearityKind::Memory {
                c0: s.f64_req("c0")?,
                q: s.f64_or("q", 0.0)?,
            },
            class,
        },
        "kernel" => TestNonlinearity {
            kind: NonlinearityKind::Kernel {
                c0: s.f64_req("c0")?,
                q: s.f64_or("q", 0.0)?,
                w: vec_of("w")?,
            },
            class,
        },
        k => return cfg(format!("[{name}] unknown kind {k:?}")),
    };
    t.class.validate()?;
    Ok(t)
}

fn model(s: &Section<'_>, base: &Path) -> Result<SectorialModel> {
    match s.raw("model").unwrap_or("laplacian") {
        "laplacian" => SectorialModel::build_dirichlet_laplacian(
            s.usize_or("model_n", 8)?,
            s.f64_or("model_length", std::f64::consts::PI)?,
            s.f64_or("model_scale", 1.0)?,
        ),
        "diag" => match s.list("model_diag")? {
            Some(v) => SectorialModel::diag(&v),
            None => cfg("[problem] model_diag is required for model = diag"),
        },
        "file" => match s.raw("model_file") {
            Some(p) => {
                let path = base.join(p);
                if !path.is_file() {
                    return cfg(format!("model file {} not found", path.display()));
                }
                SectorialModel::load(&path)
            }
            None => cfg("[problem] model_file is required for model = file"),
        },
        m => cfg(format!("[problem] unknown model {m:?}")),
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .or_else(|e| cfg(format!("cannot read {}: {e}", path.display())))?;
        Self::from_str(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Parses and validates; relative paths resolve against `base`.
    #[allow(clippy::should_implement_trait)]
    pub fn from_str(text: &str, base: &Path) -> Result<Self> {
        let ini = Ini::load_from_str(text).or_else(|e| cfg(format!("parse error: {e}")))?;
        for (sec, _) in ini.iter() {
            match sec {
                None | Some("problem" | "f" | "g" | "grid" | "solver" | "verify" | "output" | "mlf") => {}
                Some(s) => return cfg(format!("unknown section [{s}]")),
            }
        }
        if ini.general_section().iter().next().is_some() {
            return cfg("keys outside a section");
        }

        let p = Section::new(&ini, "problem");
        p.check_keys(&[
            "alpha",
            "beta_t",
            "model",
            "model_n",
            "model_length",
            "model_scale",
            "model_diag",
            "model_file",
            "zeta0",
        ])?;
        let ord = FracOrder::new(p.f64_or("alpha", 0.5)?, p.f64_or("beta_t", 1.0)?)?;
        let model = model(&p, base)?;
        let dim = model.dim;
        let z0 = broadcast(p.list("zeta0")?.unwrap_or(vec![0.1]), dim, "[problem] zeta0")?;
        let f = term(&ini, "f", dim)?;
        let g = term(&ini, "g", dim)?;
        let problem = MildProblem::new(ord, model, f, g, DVector::from_vec(z0))?;

        let gs = Section::new(&ini, "grid");
        gs.check_keys(&["tau0", "n", "r_grade"])?;
        let tau0 = gs.f64_or("tau0", 1.0)?;
        let n = gs.usize_or("n", 256)?;
        let r_grade = gs.f64_or("r_grade", TimeGrid::default_grade(ord.alpha))?;
        TimeGrid::new(tau0, n, r_grade)?;
        let grid = GridConfig { tau0, n, r_grade };

        let ss = Section::new(&ini, "solver");
        ss.check_keys(&["tol", "max_iter"])?;
        let solver = SolverConfig {
            tol: ss.f64_or("tol", DEFAULT_TOL)?,
            max_iter: ss.usize_or("max_iter", DEFAULT_MAX_ITER)?,
        };
        if !(solver.tol > 0.0) || solver.max_iter == 0 {
            return cfg("[solver] tol and max_iter must be positive");
        }

        let vs = Section::new(&ini, "verify");
        vs.check_keys(&[
            "checks",
            "seed",
            "mu",
            "pairs",
            "dependence_pairs",
            "dependence_delta",
            "smoothing_beta",
            "smoothing_samples",
            "uniqueness_tol",
        ])?;
        let checks: Vec<String> = match vs.raw("checks") {
            None | Some("all") => ALL_CHECKS.iter().map(|s| s.to_string()).collect(),
            Some(s) => s
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(str::to_string)
                .collect(),
        };
        for c in &checks {
            if !ALL_CHECKS.contains(&c.as_str()) {
                return cfg(format!("[verify] unknown check {c:?}"));
            }
        }
        let mu = match vs.raw("mu") {
            None | Some("auto") => None,
            Some(_) => Some(vs.f64_req("mu")?),
        };
        if let Some(m) = mu {
            if !(m > 0.0 && m <= 1.0) {
                return cfg("[verify] mu must lie in (0,1]");
            }
        }
        let smoothing_beta = vs.list("smoothing_beta")?.unwrap_or(vec![0.0, 0.5, 1.0]);
        if smoothing_beta.iter().any(|b| !(0.0..=1.0).contains(b)) {
            return cfg("[verify] smoothing_beta values must lie in [0,1]");
        }
        let verify = VerifyConfig {
            checks,
            seed: vs.usize_or("seed", 0)? as u64,
            mu,
            pairs: vs.usize_or("pairs", 20)?,
            dependence_pairs: vs.usize_or("dependence_pairs", 10)?,
            dependence_delta: vs.f64_or("dependence_delta", 1e-2)?,
            smoothing_beta,
            smoothing_samples: vs.usize_or("smoothing_samples", 100)?,
            uniqueness_tol: vs.f64_or("uniqueness_tol", 5e-3)?,
        };

        let ms = Section::new(&ini, "mlf");
        ms.check_keys(&["alpha", "beta", "z"])?;
        let mlf = match ms.props {
            None => None,
            Some(_) => Some(MlfConfig {
                alpha: ms.f64_req("alpha")?,
                beta: ms.f64_or("beta", 1.0)?,
                z: ms.list("z")?.unwrap_or(vec![0.0]),
            }),
        };

        let os = Section::new(&ini, "output");
        os.check_keys(&["dir"])?;
        let out_dir = base.join(os.raw("dir").unwrap_or("out"));

        Ok(RunConfig {
            problem,
            grid,
            solver,
            verify,
            mlf,
            out_dir,
        })
    }

    pub fn time_grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.grid.tau0, self.grid.n, self.grid.r_grade)
    }
}
