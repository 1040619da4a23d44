//! Batch entry points behind the `hilfer` binary.
//!
//! Exit codes: 0 ok, 1 configuration or validation error, 2 non-convergence
//! (or a failed verification), 64 usage error. Errors are printed to
//! stderr as `ERROR:<kind>:<message>`.

use crate::config::{RunConfig, VerifyConfig};
use crate::error::{Error, Result};
use crate::mlf::{ml_eval, MlfParams};
use crate::nonlinearity::{smallness_check, EpsRegularClass};
use crate::operator::{log_grid, SectorialModel};
use crate::solver::{fmt, picard_with, write_summary, MildOperator};
use crate::verify::{
    contraction_check, continuous_dependence_check, lambda_eps, lemma2_check, lemma3_check, lemma4_check,
    lemma5_check, random_ball_trajectory, smoothing_check, uniqueness_check, write_reports_csv, EstimateReport,
    TheoremConstants,
};
use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NONCONVERGENCE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "hilfer", version, about = "Mild solutions of Hilfer fractional integro-differential equations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct CommonArgs {
    /// Run configuration (INI-style).
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory, overrides [output] dir.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Seed for the random checks, overrides [verify] seed.
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, value_name = "N")]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the configured problem by Picard iteration.
    Solve(CommonArgs),
    /// Run the configured estimate checks.
    Verify(CommonArgs),
    /// Print E_{α,β}(z) for a list of arguments.
    Mlf {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        /// Comma-separated arguments.
        #[arg(long, allow_hyphen_values = true)]
        z: Option<String>,
    },
    /// Write the configured operator model as text.
    ModelExport(CommonArgs),
}

/// Exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NonConvergence { .. } | Error::Divergence(_) => EXIT_NONCONVERGENCE,
        _ => EXIT_CONFIG,
    }
}

fn report_error(e: &Error) {
    eprintln!("ERROR:{}:{}", e.kind(), e);
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    EXIT_OK
                }
                _ => {
                    eprintln!("ERROR:UsageError:{}", e.to_string().lines().next().unwrap_or(""));
                    EXIT_USAGE
                }
            };
        }
    };
    let common = match &cli.command {
        Command::Solve(c) | Command::Verify(c) | Command::ModelExport(c) => c,
        Command::Mlf { common, .. } => common,
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(common.threads.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("ERROR:UsageError:{e}");
            return EXIT_USAGE;
        }
    };
    pool.install(|| dispatch(&cli.command))
}

fn dispatch(cmd: &Command) -> i32 {
    let load = |c: &CommonArgs| -> Result<RunConfig> {
        let mut cfg = match &c.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::from_str("", Path::new("."))?,
        };
        if let Some(o) = &c.out {
            cfg.out_dir = o.clone();
        }
        if let Some(s) = c.seed {
            cfg.verify.seed = s;
        }
        Ok(cfg)
    };
    let res = match cmd {
        Command::Solve(c) => load(c).and_then(|cfg| run_solve(&cfg).map(|_| EXIT_OK)),
        Command::Verify(c) => load(c).and_then(|cfg| {
            run_verify(&cfg).map(|s| {
                print!("{}", s.table());
                if s.all_passed() {
                    EXIT_OK
                } else {
                    EXIT_NONCONVERGENCE
                }
            })
        }),
        Command::ModelExport(c) => load(c).and_then(|cfg| {
            let p = run_model_export(&cfg)?;
            println!("{}", p.display());
            Ok(EXIT_OK)
        }),
        Command::Mlf { common, alpha, beta, z } => {
            let from_cfg = match &common.config {
                Some(_) => match load(common) {
                    Ok(c) => c.mlf,
                    Err(e) => {
                        report_error(&e);
                        return exit_code(&e);
                    }
                },
                None => None,
            };
            let a = alpha.or(from_cfg.as_ref().map(|m| m.alpha));
            let b = beta.or(from_cfg.as_ref().map(|m| m.beta)).unwrap_or(1.0);
            let zs = match z {
                Some(s) => match crate::config::parse_list(s) {
                    Ok(v) => Some(v),
                    Err(_) => {
                        eprintln!("ERROR:UsageError:bad --z list {s:?}");
                        return EXIT_USAGE;
                    }
                },
                None => from_cfg.as_ref().map(|m| m.z.clone()),
            };
            let (Some(a), Some(zs)) = (a, zs) else {
                eprintln!("ERROR:UsageError:mlf needs --alpha and --z (or an [mlf] section)");
                return EXIT_USAGE;
            };
            let stdout = std::io::stdout();
            match run_mlf(a, b, &zs, &mut stdout.lock()) {
                Err(e @ Error::Domain(_)) => {
                    eprintln!("ERROR:UsageError:{e}");
                    return EXIT_USAGE;
                }
                r => r.map(|_| EXIT_OK),
            }
        }
    };
    res.unwrap_or_else(|e| {
        report_error(&e);
        exit_code(&e)
    })
}

/// Tab-separated `z value` lines.
pub fn run_mlf(alpha: f64, beta: f64, z: &[f64], out: &mut impl Write) -> Result<()> {
    let p = MlfParams::new(alpha, beta)?;
    let vals = z.iter().map(|&x| ml_eval(&p, x)).collect::<Result<Vec<_>>>()?;
    for (x, v) in z.iter().zip(vals) {
        writeln!(out, "{x}\t{}", fmt(v))?;
    }
    Ok(())
}

/// What a solve wrote.
#[derive(Clone, Debug)]
pub struct SolveArtifacts {
    pub solution: PathBuf,
    pub trace: PathBuf,
    pub summary: PathBuf,
    pub iterations: usize,
}

/// Writes `solution.csv`, `trace.csv` and `summary.txt` into the output
/// directory.
pub fn run_solve(cfg: &RunConfig) -> Result<SolveArtifacts> {
    let grid = cfg.time_grid()?;
    let op = MildOperator::new(&cfg.problem, &grid)?;
    let sol = picard_with(&op, cfg.solver.tol, cfg.solver.max_iter)?;
    std::fs::create_dir_all(&cfg.out_dir)?;
    let art = SolveArtifacts {
        solution: cfg.out_dir.join("solution.csv"),
        trace: cfg.out_dir.join("trace.csv"),
        summary: cfg.out_dir.join("summary.txt"),
        iterations: sol.iterations.len(),
    };
    sol.write_csv(&cfg.problem, &art.solution)?;
    sol.write_trace_csv(&art.trace)?;
    let ord = &cfg.problem.ord;
    let mut lines = vec![
        ("alpha".to_string(), fmt(ord.alpha)),
        ("beta_t".to_string(), fmt(ord.beta_t)),
        ("gamma".to_string(), fmt(ord.gamma)),
        ("points".to_string(), grid.points.len().to_string()),
        ("iterations".to_string(), art.iterations.to_string()),
    ];
    for ((e, v), term) in sol.weighted_norms.iter().zip(["f", "g"]) {
        lines.push((format!("weighted_norm_{term}(eps={e})"), fmt(*v)));
    }
    write_summary(&art.summary, &lines)?;
    Ok(art)
}

/// Outcome of one check in a verify run.
#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub csv: PathBuf,
    pub note: String,
}

#[derive(Clone, Debug)]
pub struct VerifySummary {
    pub checks: Vec<CheckOutcome>,
    pub path: PathBuf,
}

impl VerifySummary {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn table(&self) -> String {
        self.checks
            .iter()
            .map(|c| format!("{}\t{}\t{}\n", c.name, if c.passed { "PASS" } else { "FAIL" }, c.note))
            .collect()
    }
}

/// Largest μ = 2^{-k} in (0,1] passing the smallness test, else the
/// smallest candidate.
pub fn auto_mu(k: &TheoremConstants, f: &EpsRegularClass, g: &EpsRegularClass) -> Result<(f64, bool)> {
    let mut mu = 1.0;
    for _ in 0..40 {
        if smallness_check(mu, f, g, k.theta, k.phi, k.b_tilde, k.b_inner)? {
            return Ok((mu, true));
        }
        mu *= 0.5;
    }
    Ok((mu, false))
}

fn summarize(reports: &[EstimateReport]) -> (bool, String) {
    let passed = reports.iter().all(|r| r.passed);
    let worst = reports.iter().map(|r| r.worst_margin).fold(f64::INFINITY, f64::min);
    let ratio = reports.iter().map(|r| r.max_ratio()).fold(0.0, f64::max);
    (passed, format!("worst_margin={}\tmax_ratio={}", fmt(worst), fmt(ratio)))
}

fn theta_list(eps: f64) -> [f64; 3] {
    [0.0, 0.5 * eps, eps]
}

fn perturbation(rng: &mut ChaCha8Rng, model: &SectorialModel, delta: f64) -> Result<DVector<f64>> {
    let d = DVector::from_fn(model.dim, |_, _| rng.random_range(-1.0..1.0));
    let n = model.norm(1.0, &d)?;
    Ok(d * (delta / n))
}

/// Runs the selected checks. Writes `<check>.csv` per check and
/// `summary.txt`; all randomness derives from the configured seed.
pub fn run_verify(cfg: &RunConfig) -> Result<VerifySummary> {
    let prob = &cfg.problem;
    let grid = cfg.time_grid()?;
    let vc: &VerifyConfig = &cfg.verify;
    std::fs::create_dir_all(&cfg.out_dir)?;
    let op = MildOperator::new(prob, &grid)?;
    let (fc, gc) = (&prob.f_term.class, &prob.g_term.class);
    let wants = |n: &str| vc.checks.iter().any(|c| c == n);

    let needs_traj = ["lemma2", "lemma3", "lemma4", "lemma5"].iter().any(|n| wants(n));
    let traj = if needs_traj {
        let sol = picard_with(&op, cfg.solver.tol, cfg.solver.max_iter)?;
        let mut z = sol.values;
        // row 0 holds the weighted limit, not a value
        z.row_mut(0).iter_mut().for_each(|x| *x = 0.0);
        let level = [fc.eps, gc.eps]
            .iter()
            .map(|&e| lambda_eps(&grid, &z, e, &prob.model).last().copied().unwrap_or(0.0))
            .fold(0.0, f64::max)
            .max(1e-3);
        let mut rng = ChaCha8Rng::seed_from_u64(vc.seed);
        let w = random_ball_trajectory(&mut rng, &op, level);
        let mu = [&z, &w]
            .iter()
            .flat_map(|t| [fc.eps, gc.eps].map(|e| lambda_eps(&grid, t, e, &prob.model).last().copied().unwrap_or(0.0)))
            .fold(0.0, f64::max);
        Some((z, w, mu))
    } else {
        None
    };

    let mut out = Vec::new();
    let mut push = |name: &str, reports: Vec<EstimateReport>, extra: Option<(bool, String)>| -> Result<()> {
        let csv = cfg.out_dir.join(format!("{name}.csv"));
        write_reports_csv(&reports, &csv)?;
        let (mut passed, mut note) = summarize(&reports);
        if let Some((ok, n)) = extra {
            passed &= ok;
            note = format!("{note}\t{n}");
        }
        out.push(CheckOutcome {
            name: name.to_string(),
            passed,
            csv,
            note,
        });
        Ok(())
    };

    if let Some((z, w, mu)) = &traj {
        if wants("lemma2") {
            let r = theta_list(fc.eps).iter().map(|&t| lemma2_check(&op, z, t)).collect::<Result<_>>()?;
            push("lemma2", r, None)?;
        }
        if wants("lemma3") {
            let r = theta_list(fc.eps)
                .iter()
                .map(|&t| lemma3_check(&op, z, w, t, *mu))
                .collect::<Result<_>>()?;
            push("lemma3", r, None)?;
        }
        if wants("lemma4") {
            let r = theta_list(gc.eps).iter().map(|&t| lemma4_check(&op, z, t)).collect::<Result<_>>()?;
            push("lemma4", r, None)?;
        }
        if wants("lemma5") {
            let r = theta_list(gc.eps)
                .iter()
                .map(|&t| lemma5_check(&op, z, w, t, *mu))
                .collect::<Result<_>>()?;
            push("lemma5", r, None)?;
        }
    }

    if wants("uniqueness") {
        let n = cfg.grid.n;
        let t = cfg.grid.tau0;
        let u = uniqueness_check(prob, (t, n), (t, 2 * n), cfg.grid.r_grade, cfg.solver.tol, cfg.solver.max_iter)?;
        let ok = u.disagreement <= vc.uniqueness_tol;
        let g_ok = u.gronwall.worst_margin >= -1e-6;
        push(
            "uniqueness",
            vec![u.report],
            Some((ok && g_ok, format!("disagreement={}\tgronwall_margin={}", fmt(u.disagreement), fmt(u.gronwall.worst_margin)))),
        )?;
    }

    if wants("smoothing") {
        let lo = grid.points[1];
        let u_grid = log_grid(lo, grid.tau0, 40);
        let r = smoothing_check(&prob.model, prob.ord.alpha, &vc.smoothing_beta, &u_grid, vc.smoothing_samples, vc.seed)?;
        push("smoothing", r, None)?;
    }

    let need_mu = wants("contraction") || wants("dependence");
    let constants = if need_mu {
        let k = TheoremConstants::new(&op)?;
        let (mu, small) = match vc.mu {
            Some(m) => (m, smallness_check(m, fc, gc, k.theta, k.phi, k.b_tilde, k.b_inner)?),
            None => auto_mu(&k, fc, gc)?,
        };
        Some((k, mu, small))
    } else {
        None
    };

    if wants("contraction") {
        let (k, mu, small) = constants.as_ref().map(|(k, m, s)| (k, *m, *s)).unwrap();
        let r = contraction_check(&op, mu, vc.pairs, vc.seed)?;
        push(
            "contraction",
            vec![r],
            Some((true, format!("mu={}\tsmallness={small}\ttheta={}", fmt(mu), fmt(k.theta)))),
        )?;
    }

    if wants("dependence") {
        let (_, mu, _) = constants.as_ref().map(|(k, m, s)| (k, *m, *s)).unwrap();
        let eps = fc.eps.min(gc.eps);
        let mut rng = ChaCha8Rng::seed_from_u64(vc.seed ^ 0x5eed);
        let mut reports = Vec::new();
        let mut cmax: f64 = 0.0;
        for i in 0..vc.dependence_pairs {
            let w0 = &prob.zeta0 + perturbation(&mut rng, &prob.model, vc.dependence_delta)?;
            let d = continuous_dependence_check(prob, &grid, &w0, &theta_list(eps), mu, cfg.solver.tol, cfg.solver.max_iter)?;
            cmax = cmax.max(d.constant);
            let mut r = d.report;
            r.name = format!("dependence(pair={i})");
            reports.push(r);
        }
        push("dependence", reports, Some((true, format!("constant={}", fmt(cmax)))))?;
    }

    let path = cfg.out_dir.join("summary.txt");
    let summary = VerifySummary { checks: out, path };
    let mut f = std::fs::File::create(&summary.path)?;
    f.write_all(summary.table().as_bytes())?;
    Ok(summary)
}

/// Writes `model.txt` (the text format read back by `model = file`).
pub fn run_model_export(cfg: &RunConfig) -> Result<PathBuf> {
    std::fs::create_dir_all(&cfg.out_dir)?;
    let p = cfg.out_dir.join("model.txt");
    cfg.problem.model.save(&p)?;
    Ok(p)
}
