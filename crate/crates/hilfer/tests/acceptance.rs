//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//! Each criterion also has a wall-clock budget.

use hilfer::cli::run_verify;
use hilfer::config::RunConfig;
use hilfer::frac_ops::{
    graded_mesh, hilfer_derivative_nodes, psi_frac_integral, psi_frac_integral_any, psi_frac_integral_nodes, FracOrder, PsiFunction, Sampled,
};
use hilfer::gronwall::{gronwall_verify, volterra_equality_on, volterra_equality_solution, GronwallInstance};
use hilfer::mlf::{ml_eval, ml_global, ml_series, MlfParams};
use hilfer::nonlinearity::{EpsRegularClass, NonlinearityKind, TestNonlinearity};
use hilfer::operator::{hankel_contour_operator, log_grid, ml_operator, Family, SectorialModel};
use hilfer::solver::{picard_with, GridValues, MildOperator, MildProblem, TimeGrid};
use hilfer::special::gamma;
use hilfer::verify::{
    contraction_check, continuous_dependence_check, lambda_eps, lemma2_check, lemma3_check, lemma4_check, lemma5_check,
    smoothing_check, uniqueness_check, TheoremConstants,
};
use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;
use std::time::Instant;

type Outcome = (bool, String);

fn class(eps: f64, gamma_eps: f64) -> EpsRegularClass {
    EpsRegularClass {
        eps,
        rho: 2.0,
        gamma_eps,
        q1: 0.0,
        q1s: 0.0,
        v: 0.0,
        c_const: 1.0,
        delta: 0.0,
        vmod_power: 1.0,
    }
}

fn forced_class(eps: f64, gamma_eps: f64) -> EpsRegularClass {
    EpsRegularClass {
        q1: -0.2,
        q1s: -0.3,
        delta: 0.5,
        vmod_power: 0.5,
        ..class(eps, gamma_eps)
    }
}

fn laplacian(n: usize) -> SectorialModel {
    SectorialModel::build_dirichlet_laplacian(n, PI, 1.0).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn mittag_leffler() -> Outcome {
    let e = ml_series(&MlfParams::new(1.0, 1.0).unwrap(), 1.0).unwrap();
    let d1 = (e - std::f64::consts::E).abs();
    let h = ml_global(&MlfParams::new(0.5, 1.0).unwrap(), -1.0).unwrap();
    let d2 = (h - std::f64::consts::E * libm::erfc(1.0)).abs();
    let mut d3: f64 = 0.0;
    for a in [0.3, 0.5, 0.7, 0.9] {
        for b in [a, 1.0, 2.0 * a + 1.0] {
            let p = MlfParams::new(a, b).unwrap();
            for i in 0..50 {
                let z = -5.0 * i as f64 / 49.0;
                let s = ml_series(&p, z).unwrap();
                let g = ml_global(&p, z).unwrap();
                d3 = d3.max((s - g).abs() / s.abs().max(1e-300));
            }
        }
    }
    (
        d1 <= 1e-12 && d2 <= 1e-10 && d3 <= 1e-9,
        format!("series e err {d1:.1e}, e*erfc(1) err {d2:.1e}, series/global {d3:.1e}"),
    )
}

fn fractional_operators() -> Outcome {
    let id = PsiFunction::identity();
    let mesh = graded_mesh(1.0, 4096, 1.0);
    let mut power: f64 = 0.0;
    let mut semi: f64 = 0.0;
    for (a, b, mu) in [(0.3, 0.5, 0.5), (0.5, 0.5, 1.0), (0.7, 0.2, 2.0)] {
        let f = Sampled::from_fn(&mesh, |s| s.powf(mu)).unwrap();
        let ib = Sampled::new(mesh.clone(), psi_frac_integral_nodes(b, &id, &f).unwrap()).unwrap();
        for u in [0.25f64, 0.5, 1.0] {
            let want = gamma(mu + 1.0) / gamma(mu + a + 1.0) * u.powf(mu + a);
            power = power.max(rel(psi_frac_integral(a, &id, &f, u).unwrap(), want));
            let ab = psi_frac_integral_any(a + b, &id, &f, u).unwrap();
            semi = semi.max(rel(psi_frac_integral(a, &id, &ib, u).unwrap(), ab));
        }
    }

    // the Hilfer derivative annihilates u^{γ-1}
    let mesh = graded_mesh(1.0, 512, 2.0);
    let mut kernel: f64 = 0.0;
    for (a, bt) in [(0.3, 0.75), (0.5, 0.5), (0.8, 0.25)] {
        let o = FracOrder::new(a, bt).unwrap();
        let f = Sampled::from_fn(&mesh, |u| u.powf(o.gamma - 1.0)).unwrap();
        let d = hilfer_derivative_nodes(&o, &id, &f).unwrap();
        for (u, v) in mesh.iter().zip(&d) {
            if (0.1..=1.0).contains(u) {
                kernel = kernel.max(v.abs());
            }
        }
    }

    // types 0 and 1, and types close to them, against the Riemann-Liouville
    // and Caputo closed forms for 1 + u
    let mesh = graded_mesh(1.0, 1024, 2.0);
    let f = Sampled::from_fn(&mesh, |u| 1.0 + u).unwrap();
    let mut limits: f64 = 0.0;
    for (a, bt, rl) in [(0.3, 0.0, true), (0.3, 1e-6, true), (0.6, 1.0, false), (0.6, 1.0 - 1e-6, false)] {
        let d = hilfer_derivative_nodes(&FracOrder::new(a, bt).unwrap(), &id, &f).unwrap();
        for u in [0.25, 0.5, 1.0] {
            let j = mesh.iter().position(|&m| m >= u).unwrap();
            let t = mesh[j];
            let caputo = t.powf(1.0 - a) / gamma(2.0 - a);
            let want = if rl { caputo + t.powf(-a) / gamma(1.0 - a) } else { caputo };
            limits = limits.max(rel(d[j], want));
        }
    }
    (
        power <= 1e-5 && semi <= 1e-5 && kernel < 1e-6 && limits <= 1e-4,
        format!("power rule {power:.1e}, semigroup {semi:.1e}, D u^(g-1) {kernel:.1e}, type limits {limits:.1e}"),
    )
}

fn operator_routes() -> Outcome {
    let m = laplacian(16);
    let x = DVector::from_fn(16, |i, _| ((i + 1) as f64 * 0.7).sin());
    let mut worst: f64 = 0.0;
    for a in [0.3, 0.6, 0.9] {
        for u in [0.01, 0.1, 1.0, 10.0] {
            for (fam, b, pre) in [(Family::First, 1.0, 0.0), (Family::Second, a, 0.0)] {
                let c = hankel_contour_operator(a, u, &m, &x, fam).unwrap();
                let s = ml_operator(a, b, pre, u, &m, &x).unwrap();
                worst = worst.max((c - &s).norm() / s.norm());
            }
        }
    }
    (worst <= 1e-8, format!("max relative difference {worst:.1e}"))
}

fn gronwall_saturation() -> Outcome {
    let mut eq: f64 = 0.0;
    let mut margin = f64::INFINITY;
    for a in [0.4, 0.5, 0.8] {
        let z = volterra_equality_solution(a, 1.0, 1.0, 1024).unwrap();
        let p = MlfParams::new(a, 1.0).unwrap();
        for u in [0.5f64, 1.0] {
            eq = eq.max(rel(z.value_at(u).unwrap(), ml_eval(&p, gamma(a) * u.powf(a)).unwrap()));
        }
        let raw = volterra_equality_on(a, 1.0, graded_mesh(1.0, 1024, 2.0)).unwrap();
        let inst = GronwallInstance::constant(a, PsiFunction::identity(), &raw.mesh, 1.0, 1.0).unwrap();
        margin = margin.min(gronwall_verify(&inst, &raw).unwrap().worst_margin);
    }
    (
        eq <= 1e-5 && margin >= -1e-6,
        format!("Volterra vs E_a(G(a)u^a) {eq:.1e}, worst margin {margin:.1e}"),
    )
}

fn kernel_example(alpha: f64, beta_t: f64, dim: usize) -> MildProblem {
    let ord = FracOrder::new(alpha, beta_t).unwrap();
    let g = TestNonlinearity {
        kind: NonlinearityKind::Kernel {
            c0: 1.0 / gamma(alpha),
            q: alpha - 1.0,
            w: vec![1.0; dim],
        },
        class: class(0.1, 0.5),
    };
    let z0 = DVector::from_fn(dim, |i, _| 1.0 / (1.0 + i as f64));
    MildProblem::new(ord, laplacian(dim), TestNonlinearity::zero(class(0.1, 0.5)), g, z0).unwrap()
}

fn example_closed_form() -> Outcome {
    let mut worst: f64 = 0.0;
    for alpha in [0.4, 0.7] {
        for bt in [0.0, 0.5, 1.0] {
            let p = kernel_example(alpha, bt, 8);
            let grid = TimeGrid::with_default_grade(1.0, 2048, alpha).unwrap();
            let op = MildOperator::new(&p, &grid).unwrap();
            let s = picard_with(&op, 1e-10, 200).unwrap();
            let z0 = p.zeta0_modal();
            let e1 = MlfParams::new(alpha, p.ord.gamma).unwrap();
            let e2 = MlfParams::new(alpha, 2.0 * alpha + 1.0).unwrap();
            for u in [0.25, 0.5, 1.0] {
                let v = match grid.index_of(u) {
                    Some(j) => s.values.row(j).to_vec(),
                    None => op.apply_at(u, &s.values).unwrap(),
                };
                for (k, &l) in p.model.eigenvalues.iter().enumerate() {
                    let x = -l * u.powf(alpha);
                    let want = u.powf(p.ord.gamma - 1.0) * ml_global(&e1, x).unwrap() * z0[k]
                        + u.powf(2.0 * alpha) * ml_global(&e2, x).unwrap();
                    worst = worst.max(rel(v[k], want));
                }
            }
        }
    }
    (worst <= 1e-3, format!("worst mode-wise relative error {worst:.1e}"))
}

fn contraction() -> Outcome {
    let f = TestNonlinearity::power(5e-4, class(0.1, 0.5)).unwrap();
    let g = TestNonlinearity::power(5e-4, class(0.1, 0.6)).unwrap();
    let p = MildProblem::new(FracOrder::new(0.6, 0.5).unwrap(), laplacian(6), f, g, DVector::from_element(6, 0.01)).unwrap();
    let grid = TimeGrid::with_default_grade(1.0, 256, 0.6).unwrap();
    let op = MildOperator::new(&p, &grid).unwrap();
    let k = TheoremConstants::new(&op).unwrap();
    let mu = 0.5;
    let small = k.smallness(&op, mu).unwrap();
    let r = contraction_check(&op, mu, 20, 2024).unwrap();
    let ratio = r.max_ratio();
    (
        small && r.samples.len() == 20 && ratio < 0.5,
        format!("smallness {small}, max ratio {ratio:.2e} over {} pairs", r.samples.len()),
    )
}

fn smooth(grid: &TimeGrid, dim: usize, s: f64, phase: f64) -> GridValues {
    GridValues::from_fn(grid, dim, |_, t| {
        (0..dim)
            .map(|k| s * (phase + 1.0 + t * k as f64).cos() / (1.0 + k as f64).powi(2))
            .collect()
    })
}

fn lemma_suites() -> Outcome {
    let m = laplacian(6);
    let dir = vec![1.0, 0.5, 0.0, 0.0, 0.2, 0.0];
    let terms = [
        (
            TestNonlinearity::power(1.0, class(0.1, 0.5)).unwrap(),
            TestNonlinearity::power(1.0, class(0.1, 0.6)).unwrap(),
        ),
        (
            TestNonlinearity::forced(1.0, dir.clone(), forced_class(0.1, 0.5)).unwrap(),
            TestNonlinearity::forced(1.0, dir, forced_class(0.1, 0.6)).unwrap(),
        ),
    ];
    let mut ok = true;
    let mut count = 0;
    let mut worst_rel = f64::INFINITY;
    for alpha in [0.5, 0.8] {
        for bt in [0.5, 1.0] {
            for (f, g) in &terms {
                let p = MildProblem::new(FracOrder::new(alpha, bt).unwrap(), m.clone(), f.clone(), g.clone(), DVector::from_element(6, 0.1))
                    .unwrap();
                let grid = TimeGrid::with_default_grade(1.0, 256, alpha).unwrap();
                let op = MildOperator::new(&p, &grid).unwrap();
                let z = smooth(&grid, 6, 0.5, 0.0);
                let w = smooth(&grid, 6, 0.3, 0.7);
                let top = |v: &GridValues| *lambda_eps(&grid, v, 0.1, &m).last().unwrap();
                let mu = top(&z).max(top(&w));
                for th in [0.0, 0.05, 0.1] {
                    for r in [
                        lemma2_check(&op, &z, th).unwrap(),
                        lemma3_check(&op, &z, &w, th, mu).unwrap(),
                        lemma4_check(&op, &z, th).unwrap(),
                        lemma5_check(&op, &z, &w, th, mu).unwrap(),
                    ] {
                        ok &= r.passed;
                        count += 1;
                        for s in &r.samples {
                            if s.rhs > 0.0 {
                                worst_rel = worst_rel.min(s.margin / s.rhs);
                            }
                        }
                    }
                }
            }
        }
    }

    // tightness probe: constant-in-time forcing with γ̃ close to 1 on a
    // nearly flat spectrum
    let mut tight = true;
    let mut ratios = Vec::new();
    for alpha in [0.5, 0.8] {
        let c = EpsRegularClass {
            gamma_eps: 0.99,
            q1: 0.0,
            q1s: -0.01,
            delta: 1.0,
            vmod_power: 0.01,
            ..class(0.1, 0.99)
        };
        let f = TestNonlinearity::forced(1.0, vec![1.0], c).unwrap();
        let g = TestNonlinearity::zero(class(0.1, 0.6));
        let p = MildProblem::new(FracOrder::new(alpha, 1.0).unwrap(), SectorialModel::diag(&[0.01]).unwrap(), f, g, DVector::zeros(1))
            .unwrap();
        let grid = TimeGrid::with_default_grade(1.0, 256, alpha).unwrap();
        let op = MildOperator::new(&p, &grid).unwrap();
        let r = lemma2_check(&op, &GridValues::zeros(grid.points.len(), 1), 0.0).unwrap();
        tight &= r.passed && r.is_tight();
        ratios.push(r.max_ratio());
    }
    (
        ok && tight,
        format!("{count} reports, smallest margin/rhs {worst_rel:.2e}, tightness ratios {:.3} {:.3}", ratios[0], ratios[1]),
    )
}

fn smoothing() -> Outcome {
    let m = laplacian(16);
    let u = log_grid(1e-3, 1.0, 20);
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for (i, alpha) in [0.3, 0.6, 0.9].into_iter().enumerate() {
        let reps = smoothing_check(&m, alpha, &[0.0, 0.5, 1.0], &u, 100, 40 + i as u64).unwrap();
        for r in reps {
            worst = worst.max(r.max_ratio());
            n += 1;
        }
    }
    (worst <= 1.0 + 1e-9, format!("{n} displays, max ratio to Theta-hat {worst:.12}"))
}

fn continuous_dependence() -> Outcome {
    let m = laplacian(6);
    let z0 = DVector::from_fn(6, |i, _| 0.02 * ((i + 1) as f64).sin());
    let f = TestNonlinearity::power(0.05, class(0.1, 0.5)).unwrap();
    let g = TestNonlinearity::power(0.05, class(0.1, 0.6)).unwrap();
    let p = MildProblem::new(FracOrder::new(0.6, 0.5).unwrap(), m.clone(), f, g, z0.clone()).unwrap();
    let grid = TimeGrid::with_default_grade(1.0, 128, 0.6).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..10 {
        let w0 = DVector::from_fn(6, |k, _| z0[k] + 0.005 * (((i * 7 + k * 3) as f64).cos()));
        let o = continuous_dependence_check(&p, &grid, &w0, &[0.0, 0.05, 0.1], 0.5, 1e-12, 200).unwrap();
        worst = worst.max(o.report.max_ratio());
    }

    let lin = EpsRegularClass { delta: 0.5, ..class(0.1, 0.5) };
    let fl = TestNonlinearity {
        kind: NonlinearityKind::Linear { coeffs: vec![0.3; 6] },
        class: lin,
    };
    let pl = MildProblem::new(FracOrder::new(0.6, 0.5).unwrap(), m, fl, TestNonlinearity::zero(class(0.1, 0.6)), z0.clone()).unwrap();
    let mut q = Vec::new();
    for d in [1e-2, 1e-4] {
        let w0 = DVector::from_fn(6, |k, _| z0[k] + d * ((k + 1) as f64).cos());
        let o = continuous_dependence_check(&pl, &grid, &w0, &[0.0], 0.5, 1e-13, 400).unwrap();
        q.push(o.report.samples.iter().map(|s| s.lhs / o.data_distance).collect::<Vec<_>>());
    }
    let spread = q[0].iter().zip(&q[1]).map(|(a, b)| rel(*b, *a)).fold(0.0, f64::max);
    (
        worst <= 1.0 && spread <= 1e-6,
        format!("max ratio to C {worst:.3}, linear ratio spread {spread:.1e}"),
    )
}

fn mesh_consistency() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (alpha, bt) in [(0.4, 0.5), (0.7, 1.0)] {
        let p = kernel_example(alpha, bt, 2);
        let r = TimeGrid::default_grade(alpha);
        let d: Vec<f64> = [512, 1024, 2048]
            .iter()
            .map(|&n| uniqueness_check(&p, (1.0, n), (1.0, 2 * n), r, 1e-12, 200).unwrap().disagreement)
            .collect();
        ok &= d.iter().all(|&x| x <= 5e-3) && d.windows(2).all(|w| w[1] < w[0]);
        parts.push(format!("a={alpha} b={bt}: {:.1e} {:.1e} {:.1e}", d[0], d[1], d[2]));
    }
    (ok, parts.join("; "))
}

fn classical_recovery() -> Outcome {
    let m = laplacian(6);
    let coeffs: Vec<f64> = (0..6).map(|k| 0.5 - 0.2 * k as f64).collect();
    let lin = EpsRegularClass { delta: 0.5, ..class(0.1, 0.5) };
    let f = TestNonlinearity {
        kind: NonlinearityKind::Linear { coeffs: coeffs.clone() },
        class: lin,
    };
    let z0 = DVector::from_fn(6, |i, _| ((i + 1) as f64).sin());
    let p = MildProblem::new(FracOrder::new(1.0, 1.0).unwrap(), m.clone(), f, TestNonlinearity::zero(class(0.1, 0.6)), z0.clone()).unwrap();
    let grid = TimeGrid::new(1.0, 1024, 1.0).unwrap();
    let op = MildOperator::new(&p, &grid).unwrap();
    let s = picard_with(&op, 1e-13, 400).unwrap();
    let got = s.physical_at(&m, grid.points.len() - 1).unwrap();

    // ζ' = (-A + V diag(b) Vᵀ) ζ
    let v = &m.eigenvectors;
    let b = v * DMatrix::from_diagonal(&DVector::from_vec(coeffs)) * v.transpose();
    let want = (-&m.matrix + b).exp() * z0;
    let err = (&got - &want).norm() / want.norm();
    (err <= 1e-6, format!("relative error at u=1 {err:.1e}"))
}

const DETERMINISM_CONFIG: &str = "\
[problem]
alpha = 0.6
beta_t = 0.5
model_n = 4
zeta0 = 0.01
[f]
kind = power
c0 = 0.0005
[g]
kind = memory
c0 = 0.001
q = -0.4
gamma_eps = 0.6
[grid]
n = 64
[solver]
tol = 1e-12
[verify]
checks = lemma2, lemma3, lemma4, lemma5, smoothing, contraction, dependence
seed = 77
dependence_pairs = 2
smoothing_samples = 20
";

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut outs = Vec::new();
    for run in ["a", "b"] {
        let mut cfg = RunConfig::from_str(DETERMINISM_CONFIG, dir.path()).unwrap();
        cfg.out_dir = dir.path().join(run);
        let s = run_verify(&cfg).unwrap();
        outs.push(s.checks.iter().map(|c| c.csv.clone()).collect::<Vec<_>>());
    }
    let mut same = outs[0].len() == outs[1].len() && !outs[0].is_empty();
    for (a, b) in outs[0].iter().zip(&outs[1]) {
        same &= std::fs::read(a).unwrap() == std::fs::read(b).unwrap();
    }
    (same, format!("{} CSV files compared", outs[0].len()))
}

fn main() {
    let criteria: [(&str, f64, fn() -> Outcome); 12] = [
        ("Mittag-Leffler accuracy", 2.0, mittag_leffler),
        ("fractional-operator identities", 5.0, fractional_operators),
        ("contour vs spectral operator families", 10.0, operator_routes),
        ("Gronwall saturation", 5.0, gronwall_saturation),
        ("closed-form kernel example", 30.0, example_closed_form),
        ("contraction", 30.0, contraction),
        ("growth and Lipschitz margin suites", 60.0, lemma_suites),
        ("smoothing bounds", 10.0, smoothing),
        ("continuous dependence", 30.0, continuous_dependence),
        ("mesh consistency", 30.0, mesh_consistency),
        ("classical recovery", 5.0, classical_recovery),
        ("determinism", f64::INFINITY, determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let id = i + 1;
        if !filter.is_empty() && !filter.iter().any(|f| f == &id.to_string()) {
            continue;
        }
        let t = Instant::now();
        let (ok, detail) = run();
        let secs = t.elapsed().as_secs_f64();
        let pass = ok && secs < *budget;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {id:>2} [{}] {name}: {detail} ({secs:.2}s, budget {budget}s)",
            if pass { "PASS" } else { "FAIL" }
        );
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
