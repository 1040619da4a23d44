//! Picard solve of a memory-driven problem with a known mode-wise solution
//! and comparison against that solution.
//!
//! ```text
//! cargo run --example solve_kernel_problem
//! ```

use hilfer::config::RunConfig;
use hilfer::mlf::{ml_global, MlfParams};
use hilfer::solver::{picard_with, MildOperator};
use std::path::Path;

fn main() -> hilfer::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let cfg = RunConfig::from_file(&dir.join("kernel_example.ini"))?;
    let p = &cfg.problem;
    let grid = cfg.time_grid()?;
    let op = MildOperator::new(p, &grid)?;
    let sol = picard_with(&op, cfg.solver.tol, cfg.solver.max_iter)?;
    println!("{} Picard iterations on {} points", sol.iterations.len(), grid.points.len());
    for r in &sol.iterations {
        println!("  iter {:>2}  residual {:.3e}", r.iter, r.residual);
    }

    // u^{γ-1} E_{α,γ}(-λu^α) ζ0 + u^{2α} E_{α,2α+1}(-λu^α)
    let alpha = p.ord.alpha;
    let e1 = MlfParams::new(alpha, p.ord.gamma)?;
    let e2 = MlfParams::new(alpha, 2.0 * alpha + 1.0)?;
    let z0 = p.zeta0_modal();
    let last = grid.points.len() - 1;
    let u = grid.points[last];
    println!("\nmode  computed          closed form");
    for (k, &l) in p.model.eigenvalues.iter().enumerate().take(4) {
        let x = -l * u.powf(alpha);
        let want = u.powf(p.ord.gamma - 1.0) * ml_global(&e1, x)? * z0[k] + u.powf(2.0 * alpha) * ml_global(&e2, x)?;
        println!("{k:>4}  {:<16.10} {want:.10}", sol.values.row(last)[k]);
    }
    Ok(())
}
