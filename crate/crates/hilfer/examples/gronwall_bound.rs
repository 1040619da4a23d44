//! The fractional Gronwall bound is attained by the Volterra equality
//! z = 1 + I^a z, whose solution is E_a(u^a).
//!
//! ```text
//! cargo run --example gronwall_bound
//! ```

use hilfer::frac_ops::{graded_mesh, PsiFunction};
use hilfer::gronwall::{gronwall_verify, volterra_equality_on, GronwallInstance};

fn main() -> hilfer::Result<()> {
    let alpha = 0.5;
    let z = volterra_equality_on(alpha, 1.0, graded_mesh(2.0, 512, 2.0))?;
    let inst = GronwallInstance::constant(alpha, PsiFunction::identity(), &z.mesh, 1.0, 1.0)?;
    let rep = gronwall_verify(&inst, &z)?;

    println!("{:>8} {:>14} {:>14} {:>14}", "u", "z(u)", "series bound", "E_a bound");
    for p in rep.points.iter().step_by(64) {
        let ml = p.ml_bound.map_or("-".to_string(), |v| format!("{v:.8}"));
        println!("{:>8.4} {:>14.8} {:>14.8} {:>14}", p.u, p.zeta, p.series_bound, ml);
    }
    println!("\nworst margin {:.2e}", rep.worst_margin);
    Ok(())
}
