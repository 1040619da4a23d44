//! ψ-Riemann-Liouville integrals and ψ-Hilfer derivatives on graded meshes.
//!
//! ```text
//! cargo run --example fractional_calculus
//! ```

use hilfer::frac_ops::{graded_mesh, hilfer_derivative, psi_frac_integral, FracOrder, PsiFunction, Sampled};
use hilfer::special::gamma;

fn main() -> hilfer::Result<()> {
    let mesh = graded_mesh(1.0, 1024, 1.0);
    let f = Sampled::from_fn(&mesh, |s| s * s)?;

    println!("I^a s^2 at u = 1 against Γ(3)/Γ(3+a)");
    for a in [0.25, 0.5, 0.75] {
        let v = psi_frac_integral(a, &PsiFunction::identity(), &f, 1.0)?;
        println!("  a = {a:<5} {v:.10}  {:.10}", gamma(3.0) / gamma(3.0 + a));
    }

    // with ψ(u) = u^2 the integral of ψ(s)^m has the same closed form in ψ(u)
    let sq = PsiFunction::square();
    let g = Sampled::from_fn(&mesh, |s| s.powi(4))?;
    let v = psi_frac_integral(0.5, &sq, &g, 0.8)?;
    let want = gamma(3.0) / gamma(3.5) * 0.64f64.powf(2.5);
    println!("\nψ = u^2: I^0.5 ψ^2 at 0.8 = {v:.10}  closed form {want:.10}");

    println!("\nHilfer derivative of 1 + u at u = 0.5, order 0.6");
    let mesh = graded_mesh(1.0, 1024, 2.0);
    let h = Sampled::from_fn(&mesh, |u| 1.0 + u)?;
    let u = mesh[mesh.iter().position(|&m| m >= 0.5).unwrap()];
    for bt in [0.0, 0.5, 1.0] {
        let ord = FracOrder::new(0.6, bt)?;
        println!("  type {bt:<4} gamma = {:.2}  value {:.8}", ord.gamma, hilfer_derivative(&ord, &PsiFunction::identity(), &h, u)?);
    }
    println!("  Caputo closed form {:.8}", u.powf(0.4) / gamma(1.4));
    println!("  Riemann-Liouville  {:.8}", u.powf(0.4) / gamma(1.4) + u.powf(-0.6) / gamma(0.4));
    Ok(())
}
