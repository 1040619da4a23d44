//! Solution-operator families of a discretized Laplacian: the resolvent
//! contour integral against the eigen-decomposition.
//!
//! ```text
//! cargo run --example operator_families
//! ```

use hilfer::operator::{estimate_theta_constant, hankel_contour_operator, log_grid, ml_operator, Family, SectorialModel};
use nalgebra::DVector;

fn main() -> hilfer::Result<()> {
    let model = SectorialModel::build_dirichlet_laplacian(12, std::f64::consts::PI, 1.0)?;
    println!("12-point Dirichlet Laplacian, spectrum [{:.4}, {:.2}]", model.lambda_min(), model.lambda_max());
    let x = DVector::from_fn(12, |i, _| 1.0 / (1.0 + i as f64));

    println!("\n{:>6} {:>6} {:>14} {:>14}", "alpha", "u", "E_a rel.diff", "E_a,a rel.diff");
    for alpha in [0.4, 0.8] {
        for u in [0.05, 0.5, 5.0] {
            let mut d = [0.0; 2];
            for (k, (fam, b)) in [(Family::First, 1.0), (Family::Second, alpha)].into_iter().enumerate() {
                let c = hankel_contour_operator(alpha, u, &model, &x, fam)?;
                let s = ml_operator(alpha, b, 0.0, u, &model, &x)?;
                d[k] = (c - &s).norm() / s.norm();
            }
            println!("{alpha:>6} {u:>6} {:>14.2e} {:>14.2e}", d[0], d[1]);
        }
    }

    let us = log_grid(1e-3, 1.0, 20);
    println!();
    for bt in [0.0, 0.5, 1.0] {
        println!("smoothing constant, alpha 0.5, beta~ {bt}: {:.6}", estimate_theta_constant(&model, 0.5, bt, &us)?);
    }
    Ok(())
}
