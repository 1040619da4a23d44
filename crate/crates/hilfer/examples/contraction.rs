//! Smallness condition and contraction of the mild-solution map on a ball.
//!
//! ```text
//! cargo run --example contraction
//! ```

use hilfer::frac_ops::FracOrder;
use hilfer::nonlinearity::{EpsRegularClass, TestNonlinearity};
use hilfer::operator::SectorialModel;
use hilfer::solver::{MildOperator, MildProblem, TimeGrid};
use hilfer::verify::{contraction_check, TheoremConstants};
use nalgebra::DVector;

fn class(gamma_eps: f64) -> EpsRegularClass {
    EpsRegularClass {
        eps: 0.1,
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

fn main() -> hilfer::Result<()> {
    let model = SectorialModel::build_dirichlet_laplacian(6, std::f64::consts::PI, 1.0)?;
    let grid = TimeGrid::with_default_grade(1.0, 128, 0.6)?;
    for c0 in [5e-4, 5e-3] {
        let f = TestNonlinearity::power(c0, class(0.5))?;
        let g = TestNonlinearity::power(c0, class(0.6))?;
        let p = MildProblem::new(FracOrder::new(0.6, 0.5)?, model.clone(), f, g, DVector::from_element(6, 0.01))?;
        let op = MildOperator::new(&p, &grid)?;
        let k = TheoremConstants::new(&op)?;
        println!("c0 = {c0}: Theta = {:.3}, B~ = {:.3}", k.theta, k.b_tilde);
        for mu in [0.5, 0.125] {
            let small = k.smallness(&op, mu)?;
            let r = contraction_check(&op, mu, 10, 7)?;
            println!("  mu = {mu:<6} smallness {small:<5} worst ratio {:.3e}", r.max_ratio());
        }
    }
    Ok(())
}
