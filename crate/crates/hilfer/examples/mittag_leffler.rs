//! Two-parameter Mittag-Leffler values on the negative axis.
//!
//! ```text
//! cargo run --example mittag_leffler
//! ```

use hilfer::mlf::{ml_contour, ml_eval, ml_series, MlfParams};

fn main() -> hilfer::Result<()> {
    // E_1(1) = e and E_{1/2}(-1) = e erfc(1)
    let e = ml_series(&MlfParams::new(1.0, 1.0)?, 1.0)?;
    println!("E_1(1)      = {e:.15}  (e = {:.15})", std::f64::consts::E);
    let h = ml_eval(&MlfParams::new(0.5, 1.0)?, -1.0)?;
    println!("E_1/2(-1)   = {h:.15}  (e erfc 1 = {:.15})", std::f64::consts::E * libm::erfc(1.0));

    println!("\n{:>8} {:>20} {:>20} {:>20}", "x", "E_.6,1", "E_.6,.6", "contour E_.6,1");
    let p1 = MlfParams::new(0.6, 1.0)?;
    let p2 = MlfParams::new(0.6, 0.6)?;
    for x in [-0.1, -1.0, -5.0, -20.0, -100.0] {
        println!("{x:>8} {:>20.12e} {:>20.12e} {:>20.12e}", ml_eval(&p1, x)?, ml_eval(&p2, x)?, ml_contour(&p1, x)?);
    }
    Ok(())
}
