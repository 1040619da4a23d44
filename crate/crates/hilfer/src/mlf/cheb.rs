//! Piecewise Chebyshev tables for x ↦ E_{α,β}(-x) on [0, x_max].

use super::{ml_global, MlfParams};
use crate::error::{domain, Result};

const NODES: usize = 28;

#[derive(Clone, Debug)]
struct Piece {
    lo: f64,
    hi: f64,
    coeffs: Vec<f64>,
}

/// Fast evaluator of E_{α,β}(-x), x ≥ 0. Pieces are [0,1], [1,2], [2,4], ...
/// up to `x_max`; larger arguments fall back to `ml_global`.
#[derive(Clone, Debug)]
pub struct MlTable {
    params: MlfParams,
    x_max: f64,
    pieces: Vec<Piece>,
}

impl MlTable {
    pub fn new(params: MlfParams, x_max: f64) -> Result<Self> {
        params.validate()?;
        if !(x_max >= 0.0 && x_max.is_finite()) {
            return domain("table range must be finite and non-negative");
        }
        let mut pieces = Vec::new();
        let mut lo = 0.0;
        let mut hi = 1.0;
        loop {
            pieces.push(Piece::fit(&params, lo, hi)?);
            if hi >= x_max {
                break;
            }
            lo = hi;
            hi *= 2.0;
        }
        Ok(MlTable {
            params,
            x_max: hi,
            pieces,
        })
    }

    pub fn params(&self) -> &MlfParams {
        &self.params
    }

    /// Upper end of the tabulated range.
    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    /// E_{α,β}(-x).
    pub fn eval(&self, x: f64) -> f64 {
        if x <= 1.0 {
            return self.pieces[0].eval(x.max(0.0));
        }
        if x > self.x_max {
            return ml_global(&self.params, -x).unwrap_or(f64::NAN);
        }
        let i = (x.log2().floor() as usize + 1).min(self.pieces.len() - 1);
        self.pieces[i].eval(x)
    }
}

impl Piece {
    fn fit(p: &MlfParams, lo: f64, hi: f64) -> Result<Self> {
        let n = NODES;
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let mut f = Vec::with_capacity(n);
        for j in 0..n {
            let t = (std::f64::consts::PI * (j as f64 + 0.5) / n as f64).cos();
            f.push(ml_global(p, -(mid + half * t))?);
        }
        let mut coeffs = vec![0.0; n];
        for (k, c) in coeffs.iter_mut().enumerate() {
            let mut s = 0.0;
            for (j, fj) in f.iter().enumerate() {
                s += fj * (std::f64::consts::PI * k as f64 * (j as f64 + 0.5) / n as f64).cos();
            }
            *c = 2.0 * s / n as f64;
        }
        coeffs[0] *= 0.5;
        Ok(Piece { lo, hi, coeffs })
    }

    fn eval(&self, x: f64) -> f64 {
        let t = (2.0 * x - self.lo - self.hi) / (self.hi - self.lo);
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * t * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        t * b1 - b2 + self.coeffs[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_matches_direct_evaluation() {
        for &(a, b) in &[(0.4, 1.4), (0.7, 2.4), (0.5, 1.0), (0.9, 1.9)] {
            let p = MlfParams::new(a, b).unwrap();
            let t = MlTable::new(p, 500.0).unwrap();
            for i in 0..400 {
                let x = 700.0 * (i as f64 / 400.0).powi(3);
                let want = ml_global(&p, -x).unwrap();
                let got = t.eval(x);
                assert!((got - want).abs() <= 1e-12 * want.abs().max(1e-3), "a={a} b={b} x={x}");
            }
        }
    }
}
