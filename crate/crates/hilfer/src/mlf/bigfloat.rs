//! Multiprecision power series for arguments where doubles cancel.

use crate::error::{Error, Result};
use rug::Float;

/// α = p/q with small q, if α is (to rounding) such a fraction.
fn rational(alpha: f64) -> Option<(u32, u32)> {
    for q in 1..=1000u32 {
        let p = (alpha * q as f64).round();
        if p >= 1.0 && (alpha - p / q as f64).abs() <= 4.0 * f64::EPSILON * alpha {
            return Some((p as u32, q));
        }
    }
    None
}

/// Sum Σ z^k/Γ(αk+β) at working precision chosen from the largest term.
///
/// `max_log` is ln of the largest term magnitude, `peak` its index.
pub(super) fn series(
    alpha: f64,
    beta: f64,
    z: f64,
    tol: f64,
    cap: usize,
    max_log: f64,
    peak: f64,
) -> Result<f64> {
    let top_bits = (max_log / std::f64::consts::LN_2).max(0.0).ceil() as u32;
    let mut extra = 64u32;
    for _ in 0..4 {
        let prec = 64 + top_bits + extra;
        let rat = rational(alpha).filter(|&(p, _)| p <= 64);
        let s = sum_at(alpha, beta, z, tol, cap, peak, prec, rat)?;
        if s == 0.0 {
            return Ok(0.0);
        }
        // roundoff ≈ cap · 2^{top - prec} against the result
        let lost = (cap as f64).log2() + top_bits as f64 - prec as f64;
        if lost < (tol * 1e-2 * s.abs()).log2() {
            return Ok(s);
        }
        let need = ((tol * 1e-2 * s.abs()).log2() - lost).abs().ceil() as u32;
        extra += need + 32;
    }
    Err(Error::Divergence(format!(
        "series at z = {z} lost all digits to cancellation"
    )))
}

#[allow(clippy::too_many_arguments)]
fn sum_at(
    alpha: f64,
    beta: f64,
    z: f64,
    tol: f64,
    cap: usize,
    peak: f64,
    prec: u32,
    rat: Option<(u32, u32)>,
) -> Result<f64> {
    let zf = Float::with_val(prec, z);
    let bf = Float::with_val(prec, beta);
    let mut zpow = Float::with_val(prec, 1);
    let mut sum = Float::with_val(prec, 0);
    let stop = Float::with_val(prec, tol * 1e-3);
    // Γ(x_k) for the last q indices, x_k = β + pk/q
    let mut ring: Vec<Float> = Vec::new();
    let xk = |k: usize| -> Float {
        match rat {
            Some((p, q)) => Float::with_val(prec, p as u64 * k as u64) / q + &bf,
            None => Float::with_val(prec, alpha) * k as u64 + &bf,
        }
    };
    for k in 0..cap {
        let x = xk(k);
        let g = match rat {
            Some((p, q)) => {
                let q = q as usize;
                if k < q {
                    let g = x.clone().gamma();
                    ring.push(g.clone());
                    g
                } else {
                    // Γ(x + p) from Γ(x) with x = x_{k-q}
                    let mut g = ring[k % q].clone();
                    let base = x.clone() - p;
                    for i in 0..p {
                        g *= Float::with_val(prec, &base + i);
                    }
                    ring[k % q] = g.clone();
                    g
                }
            }
            None => x.gamma(),
        };
        let term = Float::with_val(prec, &zpow / &g);
        sum += &term;
        zpow *= &zf;
        if (k as f64) > peak + 1.0 {
            let lhs = term.abs();
            let rhs = Float::with_val(prec, sum.abs_ref()) * &stop;
            if lhs <= rhs || lhs.is_zero() {
                return Ok(sum.to_f64());
            }
        }
    }
    Err(Error::Divergence(format!(
        "{cap} multiprecision terms at z = {z} without reaching tol {tol}"
    )))
}
