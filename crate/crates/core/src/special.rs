//! Scalar special functions used by expressions and the BC_n prepotential.

use crate::error::{Error, Result};

/// Poles of coth closer to zero than this are domain errors.
pub const COTH_POLE: f64 = 1e-12;

/// `coth(z) = 1 + 2/(e^{2z} - 1)` for `z > 0`, extended as an odd function.
/// Returns `None` within [`COTH_POLE`] of zero.
pub fn coth(z: f64) -> Option<f64> {
    if !(z.abs() >= COTH_POLE) {
        return None;
    }
    let v = 1.0 + 2.0 / (2.0 * z.abs()).exp_m1();
    Some(if z < 0.0 { -v } else { v })
}

/// Trilogarithm `Σ_{k≥1} w^k / k^3` for `0 < w < 1`.
pub fn li3(w: f64) -> Result<f64> {
    if !(w > 0.0 && w < 1.0) {
        return Err(Error::Domain { expr: format!("li3({w:?})"), reason: "argument must lie in (0, 1)".into() });
    }
    let mut sum = 0.0;
    let mut power = 1.0;
    let mut k = 1u64;
    loop {
        power *= w;
        let kf = k as f64;
        let term = power / (kf * kf * kf);
        sum += term;
        if term < 1e-16 * sum {
            return Ok(sum);
        }
        k += 1;
    }
}

/// `f(z) = z^3/6 - Li3(e^{-2z})/4` for `z > 0`; its third derivative is `coth z`.
pub fn bcn_kernel(z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::Domain { expr: format!("f({z:?})"), reason: "series form needs a positive argument".into() });
    }
    Ok(z * z * z / 6.0 - 0.25 * li3((-2.0 * z).exp())?)
}
