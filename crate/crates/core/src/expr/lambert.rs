//! Principal branch `W0` of the Lambert W function.

use std::f64::consts::E;

use crate::error::DomainError;

/// Branch point `-1/e`.
pub const BRANCH_POINT: f64 = -1.0 / E;

const REL_TOL: f64 = 1e-14;
const MAX_ITER: usize = 64;

fn initial_guess(z: f64) -> f64 {
    if z < -0.25 {
        // series around the branch point in p = sqrt(2(ez + 1))
        let p = (2.0 * (E * z + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if z < 3.0 {
        let l = z.ln_1p();
        l * (1.0 - l.ln_1p() / (2.0 + l))
    } else {
        let l1 = z.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    }
}

/// Solve `w e^w = z` for `w >= -1` by Halley iteration.
///
/// Defined for `z >= -1/e`; arguments below the branch point are a
/// [`DomainError`]. Iterates until the Halley correction drops below a
/// relative `1e-14`.
pub fn lambert_w0(z: f64) -> Result<f64, DomainError> {
    if z.is_nan() || z.is_infinite() {
        return Err(DomainError::new("lambert_w of a non-finite argument"));
    }
    if z < BRANCH_POINT {
        // values a rounding step below -1/e still denote the branch point
        if z >= BRANCH_POINT - 4.0 * f64::EPSILON {
            return Ok(-1.0);
        }
        return Err(DomainError::new("lambert_w argument below -1/e"));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    if z == BRANCH_POINT {
        return Ok(-1.0);
    }

    let mut w = initial_guess(z);
    for _ in 0..MAX_ITER {
        let ew = w.exp();
        let f = w * ew - z;
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            break;
        }
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        if denom == 0.0 || !denom.is_finite() {
            break;
        }
        let dw = f / denom;
        w -= dw;
        if dw.abs() <= REL_TOL * w.abs() || dw == 0.0 {
            break;
        }
    }
    Ok(w)
}
