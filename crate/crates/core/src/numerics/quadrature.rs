use crate::error::{DomainError, Error, Result};

/// Default absolute tolerance for [`adaptive_simpson`].
pub const QUAD_TOL: f64 = 1e-10;

const MAX_DEPTH: u32 = 48;

/// `int_a^b f` by adaptive Simpson. Reversed limits give the negated
/// integral. A domain error anywhere on the path is reported as
/// [`Error::PathCrossesSingularity`].
pub fn adaptive_simpson(f: impl Fn(f64) -> Result<f64, DomainError>, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidArgument("integration limits must be finite".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    if a == b {
        return Ok(0.0);
    }
    let run = || -> Result<f64, DomainError> {
        let (fa, fb) = (f(a)?, f(b)?);
        let m = 0.5 * (a + b);
        let fm = f(m)?;
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        refine(&f, a, b, fa, fm, fb, whole, tol, 0)
    };
    run().map_err(Error::PathCrossesSingularity)
}

#[allow(clippy::too_many_arguments)]
fn refine(
    f: &impl Fn(f64) -> Result<f64, DomainError>,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64, DomainError> {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm)?, f(rm)?);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth >= MAX_DEPTH || delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    Ok(refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)? + refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)?)
}
