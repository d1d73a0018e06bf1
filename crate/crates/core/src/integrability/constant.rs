use std::f64::consts::PI;

use super::catalog::snap_rational;
use super::field::{first_integral_from_mu, FirstIntegral};
use super::report::{Branch, IntegrationMethod, IntegrationReport};
use super::{closedness_residual, op_s, Tolerances};
use crate::error::{Error, Result};
use crate::expr::{is_numerically_zero, simplify, sweep, Expr};
use crate::surface::{build_surface, classify_curvature, Deformation, OdeProblem};

fn scaled_x(c: f64) -> Expr {
    if c == 1.0 {
        Expr::x()
    } else {
        c * Expr::x()
    }
}

/// A nonzero solution of `delta'' + k delta = 0`: `sin(sqrt(k) x)` for
/// `k > 0`, `1` for `k = 0`, `sinh(sqrt(-k) x)` for `k < 0`.
pub fn delta_for_constant_k(k: f64) -> Expr {
    if k > 0.0 {
        scaled_x(k.sqrt()).sin()
    } else if k < 0.0 {
        scaled_x((-k).sqrt()).sinh()
    } else {
        Expr::one()
    }
}

/// A zero of [`delta_for_constant_k`] in `[x_min, x_max]`, if any.
pub fn delta_zero_in(k: f64, x_min: f64, x_max: f64) -> Option<f64> {
    if k > 0.0 {
        let period = PI / k.sqrt();
        let n = (x_min / period).ceil();
        let z = n * period;
        (z <= x_max).then_some(z)
    } else if k < 0.0 {
        (x_min <= 0.0 && 0.0 <= x_max).then_some(0.0)
    } else {
        None
    }
}

/// Integrating factor from a deformation with constant curvature `k`.
///
/// With `delta` from [`delta_for_constant_k`] and `s = S_eps(delta)`:
/// if `s == 0` on the region then `mu = e^eps / delta`, else
/// `mu = e^eps s`. Either way the closedness residual of `mu` is checked
/// and a first integral is built by quadrature from the region center.
pub fn constant_curvature_integrating_factor(
    p: &OdeProblem,
    d: &Deformation,
    tol: &Tolerances,
) -> Result<IntegrationReport> {
    let r = p.region;
    let surface = build_surface(p, d)?;
    let class = classify_curvature(&surface, tol.zero)?;
    let Some(k) = class.class.constant() else {
        let ev = &class.evidence;
        return Err(Error::NotConstantCurvature {
            min: ev.min,
            max: ev.max,
            mean: ev.mean,
        });
    };
    let k = snap_rational(k, tol.zero);
    let (phi, eps) = (&surface.phi, &surface.epsilon);

    let delta = delta_for_constant_k(k);
    let s = op_s(phi, eps, &delta);
    let vanishes = is_numerically_zero(&s, &r, tol.s_zero)?.is_zero;
    let (branch, mu) = if vanishes {
        if delta_zero_in(k, r.x_min, r.x_max).is_some() {
            return Err(Error::DeltaVanishesOnRegion {
                delta: delta.to_string(),
            });
        }
        (Branch::SVanishes, simplify(&(eps.exp() / &delta)))
    } else {
        (Branch::SNonvanishing, simplify(&(eps.exp() * &s)))
    };

    let mu_max = sweep(&mu, &r)?.max_abs;
    let residual = sweep(&closedness_residual(phi, &mu), &r)?.max_abs;
    let limit = tol.residual_rel * (1.0 + mu_max);
    if residual > limit {
        return Err(Error::ResidualCheckFailed {
            what: format!("closedness of mu = {mu}"),
            residual,
            limit,
        });
    }

    let basepoint = r.center();
    let (field, drift) = first_integral_from_mu(p, &mu, basepoint, tol)?;
    Ok(IntegrationReport {
        method: IntegrationMethod::ConstantCurvatureDeformation,
        branch: Some(branch),
        phi: phi.clone(),
        epsilon: eps.clone(),
        region: r,
        mu: Some(mu),
        first_integral: FirstIntegral::Numeric(field),
        psi: None,
        catalog_family: None,
        residual_first_integral: drift.max_drift,
        drift: Some(drift),
        delta_used: Some(delta),
        k: Some(k),
        basepoint: Some(basepoint),
        degenerate_fallback: false,
    })
}
