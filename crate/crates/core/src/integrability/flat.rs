use super::catalog::antiderivative;
use super::field::{drift_along_trajectories, FirstIntegral, NumericField, NUMERIC_STRIDE};
use super::report::{IntegrationMethod, IntegrationReport};
use super::Tolerances;
use crate::error::{Error, Result};
use crate::expr::{diff, is_numerically_zero, simplify, sweep, Expr, Var};
use crate::surface::{apply_a, build_surface, classify_curvature, CurvatureClass, Deformation, OdeProblem};

/// Largest relative drift accepted for a first integral along trajectories.
pub(crate) const DRIFT_LIMIT: f64 = 1e-6;

/// First integral of a flat equation: `F = phi - Psi` with `Psi' = A(phi)`.
///
/// `Psi` comes from the antiderivative catalog when `A(phi)` matches one of
/// its shapes and from quadrature otherwise. When `phi` does not depend on
/// `u` the construction collapses to `F = 0`, so `F = u - int phi dx` is
/// used instead.
pub fn flat_first_integral(p: &OdeProblem, tol: &Tolerances) -> Result<IntegrationReport> {
    let phi = simplify(&p.phi);
    let r = p.region;
    let surface = build_surface(p, &Deformation::default())?;
    let class = classify_curvature(&surface, tol.zero)?;
    if class.class != CurvatureClass::Zero {
        let ev = &class.evidence;
        return Err(Error::NotFlat(format!(
            "K = {} ranges over [{}, {}] on the region",
            surface.curvature, ev.min, ev.max
        )));
    }

    let a_phi = apply_a(&phi, &phi);
    let scale = sweep(&a_phi, &r)?.max_abs;
    let drift_u = is_numerically_zero(&diff(&a_phi, Var::U), &r, tol.zero * (1.0 + scale))?;
    if !drift_u.is_zero {
        return Err(Error::NotFlat(format!("A(phi) = {a_phi} depends on u")));
    }

    let (x0, u_ref) = r.center();
    let degenerate = is_numerically_zero(&diff(&phi, Var::U), &r, tol.zero)?.is_zero;
    let integrand = if degenerate { &phi } else { &a_phi };
    let found = antiderivative(integrand, &r, u_ref, tol.catalog);

    let first_integral = match (&found, degenerate) {
        (Some(m), true) => FirstIntegral::Symbolic(simplify(&(Expr::u() - &m.antiderivative))),
        (Some(m), false) => FirstIntegral::Symbolic(simplify(&(&phi - &m.antiderivative))),
        (None, true) => FirstIntegral::Numeric(NumericField::FlatDegenerate {
            phi: phi.clone(),
            x0,
            u_ref,
            tol: tol.quad,
        }),
        (None, false) => FirstIntegral::Numeric(NumericField::FlatPotential {
            phi: phi.clone(),
            a_phi: a_phi.clone(),
            x0,
            u_ref,
            tol: tol.quad,
        }),
    };

    let stride = if found.is_some() { 1 } else { NUMERIC_STRIDE };
    let drift = drift_along_trajectories(p, |x, u| first_integral.eval(x, u), stride)?;
    let residual = match &first_integral {
        FirstIntegral::Symbolic(f) => {
            let res = sweep(&apply_a(&phi, f), &r)?.max_abs;
            let limit = tol.residual_rel * (1.0 + sweep(f, &r)?.max_abs);
            if res > limit {
                return Err(Error::ResidualCheckFailed {
                    what: format!("A(F) for F = {f}"),
                    residual: res,
                    limit,
                });
            }
            res
        }
        FirstIntegral::Numeric(_) => {
            if drift.max_relative > DRIFT_LIMIT {
                return Err(Error::ResidualCheckFailed {
                    what: "first integral drift along trajectories".into(),
                    residual: drift.max_relative,
                    limit: DRIFT_LIMIT,
                });
            }
            drift.max_drift
        }
    };

    Ok(IntegrationReport {
        method: IntegrationMethod::FlatDirect,
        branch: None,
        phi,
        epsilon: Expr::zero(),
        region: r,
        mu: None,
        first_integral,
        psi: found.as_ref().map(|m| m.antiderivative.clone()),
        catalog_family: found.as_ref().map(|m| m.family),
        residual_first_integral: residual,
        drift: Some(drift),
        delta_used: None,
        k: Some(0.0),
        basepoint: Some((x0, u_ref)),
        degenerate_fallback: degenerate,
    })
}
