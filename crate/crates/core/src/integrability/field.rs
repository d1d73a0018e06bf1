use serde_json::{json, Value};

use super::report::{IntegrationMethod, IntegrationReport};
use super::{closedness_residual, Tolerances};
use crate::error::{Error, Result};
use crate::expr::{simplify, sweep, Expr};
use crate::json;
use crate::numerics::{adaptive_simpson, solve_ode};
use crate::surface::OdeProblem;

/// First integral evaluated by quadrature.
#[derive(Debug, Clone, PartialEq)]
pub enum NumericField {
    /// `F = phi - int_{x0}^x A(phi)(s, u_ref) ds`
    FlatPotential {
        phi: Expr,
        a_phi: Expr,
        x0: f64,
        u_ref: f64,
        tol: f64,
    },
    /// `F = u - int_{x0}^x phi(s, u_ref) ds` for `u`-independent `phi`
    FlatDegenerate { phi: Expr, x0: f64, u_ref: f64, tol: f64 },
    /// `F = int_{u0}^u mu(x0, t) dt - int_{x0}^x (mu phi)(s, u) ds`
    LineIntegral {
        mu: Expr,
        mu_phi: Expr,
        x0: f64,
        u0: f64,
        tol: f64,
    },
}

impl NumericField {
    pub fn eval(&self, x: f64, u: f64) -> Result<f64> {
        match self {
            NumericField::FlatPotential {
                phi,
                a_phi,
                x0,
                u_ref,
                tol,
            } => {
                let psi = adaptive_simpson(|s| a_phi.eval(s, *u_ref), *x0, x, *tol)?;
                Ok(phi.eval(x, u)? - psi)
            }
            NumericField::FlatDegenerate { phi, x0, u_ref, tol } => {
                Ok(u - adaptive_simpson(|s| phi.eval(s, *u_ref), *x0, x, *tol)?)
            }
            NumericField::LineIntegral {
                mu,
                mu_phi,
                x0,
                u0,
                tol,
            } => {
                let up = adaptive_simpson(|t| mu.eval(*x0, t), *u0, u, *tol)?;
                let across = adaptive_simpson(|s| mu_phi.eval(s, u), *x0, x, *tol)?;
                Ok(up - across)
            }
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            NumericField::FlatPotential { .. } => "flat_potential",
            NumericField::FlatDegenerate { .. } => "flat_degenerate",
            NumericField::LineIntegral { .. } => "line_integral",
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            NumericField::FlatPotential { phi, a_phi, x0, u_ref, tol } => json!({
                "kind": self.kind(),
                "phi": phi.to_string(),
                "integrand": a_phi.to_string(),
                "x0": json::num(*x0),
                "u_ref": json::num(*u_ref),
                "tol": json::num(*tol),
            }),
            NumericField::FlatDegenerate { phi, x0, u_ref, tol } => json!({
                "kind": self.kind(),
                "integrand": phi.to_string(),
                "x0": json::num(*x0),
                "u_ref": json::num(*u_ref),
                "tol": json::num(*tol),
            }),
            NumericField::LineIntegral { mu, x0, u0, tol, .. } => json!({
                "kind": self.kind(),
                "mu": mu.to_string(),
                "basepoint": json::point(Some((*x0, *u0))),
                "tol": json::num(*tol),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FirstIntegral {
    Symbolic(Expr),
    Numeric(NumericField),
}

impl FirstIntegral {
    pub fn eval(&self, x: f64, u: f64) -> Result<f64> {
        match self {
            FirstIntegral::Symbolic(e) => Ok(e.eval(x, u)?),
            FirstIntegral::Numeric(f) => f.eval(x, u),
        }
    }

    pub fn as_expr(&self) -> Option<&Expr> {
        match self {
            FirstIntegral::Symbolic(e) => Some(e),
            FirstIntegral::Numeric(_) => None,
        }
    }

    /// Printed form, `"numeric"` for quadrature fields.
    pub fn describe(&self) -> String {
        match self {
            FirstIntegral::Symbolic(e) => e.to_string(),
            FirstIntegral::Numeric(_) => "numeric".to_string(),
        }
    }
}

/// Variation of a first integral along RK4 solution curves.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftReport {
    /// `max |F(x, u(x)) - F(x0, u0)|`
    pub max_drift: f64,
    /// same, divided by `1 + |F(x0, u0)|` of the worst trajectory
    pub max_relative: f64,
    pub worst_start: Option<(f64, f64)>,
    pub trajectories: usize,
    pub samples: usize,
}

impl DriftReport {
    pub fn to_json(&self) -> Value {
        json!({
            "max_drift": json::num(self.max_drift),
            "max_relative": json::num(self.max_relative),
            "worst_start": json::point(self.worst_start),
            "trajectories": self.trajectories,
            "samples": self.samples,
        })
    }
}

const DRIFT_STARTS: [f64; 5] = [0.2, 0.35, 0.5, 0.65, 0.8];

/// Drift of `f` along five RK4 trajectories started at `x = x_min + w/10`
/// and spread over the region's height, with step `w/1000`.
///
/// Only samples inside the region count; every `stride`-th sample is
/// checked. Trajectories that leave the domain contribute their partial
/// samples.
pub fn drift_along_trajectories(
    p: &OdeProblem,
    f: impl Fn(f64, f64) -> Result<f64>,
    stride: usize,
) -> Result<DriftReport> {
    let r = p.region;
    let step = r.width() / 1000.0;
    let x0 = r.x_min + 0.1 * r.width();
    let mut report = DriftReport {
        max_drift: 0.0,
        max_relative: 0.0,
        worst_start: None,
        trajectories: 0,
        samples: 0,
    };
    for t in DRIFT_STARTS {
        let u0 = r.u_min + t * r.height();
        let Ok(f0) = f(x0, u0) else { continue };
        let traj = match solve_ode(p, x0, u0, r.x_max, step) {
            Ok(traj) => traj,
            Err(Error::LeftDomain { partial, .. }) => *partial,
            Err(_) => continue,
        };
        report.trajectories += 1;
        let inside = traj.samples.iter().filter(|s| r.contains(s.x, s.u));
        for s in inside.step_by(stride.max(1)) {
            let drift = (f(s.x, s.u)? - f0).abs();
            report.samples += 1;
            if drift > report.max_drift {
                report.max_drift = drift;
                report.worst_start = Some((x0, u0));
            }
            report.max_relative = report.max_relative.max(drift / (1.0 + f0.abs()));
        }
    }
    if report.trajectories == 0 {
        return Err(Error::RegionUnusable {
            what: "first integral drift trajectories".into(),
            evaluable: 0,
            total: DRIFT_STARTS.len(),
        });
    }
    Ok(report)
}

/// Stride used when the first integral is a quadrature field.
pub(crate) const NUMERIC_STRIDE: usize = 20;

/// Check that `mu` is a nonzero integrating factor on the region and
/// return `max |closedness residual|`.
pub(crate) fn require_integrating_factor(p: &OdeProblem, mu: &Expr, tol: &Tolerances) -> Result<f64> {
    let mu_stats = sweep(mu, &p.region)?;
    if mu_stats.max_abs == 0.0 {
        return Err(Error::InvalidArgument("the zero function is not an integrating factor".into()));
    }
    let res = closedness_residual(&p.phi, mu);
    let stats = sweep(&res, &p.region)?;
    if stats.max_abs > tol.residual_rel * (1.0 + mu_stats.max_abs) {
        let (x, u) = stats.argmax.unwrap_or((f64::NAN, f64::NAN));
        return Err(Error::NotIntegratingFactor {
            mu: mu.to_string(),
            residual: stats.max_abs,
            x,
            u,
        });
    }
    Ok(stats.max_abs)
}

/// `F` with `dF = mu (-phi dx + du)` by quadrature along the L-shaped path
/// from `basepoint`: up in `u` at `x0`, then across in `x`. Returns the
/// field and its drift along solution trajectories.
pub fn first_integral_from_mu(
    p: &OdeProblem,
    mu: &Expr,
    basepoint: (f64, f64),
    tol: &Tolerances,
) -> Result<(NumericField, DriftReport)> {
    require_integrating_factor(p, mu, tol)?;
    let (x0, u0) = basepoint;
    if !p.region.contains(x0, u0) {
        return Err(Error::InvalidArgument(format!("basepoint ({x0}, {u0}) lies outside the region")));
    }
    mu.eval(x0, u0)?;
    let field = NumericField::LineIntegral {
        mu: simplify(mu),
        mu_phi: simplify(&(mu * &p.phi)),
        x0,
        u0,
        tol: tol.quad,
    };
    let drift = drift_along_trajectories(p, |x, u| field.eval(x, u), NUMERIC_STRIDE)?;
    Ok((field, drift))
}

/// Report for a caller-supplied integrating factor, based at the region
/// center.
pub fn integrate_with_mu(p: &OdeProblem, mu: &Expr, tol: &Tolerances) -> Result<IntegrationReport> {
    let basepoint = p.region.center();
    let (field, drift) = first_integral_from_mu(p, mu, basepoint, tol)?;
    Ok(IntegrationReport {
        method: IntegrationMethod::UserSuppliedMu,
        branch: None,
        phi: p.phi.clone(),
        epsilon: Expr::zero(),
        region: p.region,
        mu: Some(simplify(mu)),
        first_integral: FirstIntegral::Numeric(field),
        psi: None,
        catalog_family: None,
        residual_first_integral: drift.max_drift,
        drift: Some(drift),
        delta_used: None,
        k: None,
        basepoint: Some(basepoint),
        degenerate_fallback: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{diff, parse, Region, Var};

    fn problem(phi: &str, r: Region) -> OdeProblem {
        OdeProblem::new(parse(phi).unwrap(), r).unwrap()
    }

    #[test]
    fn line_integral_matches_hand_computed_first_integral() {
        let r = Region::rect(1.0, 2.0, -1.0, 1.0).unwrap();
        let p = problem("(1 - 3*x*u)/x^2", r);
        let (field, drift) = first_integral_from_mu(&p, &parse("x^3").unwrap(), (1.0, 0.0), &Tolerances::default()).unwrap();
        for (x, u) in r.interior_points(4) {
            let want = x.powi(3) * u - 0.5 * x * x + 0.5;
            assert!((field.eval(x, u).unwrap() - want).abs() < 1e-9);
        }
        assert!(drift.max_drift < 1e-8, "{drift:?}");
        assert_eq!(drift.trajectories, 5);
    }

    #[test]
    fn rejects_non_factor() {
        let r = Region::rect(1.0, 2.0, -1.0, 1.0).unwrap();
        let p = problem("(1 - 3*x*u)/x^2", r);
        let err = first_integral_from_mu(&p, &parse("x^2").unwrap(), (1.5, 0.0), &Tolerances::default()).unwrap_err();
        assert!(matches!(err, Error::NotIntegratingFactor { .. }));
        let err = first_integral_from_mu(&p, &Expr::zero(), (1.5, 0.0), &Tolerances::default()).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }

    #[test]
    fn lambert_factor_from_known_integral() {
        let r = Region::rect(2.0, 3.0, -1.0, 1.0).unwrap();
        let p = problem("(lambert_w(exp(-u-1)) + 1)/(1 - x)", r);
        let f = parse("lambert_w(exp(-u-1))/(1 - x)").unwrap();
        let mu = diff(&f, Var::U);
        let (_, drift) = first_integral_from_mu(&p, &mu, r.center(), &Tolerances::default()).unwrap();
        assert!(drift.max_drift < 1e-6, "{drift:?}");
    }

    #[test]
    fn quadrature_through_singularity() {
        let field = NumericField::FlatDegenerate {
            phi: parse("1/x").unwrap(),
            x0: -0.5,
            u_ref: 1.5,
            tol: 1e-10,
        };
        assert!(matches!(field.eval(0.5, 1.5), Err(Error::PathCrossesSingularity(_))));
    }
}
