//! Integrating factors and first integrals from the geometry of `S_eps`.
//!
//! The operators `T_eps(h) = A(h) + Delta_eps h` and
//! `S_eps(h) = A(h) - Delta_eps h` factor `A^2 + K_eps`. When `K_eps` is a
//! constant `k`, any nonzero solution `delta(x)` of `delta'' + k delta = 0`
//! yields either an integrating factor `e^eps S_eps(delta)` or, when that
//! vanishes, a symmetrizing factor `e^{-eps} delta`.

mod catalog;
mod constant;
mod field;
mod flat;
mod report;

pub use catalog::{antiderivative, snap_rational, CatalogMatch};
pub use constant::{constant_curvature_integrating_factor, delta_for_constant_k, delta_zero_in};
pub use field::{drift_along_trajectories, first_integral_from_mu, integrate_with_mu, DriftReport, FirstIntegral, NumericField};
pub use flat::flat_first_integral;
pub use report::{Branch, IntegrationMethod, IntegrationReport};

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::expr::{diff, simplify, sweep, Expr, Region, Var};
use crate::json;
use crate::surface::{apply_a, curvature, delta_eps};

/// Numeric thresholds shared by the integration pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// curvature classification and generic zero tests
    pub zero: f64,
    /// deciding `S_eps(delta) == 0` before picking a branch
    pub s_zero: f64,
    /// closedness residual must stay below `residual_rel (1 + max |mu|)`
    pub residual_rel: f64,
    /// adaptive Simpson tolerance
    pub quad: f64,
    /// relative tolerance when verifying a catalog antiderivative
    pub catalog: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            zero: 1e-8,
            s_zero: 1e-9,
            residual_rel: 1e-7,
            quad: 1e-10,
            catalog: 1e-9,
        }
    }
}

/// The vector field `xi d/dx + eta d/du`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFieldXY {
    pub xi: Expr,
    pub eta: Expr,
}

impl VectorFieldXY {
    pub fn new(xi: Expr, eta: Expr) -> Self {
        Self { xi, eta }
    }

    /// The field `A = d/dx + phi d/du` itself.
    pub fn associated(phi: &Expr) -> Self {
        Self::new(Expr::one(), phi.clone())
    }

    /// Both components must evaluate on at least half of the samples.
    pub fn validate(&self, r: &Region) -> Result<()> {
        sweep(&self.xi, r)?;
        sweep(&self.eta, r)?;
        Ok(())
    }
}

/// `T_eps(h) = A(h) + Delta_eps h`.
pub fn op_t(phi: &Expr, eps: &Expr, h: &Expr) -> Expr {
    simplify(&(apply_a(phi, h) + delta_eps(phi, eps) * h))
}

/// `S_eps(h) = A(h) - Delta_eps h`.
pub fn op_s(phi: &Expr, eps: &Expr, h: &Expr) -> Expr {
    simplify(&(apply_a(phi, h) - delta_eps(phi, eps) * h))
}

/// `mu_x + (mu phi)_u`; `mu` is an integrating factor iff this vanishes.
pub fn closedness_residual(phi: &Expr, mu: &Expr) -> Expr {
    simplify(&(diff(mu, Var::X) + diff(&(mu * phi), Var::U)))
}

/// `T_eps(S_eps(h)) - (A(A(h)) + K_eps h)`, identically zero.
pub fn factorization_check(phi: &Expr, eps: &Expr, h: &Expr) -> Expr {
    let lhs = op_t(phi, eps, &op_s(phi, eps, h));
    let rhs = apply_a(phi, &apply_a(phi, h)) + curvature(phi, eps) * h;
    simplify(&(lhs - rhs))
}

/// Residuals `(A^2(sigma), A^2(delta) + K_eps delta)` of the Jacobi field
/// `sigma A + delta e^{-eps} d/du`; both vanish iff it is a Jacobi field
/// relative to `A`.
pub fn jacobi_residuals(phi: &Expr, eps: &Expr, sigma: &Expr, delta: &Expr) -> (Expr, Expr) {
    let r1 = apply_a(phi, &apply_a(phi, sigma));
    let r2 = simplify(&(apply_a(phi, &apply_a(phi, delta)) + curvature(phi, eps) * delta));
    (r1, r2)
}

/// Coefficient `delta = eta - xi phi` of the component of `V` orthogonal to `A`.
pub fn perp_component(phi: &Expr, v: &VectorFieldXY) -> Expr {
    simplify(&(&v.eta - &v.xi * phi))
}

/// Where [`lie_symmetry_check`] found `[V, A]` not proportional to `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryEvidence {
    /// simplified `c2 - c1 phi`
    pub defect: Expr,
    pub max_abs: f64,
    pub argmax: Option<(f64, f64)>,
    pub limit: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SymmetryVerdict {
    /// `[V, A] = rho A`; `cross_check_max` is the largest pointwise gap
    /// between `rho = -A(xi)` and `-A(g(V, A))`.
    IsSymmetry { rho: Expr, cross_check_max: f64 },
    NotSymmetry(SymmetryEvidence),
}

impl SymmetryVerdict {
    pub fn is_symmetry(&self) -> bool {
        matches!(self, SymmetryVerdict::IsSymmetry { .. })
    }

    pub fn to_json(&self) -> Value {
        match self {
            SymmetryVerdict::IsSymmetry { rho, cross_check_max } => json!({
                "verdict": "IsSymmetry",
                "rho": rho.to_string(),
                "rho_cross_check_max": json::num(*cross_check_max),
            }),
            SymmetryVerdict::NotSymmetry(ev) => json!({
                "verdict": "NotSymmetry",
                "defect": ev.defect.to_string(),
                "max_abs": json::num(ev.max_abs),
                "argmax": json::point(ev.argmax),
                "limit": json::num(ev.limit),
            }),
        }
    }
}

const RHO_AGREEMENT: f64 = 1e-9;

/// Decide whether `V` is a Lie point symmetry of `u' = phi`.
///
/// With `[V, A] = c1 d/dx + c2 d/du`, `c1 = -A(xi)` and
/// `c2 = xi phi_x + eta phi_u - A(eta)`, `V` is a symmetry iff
/// `c2 - c1 phi == 0`, and then `rho = c1`. Fields parallel to `A` on more
/// than half of the samples are rejected.
pub fn lie_symmetry_check(phi: &Expr, v: &VectorFieldXY, r: &Region, tol: f64) -> Result<SymmetryVerdict> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    v.validate(r)?;

    let perp = perp_component(phi, v);
    let (mut parallel, mut evaluated) = (0, 0);
    for (x, u) in r.sample_points() {
        let vals = (|| Ok::<_, crate::DomainError>((perp.eval(x, u)?, v.xi.eval(x, u)?, v.eta.eval(x, u)?)))();
        if let Ok((d, xi, eta)) = vals {
            evaluated += 1;
            if d.abs() <= tol * (1.0 + xi.abs() + eta.abs()) {
                parallel += 1;
            }
        }
    }
    if 2 * parallel > evaluated {
        return Err(Error::DegenerateField { parallel, evaluated });
    }

    let c1 = simplify(&-apply_a(phi, &v.xi));
    let c2 = simplify(&(&v.xi * diff(phi, Var::X) + &v.eta * diff(phi, Var::U) - apply_a(phi, &v.eta)));
    let c1_phi = simplify(&(&c1 * phi));
    let defect = simplify(&(&c2 - &c1_phi));

    let mut max_abs: f64 = 0.0;
    let mut argmax = None;
    let mut scale: f64 = 0.0;
    for (x, u) in r.sample_points() {
        if let (Ok(d), Ok(a), Ok(b)) = (defect.eval(x, u), c2.eval(x, u), c1_phi.eval(x, u)) {
            scale = scale.max(a.abs() + b.abs());
            if argmax.is_none() || d.abs() > max_abs {
                max_abs = d.abs();
                argmax = Some((x, u));
            }
        }
    }
    let limit = tol * (1.0 + scale);
    if max_abs > limit {
        return Ok(SymmetryVerdict::NotSymmetry(SymmetryEvidence {
            defect,
            max_abs,
            argmax,
            limit,
        }));
    }

    // g(V, A) with the undeformed metric
    let (e, f, g) = (1.0 + phi.pow(2.0), -phi, Expr::one());
    let g_va = &v.xi * (e + &f * phi) + &v.eta * (f + g * phi);
    let rho_alt = simplify(&-apply_a(phi, &simplify(&g_va)));
    let mut cross = 0.0f64;
    for (x, u) in r.sample_points() {
        if let (Ok(a), Ok(b)) = (c1.eval(x, u), rho_alt.eval(x, u)) {
            let gap = (a - b).abs();
            cross = cross.max(gap);
            if gap > RHO_AGREEMENT * (1.0 + a.abs()) {
                return Err(Error::InvariantViolation(format!(
                    "rho computations disagree at ({x}, {u}): {a} vs {b}"
                )));
            }
        }
    }
    Ok(SymmetryVerdict::IsSymmetry {
        rho: c1,
        cross_check_max: cross,
    })
}
