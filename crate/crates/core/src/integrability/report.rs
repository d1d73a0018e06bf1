use serde_json::{json, Value};

use super::closedness_residual;
use super::field::{DriftReport, FirstIntegral};
use crate::expr::{sweep, Expr, Region};
use crate::json;
use crate::surface::apply_a;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegrationMethod {
    FlatDirect,
    ConstantCurvatureDeformation,
    UserSuppliedMu,
}

impl IntegrationMethod {
    pub fn name(self) -> &'static str {
        match self {
            IntegrationMethod::FlatDirect => "FlatDirect",
            IntegrationMethod::ConstantCurvatureDeformation => "ConstantCurvatureDeformation",
            IntegrationMethod::UserSuppliedMu => "UserSuppliedMu",
        }
    }
}

/// Which case of the `S_eps(delta)` dichotomy produced `mu`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `S_eps(delta) == 0`: `e^{-eps} delta` is a symmetrizing factor and
    /// `mu = e^eps / delta`
    SVanishes,
    /// `mu = e^eps S_eps(delta)`
    SNonvanishing,
}

impl Branch {
    pub fn name(self) -> &'static str {
        match self {
            Branch::SVanishes => "S_vanishes",
            Branch::SNonvanishing => "S_nonvanishing",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationReport {
    pub method: IntegrationMethod,
    pub branch: Option<Branch>,
    pub phi: Expr,
    pub epsilon: Expr,
    pub region: Region,
    pub mu: Option<Expr>,
    pub first_integral: FirstIntegral,
    /// potential with `Psi' = A(phi)` (flat case)
    pub psi: Option<Expr>,
    pub catalog_family: Option<&'static str>,
    /// `max |A(F)|` for a symbolic `F`, otherwise the trajectory drift
    pub residual_first_integral: f64,
    pub drift: Option<DriftReport>,
    pub delta_used: Option<Expr>,
    pub k: Option<f64>,
    pub basepoint: Option<(f64, f64)>,
    /// `phi` does not depend on `u` and `F = u - int phi dx` was used
    pub degenerate_fallback: bool,
}

impl IntegrationReport {
    /// `max |mu_x + (mu phi)_u|` over the region, recomputed.
    pub fn residual_closedness(&self) -> Option<f64> {
        let mu = self.mu.as_ref()?;
        sweep(&closedness_residual(&self.phi, mu), &self.region)
            .ok()
            .map(|s| s.max_abs)
    }

    /// `max |A(F)|` for a symbolic first integral, recomputed; the stored
    /// drift otherwise.
    pub fn first_integral_residual(&self) -> f64 {
        match &self.first_integral {
            FirstIntegral::Symbolic(f) => sweep(&apply_a(&self.phi, f), &self.region)
                .map(|s| s.max_abs)
                .unwrap_or(f64::NAN),
            FirstIntegral::Numeric(_) => self.residual_first_integral,
        }
    }

    pub fn to_json(&self) -> Value {
        let numeric = match &self.first_integral {
            FirstIntegral::Numeric(f) => f.to_json(),
            FirstIntegral::Symbolic(_) => Value::Null,
        };
        json!({
            "method": self.method.name(),
            "branch": self.branch.map(Branch::name),
            "phi": self.phi.to_string(),
            "epsilon": self.epsilon.to_string(),
            "mu": self.mu.as_ref().map(|m| m.to_string()),
            "first_integral": self.first_integral.describe(),
            "numeric_field": numeric,
            "psi": self.psi.as_ref().map(|p| p.to_string()),
            "catalog_family": self.catalog_family,
            "residual_closedness": self.residual_closedness().map(json::num),
            "residual_first_integral": json::num(self.first_integral_residual()),
            "drift": self.drift.as_ref().map(DriftReport::to_json),
            "delta_used": self.delta_used.as_ref().map(|d| d.to_string()),
            "k": self.k.map(json::num),
            "basepoint": json::point(self.basepoint),
            "degenerate_fallback": self.degenerate_fallback,
            "region": json::region(&self.region),
        })
    }
}
