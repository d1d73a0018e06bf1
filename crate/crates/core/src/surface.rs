//! The surface attached to `u' = phi(x, u)` and its deformations.
//!
//! For a deformation function `eps(x, u)` the metric is
//!
//! ```text
//! g_eps = (1 + phi^2 e^{2 eps}) dx^2 - 2 phi e^{2 eps} dx du + e^{2 eps} du^2
//! ```
//!
//! with orthonormal coframe `w1 = dx`, `w2 = e^eps (-phi dx + du)`. In this
//! frame the connection is carried by the single function
//! `Delta_eps = A(eps) + phi_u`, and the Gaussian curvature is
//! `K_eps = -A(Delta_eps) - Delta_eps^2`, where `A = d/dx + phi d/du`.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::expr::{diff, is_numerically_zero, simplify, sweep, Expr, Region, Var};
use crate::json;

/// The equation `u' = phi(x, u)` on a sample region.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeProblem {
    pub phi: Expr,
    pub region: Region,
}

impl OdeProblem {
    /// Fails with [`Error::RegionUnusable`] when `phi` evaluates on fewer
    /// than half of the region's sample points.
    pub fn new(phi: Expr, region: Region) -> Result<Self> {
        sweep(&phi, &region)?;
        Ok(Self { phi, region })
    }
}

/// Deformation function `eps(x, u)`; the default is the undeformed surface.
#[derive(Debug, Clone, PartialEq)]
pub struct Deformation {
    pub epsilon: Expr,
}

impl Default for Deformation {
    fn default() -> Self {
        Self { epsilon: Expr::zero() }
    }
}

impl Deformation {
    pub fn new(epsilon: Expr) -> Self {
        Self { epsilon }
    }

    pub fn is_trivial(&self) -> bool {
        simplify(&self.epsilon).is_zero()
    }
}

/// `A(h) = h_x + phi h_u`.
pub fn apply_a(phi: &Expr, h: &Expr) -> Expr {
    simplify(&(diff(h, Var::X) + phi * diff(h, Var::U)))
}

/// `Delta_eps = A(eps) + phi_u`.
pub fn delta_eps(phi: &Expr, eps: &Expr) -> Expr {
    simplify(&(apply_a(phi, eps) + diff(phi, Var::U)))
}

/// `K_eps = -A(Delta_eps) - Delta_eps^2`.
pub fn curvature(phi: &Expr, eps: &Expr) -> Expr {
    let delta = delta_eps(phi, eps);
    simplify(&(-apply_a(phi, &delta) - delta.pow(2.0)))
}

/// Undeformed curvature in the form `-d/du (A(phi))`.
pub fn curvature_undeformed(phi: &Expr) -> Expr {
    simplify(&-diff(&apply_a(phi, phi), Var::U))
}

/// Density of the area form `w1 ^ w2 = e^eps dx ^ du`.
pub fn volume_form_density(eps: &Expr) -> Expr {
    simplify(&eps.exp())
}

/// Pointwise checks of the metric invariants over the region samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceChecks {
    /// max of `|E + F phi - 1|` and `|F + G phi|`
    pub orthonormality_max: f64,
    /// max of `|G - e^{2 eps}|` where `eps` itself evaluates
    pub conformal_factor_max: f64,
    /// max of `|EG - F^2 - e^{2 eps}|`
    pub determinant_max: f64,
    pub min_determinant: f64,
    /// max discrepancy between the frame and `-d/du A(phi)` curvature forms,
    /// only for the undeformed surface
    pub undeformed_agreement_max: Option<f64>,
    pub evaluated: usize,
    pub skipped: usize,
}

/// Metric, frame data and curvature of `S_eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceData {
    pub phi: Expr,
    pub epsilon: Expr,
    pub region: Region,
    pub e: Expr,
    pub f: Expr,
    pub g: Expr,
    pub delta_eps: Expr,
    pub curvature: Expr,
    pub checks: SurfaceChecks,
}

const INVARIANT_TOL: f64 = 1e-10;
const REDUCTION_TOL: f64 = 1e-9;

/// Build `S_eps` for `p.phi` and check its invariants on `p.region`.
pub fn build_surface(p: &OdeProblem, d: &Deformation) -> Result<SurfaceData> {
    let region = p.region;
    let phi = simplify(&p.phi);
    let eps = simplify(&d.epsilon);
    sweep(&phi, &region)?;
    sweep(&eps, &region)?;

    let conformal = simplify(&(2.0 * &eps).exp());
    let e = simplify(&(1.0 + phi.pow(2.0) * &conformal));
    let f = simplify(&-(&phi * &conformal));
    let g = conformal;
    let delta = delta_eps(&phi, &eps);
    let k = curvature(&phi, &eps);
    let undeformed = eps.is_zero().then(|| curvature_undeformed(&phi));

    let mut checks = SurfaceChecks {
        orthonormality_max: 0.0,
        conformal_factor_max: 0.0,
        determinant_max: 0.0,
        min_determinant: f64::INFINITY,
        undeformed_agreement_max: undeformed.as_ref().map(|_| 0.0),
        evaluated: 0,
        skipped: 0,
    };

    for (x, u) in region.sample_points() {
        let vals = (|| Ok::<_, crate::DomainError>((phi.eval(x, u)?, e.eval(x, u)?, f.eval(x, u)?, g.eval(x, u)?)))();
        let Ok((phi_v, e_v, f_v, g_v)) = vals else {
            checks.skipped += 1;
            continue;
        };
        checks.evaluated += 1;
        let scale = 1.0 + e_v.abs() * (1.0 + g_v.abs());

        let ortho = (e_v + f_v * phi_v - 1.0).abs().max((f_v + g_v * phi_v).abs());
        checks.orthonormality_max = checks.orthonormality_max.max(ortho);
        if ortho > INVARIANT_TOL * scale {
            return Err(Error::InvariantViolation(format!(
                "frame orthonormality fails at ({x}, {u}) by {ortho:e}"
            )));
        }

        let det = e_v * g_v - f_v * f_v;
        checks.min_determinant = checks.min_determinant.min(det);
        if !(e_v > 0.0 && det > 0.0) {
            return Err(Error::InvariantViolation(format!(
                "metric is not positive definite at ({x}, {u}): E = {e_v}, det = {det}"
            )));
        }
        checks.determinant_max = checks.determinant_max.max((det - g_v).abs());
        if (det - g_v).abs() > INVARIANT_TOL * scale {
            return Err(Error::InvariantViolation(format!(
                "EG - F^2 differs from e^(2 eps) at ({x}, {u})"
            )));
        }

        if let Ok(eps_v) = eps.eval(x, u) {
            let dev = (g_v - (2.0 * eps_v).exp()).abs();
            checks.conformal_factor_max = checks.conformal_factor_max.max(dev);
            if dev > INVARIANT_TOL * (1.0 + g_v.abs()) {
                return Err(Error::InvariantViolation(format!("G differs from e^(2 eps) at ({x}, {u})")));
            }
        }

        if let (Some(kf), Some(max)) = (&undeformed, checks.undeformed_agreement_max.as_mut()) {
            if let (Ok(a), Ok(b)) = (k.eval(x, u), kf.eval(x, u)) {
                let dev = (a - b).abs();
                *max = max.max(dev);
                if dev > REDUCTION_TOL * a.abs().max(1.0) {
                    return Err(Error::InvariantViolation(format!(
                        "curvature forms disagree at ({x}, {u}): {a} vs {b}"
                    )));
                }
            }
        }
    }
    if 2 * checks.evaluated < checks.evaluated + checks.skipped {
        return Err(Error::RegionUnusable {
            what: "metric components".into(),
            evaluable: checks.evaluated,
            total: checks.evaluated + checks.skipped,
        });
    }

    Ok(SurfaceData {
        phi,
        epsilon: eps,
        region,
        e,
        f,
        g,
        delta_eps: delta,
        curvature: k,
        checks,
    })
}

impl SurfaceData {
    /// The coframe as text: `(w1, w2)`.
    pub fn coframe(&self) -> (String, String) {
        let w2 = if self.epsilon.is_zero() {
            format!("-({}) dx + du", self.phi)
        } else {
            format!("exp({}) * (-({}) dx + du)", self.epsilon, self.phi)
        };
        ("dx".to_string(), w2)
    }

    pub fn to_json(&self) -> Value {
        let (w1, w2) = self.coframe();
        json!({
            "phi": self.phi.to_string(),
            "epsilon": self.epsilon.to_string(),
            "E": self.e.to_string(),
            "F": self.f.to_string(),
            "G": self.g.to_string(),
            "delta_eps": self.delta_eps.to_string(),
            "curvature": self.curvature.to_string(),
            "coframe": { "omega1": w1, "omega2": w2 },
            "region": json::region(&self.region),
            "checks": {
                "orthonormality_max": json::num(self.checks.orthonormality_max),
                "conformal_factor_max": json::num(self.checks.conformal_factor_max),
                "determinant_max": json::num(self.checks.determinant_max),
                "min_determinant": json::num(self.checks.min_determinant),
                "undeformed_agreement_max": self.checks.undeformed_agreement_max.map(json::num),
                "evaluated": self.checks.evaluated,
                "skipped": self.checks.skipped,
            },
        })
    }
}

/// Curvature verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurvatureClass {
    Zero,
    Constant(f64),
    NonConstant,
}

impl CurvatureClass {
    pub fn label(&self) -> &'static str {
        match self {
            CurvatureClass::Zero => "Zero",
            CurvatureClass::Constant(_) => "Constant",
            CurvatureClass::NonConstant => "NonConstant",
        }
    }

    /// The constant value, `0` for a flat surface.
    pub fn constant(&self) -> Option<f64> {
        match self {
            CurvatureClass::Zero => Some(0.0),
            CurvatureClass::Constant(k) => Some(*k),
            CurvatureClass::NonConstant => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureEvidence {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// `max |K - mean|`
    pub max_deviation: f64,
    pub max_abs: f64,
    pub argmax_deviation: Option<(f64, f64)>,
    pub tol: f64,
    pub evaluated: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub class: CurvatureClass,
    pub evidence: CurvatureEvidence,
}

impl Classification {
    pub fn to_json(&self) -> Value {
        let ev = &self.evidence;
        json!({
            "class": self.class.label(),
            "k": self.class.constant().map(json::num),
            "min": json::num(ev.min),
            "max": json::num(ev.max),
            "mean": json::num(ev.mean),
            "max_deviation": json::num(ev.max_deviation),
            "argmax_deviation": json::point(ev.argmax_deviation),
            "max_abs": json::num(ev.max_abs),
            "tol": json::num(ev.tol),
            "evaluated": ev.evaluated,
            "skipped": ev.skipped,
        })
    }
}

/// Default tolerance for [`classify_curvature`].
pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-8;

/// Classify `K_eps` on the surface's region as zero, constant (candidate
/// `k` = sample mean, accepted when `max |K - k| <= tol (1 + |k|)`) or
/// non-constant.
pub fn classify_curvature(s: &SurfaceData, tol: f64) -> Result<Classification> {
    let zero = is_numerically_zero(&s.curvature, &s.region, tol)?;

    let mut values = Vec::new();
    let mut skipped = 0;
    for (x, u) in s.region.sample_points() {
        match s.curvature.eval(x, u) {
            Ok(v) => values.push((x, u, v)),
            Err(_) => skipped += 1,
        }
    }
    if values.is_empty() {
        return Err(Error::RegionUnusable {
            what: s.curvature.to_string(),
            evaluable: 0,
            total: skipped,
        });
    }
    let n = values.len() as f64;
    let mean = values.iter().map(|v| v.2).sum::<f64>() / n;
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut max_dev = 0.0;
    let mut arg = None;
    for &(x, u, v) in &values {
        min = min.min(v);
        max = max.max(v);
        let dev = (v - mean).abs();
        if arg.is_none() || dev > max_dev {
            max_dev = dev;
            arg = Some((x, u));
        }
    }

    let class = if zero.is_zero {
        CurvatureClass::Zero
    } else if max_dev <= tol * (1.0 + mean.abs()) {
        CurvatureClass::Constant(mean)
    } else {
        CurvatureClass::NonConstant
    };
    Ok(Classification {
        class,
        evidence: CurvatureEvidence {
            min,
            max,
            mean,
            max_deviation: max_dev,
            max_abs: zero.max_abs,
            argmax_deviation: arg,
            tol,
            evaluated: values.len(),
            skipped,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn p(text: &str) -> Expr {
        parse(text).unwrap()
    }

    fn max_diff_on(a: &Expr, b: &Expr, r: &Region) -> f64 {
        r.sample_points()
            .into_iter()
            .filter_map(|(x, u)| Some((a.eval(x, u).ok()? - b.eval(x, u).ok()?).abs()))
            .fold(0.0, f64::max)
    }

    #[test]
    fn apply_a_examples() {
        assert!(apply_a(&p("u^2"), &p("x")).is_one());
        assert_eq!(apply_a(&p("sin(x)"), &p("u")), p("sin(x)"));
        let phi = p("(lambert_w(exp(-u-1)) + 1)/(1 - x)");
        let r = Region::rect(2.0, 3.0, -1.0, 1.0).unwrap();
        assert!(max_diff_on(&apply_a(&phi, &phi), &p("1/(x-1)^2"), &r) < 1e-12);
    }

    #[test]
    fn delta_eps_examples() {
        assert_eq!(delta_eps(&p("u^2"), &Expr::zero()), simplify(&p("2*u")));
        let r = Region::rect(0.0, 1.0, 0.35, 0.9).unwrap();
        let d = delta_eps(&p("u^2"), &p("ln((1/u^2)*sin(1/u))"));
        assert!(max_diff_on(&d, &p("-cot(1/u)"), &r) < 1e-12);
        // the hyperbolic example collapses structurally
        assert!(delta_eps(&p("(1 - 3*x*u)/x^2"), &p("x + 3*ln(x)")).is_one());
    }

    #[test]
    fn curvature_examples() {
        assert_eq!(curvature(&p("u^2"), &Expr::zero()), simplify(&p("-6*u^2")));
        let r = Region::rect(1.0, 2.0, -1.0, 1.0).unwrap();
        assert!(max_diff_on(&curvature(&p("(1 - 3*x*u)/x^2"), &Expr::zero()), &p("-12/x^2"), &r) < 1e-12);
        assert_eq!(curvature(&p("(1 - 3*x*u)/x^2"), &p("x + 3*ln(x)")), Expr::Const(-1.0));
        let r = Region::rect(0.0, 1.0, 0.35, 0.9).unwrap();
        assert!(max_diff_on(&curvature(&p("u^2"), &p("ln((1/u^2)*sin(1/u))")), &Expr::one(), &r) < 1e-10);
        let r = Region::rect(-0.3, 0.3, -0.3, 0.3).unwrap();
        assert!(max_diff_on(&curvature(&p("-1 + sqrt(1 - (x+u)^2)"), &Expr::zero()), &Expr::one(), &r) < 1e-12);
    }

    #[test]
    fn volume_density() {
        assert!(volume_form_density(&Expr::zero()).is_one());
        assert_eq!(volume_form_density(&p("ln(x^2 + 1)")), simplify(&p("x^2 + 1")));
        let v = volume_form_density(&p("x + 3*ln(x)"));
        assert!((v.eval(1.0, 0.0).unwrap() - std::f64::consts::E).abs() < 1e-15);
        assert_eq!(v, simplify(&p("exp(x)*x^3")));
    }

    #[test]
    fn metric_of_u_squared() {
        let r = Region::rect(-1.0, 1.0, 1.0, 2.0).unwrap();
        let s = build_surface(&OdeProblem::new(p("u^2"), r).unwrap(), &Deformation::default()).unwrap();
        assert_eq!(s.e, simplify(&p("1 + u^4")));
        assert_eq!(s.f, simplify(&p("-u^2")));
        assert!(s.g.is_one());
        assert!(s.checks.undeformed_agreement_max.unwrap() < 1e-9);
        assert!(s.checks.determinant_max < 1e-10);
    }

    #[test]
    fn deformed_metric_component() {
        let r = Region::rect(1.0, 2.0, -1.0, 1.0).unwrap();
        let s = build_surface(
            &OdeProblem::new(p("(1 - 3*x*u)/x^2"), r).unwrap(),
            &Deformation::new(p("x + 3*ln(x)")),
        )
        .unwrap();
        for (x, u) in r.sample_points() {
            let want = (2.0 * x).exp() * x.powi(6);
            assert!((s.g.eval(x, u).unwrap() - want).abs() <= 1e-12 * want);
        }
    }

    #[test]
    fn classification() {
        let r = Region::rect(2.0, 3.0, -1.0, 1.0).unwrap();
        let phi = p("(lambert_w(exp(-u-1)) + 1)/(1 - x)");
        let s = build_surface(&OdeProblem::new(phi, r).unwrap(), &Deformation::default()).unwrap();
        assert_eq!(classify_curvature(&s, 1e-8).unwrap().class, CurvatureClass::Zero);

        let r = Region::rect(-0.3, 0.3, -0.3, 0.3).unwrap();
        let s = build_surface(&OdeProblem::new(p("-1 + sqrt(1 + (x+u)^2)"), r).unwrap(), &Deformation::default()).unwrap();
        match classify_curvature(&s, 1e-8).unwrap().class {
            CurvatureClass::Constant(k) => assert!((k + 1.0).abs() < 1e-10),
            other => panic!("{other:?}"),
        }

        let r = Region::rect(-1.0, 1.0, 1.0, 2.0).unwrap();
        let s = build_surface(&OdeProblem::new(p("u^2"), r).unwrap(), &Deformation::default()).unwrap();
        let c = classify_curvature(&s, 1e-8).unwrap();
        assert_eq!(c.class, CurvatureClass::NonConstant);
        assert_eq!(c.evidence.min, -24.0);
        assert_eq!(c.evidence.max, -6.0);
    }

    #[test]
    fn unusable_problem() {
        let r = Region::rect(-2.0, -1.0, 0.0, 1.0).unwrap();
        assert!(matches!(OdeProblem::new(p("sqrt(x)"), r), Err(Error::RegionUnusable { .. })));
    }
}
