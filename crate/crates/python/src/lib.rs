//! Python module `odesurface`: expressions, regions, curvature and the
//! integration pipeline. Structured results come back as JSON strings
//! identical to the CLI reports.

use odesurface::integrability::{
    constant_curvature_integrating_factor, flat_first_integral, integrate_with_mu, lie_symmetry_check, Tolerances,
    VectorFieldXY,
};
use odesurface::numerics::{solve_ode, solve_pregeodesic, Trajectory};
use odesurface::surface::{build_surface, classify_curvature, curvature, CurvatureClass, Deformation, OdeProblem};
use odesurface::{diff, parse, simplify, Error, Var};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn py_err(e: Error) -> PyErr {
    PyValueError::new_err(format!("[exit {}] {e}", e.exit_code()))
}

fn parse_expr(text: &str) -> PyResult<odesurface::Expr> {
    parse(text).map_err(py_err)
}

fn var(name: &str) -> PyResult<Var> {
    match name {
        "x" => Ok(Var::X),
        "u" => Ok(Var::U),
        _ => Err(PyValueError::new_err(format!("unknown variable `{name}`, expected x or u"))),
    }
}

/// An expression in `x` and `u`.
#[pyclass(name = "Expr", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyExpr {
    inner: odesurface::Expr,
}

#[pymethods]
impl PyExpr {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(Self { inner: parse_expr(text)? })
    }

    fn eval(&self, x: f64, u: f64) -> PyResult<f64> {
        self.inner.eval(x, u).map_err(|e| py_err(e.into()))
    }

    fn diff(&self, var_name: &str) -> PyResult<Self> {
        Ok(Self { inner: diff(&self.inner, var(var_name)?) })
    }

    fn simplify(&self) -> Self {
        Self { inner: simplify(&self.inner) }
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Expr('{}')", self.inner)
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }
}

/// Rectangular sample region.
#[pyclass(name = "Region", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyRegion {
    inner: odesurface::Region,
}

#[pymethods]
impl PyRegion {
    #[new]
    #[pyo3(signature = (x_min, x_max, u_min, u_max, grid = 33, seed = 42))]
    fn new(x_min: f64, x_max: f64, u_min: f64, u_max: f64, grid: usize, seed: u64) -> PyResult<Self> {
        let inner = odesurface::Region::new(x_min, x_max, u_min, u_max, grid, seed).map_err(py_err)?;
        Ok(Self { inner })
    }

    fn center(&self) -> (f64, f64) {
        self.inner.center()
    }

    fn __repr__(&self) -> String {
        let r = &self.inner;
        format!("Region({}, {}, {}, {})", r.x_min, r.x_max, r.u_min, r.u_max)
    }
}

fn problem(phi: &str, region: &PyRegion) -> PyResult<OdeProblem> {
    OdeProblem::new(parse_expr(phi)?, region.inner).map_err(py_err)
}

fn deformation(epsilon: Option<&str>) -> PyResult<Deformation> {
    Ok(match epsilon {
        Some(t) => Deformation::new(parse_expr(t)?),
        None => Deformation::default(),
    })
}

/// Simplified curvature `K_eps` of the surface attached to `phi`.
#[pyfunction]
#[pyo3(signature = (phi, epsilon = "0"))]
fn gaussian_curvature(phi: &str, epsilon: &str) -> PyResult<PyExpr> {
    Ok(PyExpr { inner: curvature(&parse_expr(phi)?, &parse_expr(epsilon)?) })
}

/// Surface data and curvature classification as JSON.
#[pyfunction]
#[pyo3(signature = (phi, region, epsilon = None, zero_tol = 1e-8))]
fn analyze(phi: &str, region: &PyRegion, epsilon: Option<&str>, zero_tol: f64) -> PyResult<String> {
    let s = build_surface(&problem(phi, region)?, &deformation(epsilon)?).map_err(py_err)?;
    let c = classify_curvature(&s, zero_tol).map_err(py_err)?;
    let v = serde_json::json!({ "surface": s.to_json(), "classification": c.to_json() });
    Ok(v.to_string())
}

/// Integration report as JSON. With `mu` the factor is checked and used
/// directly; otherwise the curvature class picks the flat or
/// constant-curvature route.
#[pyfunction]
#[pyo3(signature = (phi, region, epsilon = None, mu = None, zero_tol = 1e-8))]
fn integrate(phi: &str, region: &PyRegion, epsilon: Option<&str>, mu: Option<&str>, zero_tol: f64) -> PyResult<String> {
    let p = problem(phi, region)?;
    let tol = Tolerances { zero: zero_tol, ..Tolerances::default() };
    let rep = if let Some(mu) = mu {
        integrate_with_mu(&p, &parse_expr(mu)?, &tol)
    } else {
        let d = deformation(epsilon)?;
        let s = build_surface(&p, &d).map_err(py_err)?;
        let c = classify_curvature(&s, zero_tol).map_err(py_err)?;
        match c.class {
            CurvatureClass::Zero if d.is_trivial() => flat_first_integral(&p, &tol),
            CurvatureClass::NonConstant => Err(Error::NotConstantCurvature {
                min: c.evidence.min,
                max: c.evidence.max,
                mean: c.evidence.mean,
            }),
            _ => constant_curvature_integrating_factor(&p, &d, &tol),
        }
    }
    .map_err(py_err)?;
    Ok(rep.to_json().to_string())
}

/// Lie symmetry verdict for `xi d/dx + eta d/du` as JSON.
#[pyfunction]
#[pyo3(signature = (phi, xi, eta, region, tol = 1e-8))]
fn lie_symmetry(phi: &str, xi: &str, eta: &str, region: &PyRegion, tol: f64) -> PyResult<String> {
    let v = VectorFieldXY::new(parse_expr(xi)?, parse_expr(eta)?);
    let verdict = lie_symmetry_check(&parse_expr(phi)?, &v, &region.inner, tol).map_err(py_err)?;
    Ok(verdict.to_json().to_string())
}

fn samples(t: Trajectory) -> Vec<(f64, f64, f64)> {
    t.samples.iter().map(|s| (s.x, s.u, s.uprime)).collect()
}

/// RK4 solution of `u' = phi` as `(x, u, u')` samples.
#[pyfunction]
#[pyo3(signature = (phi, region, x0, u0, x_end, step = 1e-3))]
fn solve(phi: &str, region: &PyRegion, x0: f64, u0: f64, x_end: f64, step: f64) -> PyResult<Vec<(f64, f64, f64)>> {
    let t = solve_ode(&problem(phi, region)?, x0, u0, x_end, step).map_err(py_err)?;
    Ok(samples(t))
}

/// Pregeodesic through `(x0, u0)` with initial slope `slope0`.
#[pyfunction]
#[pyo3(signature = (phi, region, x0, u0, slope0, x_end, step = 1e-3))]
fn pregeodesic(
    phi: &str,
    region: &PyRegion,
    x0: f64,
    u0: f64,
    slope0: f64,
    x_end: f64,
    step: f64,
) -> PyResult<Vec<(f64, f64, f64)>> {
    let t = solve_pregeodesic(&problem(phi, region)?, x0, u0, slope0, x_end, step).map_err(py_err)?;
    Ok(samples(t))
}

#[pymodule]
#[pyo3(name = "odesurface")]
fn odesurface_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyExpr>()?;
    m.add_class::<PyRegion>()?;
    m.add_function(wrap_pyfunction!(gaussian_curvature, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(integrate, m)?)?;
    m.add_function(wrap_pyfunction!(lie_symmetry, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(pregeodesic, m)?)?;
    Ok(())
}
