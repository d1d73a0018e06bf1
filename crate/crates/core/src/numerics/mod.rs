//! Numeric oracles: RK4 trajectories, pregeodesics, Brioschi curvature,
//! frame covariant derivatives, residual sweeps and quadrature.

mod brioschi;
mod ode;
mod quadrature;

use std::fmt::Write as _;

pub use brioschi::{brioschi_curvature, brioschi_raw, DEFAULT_BRIOSCHI_STEP};
pub use ode::{solve_ode, solve_pregeodesic, MAX_HALVINGS, SLOPE_BLOWUP};
pub use quadrature::{adaptive_simpson, QUAD_TOL};

use crate::error::Result;
use crate::expr::{sweep, Expr, Region, SweepStats};

/// How a [`Trajectory`] was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// RK4 on `u' = phi`.
    Rk4Ode,
    /// RK4 on the first-order system for the pregeodesic equation.
    Rk4Pregeodesic,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Rk4Ode => "rk4_ode",
            Method::Rk4Pregeodesic => "rk4_pregeodesic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub x: f64,
    pub u: f64,
    pub uprime: f64,
}

/// Samples at strictly increasing `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub step: f64,
    pub method: Method,
}

impl Trajectory {
    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }

    /// CSV with header `x,u,uprime` and 17 significant digits per value.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,u,uprime\n");
        for s in &self.samples {
            let _ = writeln!(out, "{:.16e},{:.16e},{:.16e}", s.x, s.u, s.uprime);
        }
        out
    }
}

/// `nabla_X Y` in the orthonormal frame dual to `(w1, w2)`.
///
/// `tangent = (a1, a2)` are the frame components of `X`, `field = (y1, y2)`
/// those of `Y`, and `derivs` the derivatives of `y1`, `y2` along `X`. The
/// only nonzero torsion-free connection coefficient is `Delta_eps` on the
/// second frame vector.
pub fn covariant_derivative_frame(
    delta_eps_value: f64,
    tangent: (f64, f64),
    field: (f64, f64),
    derivs: (f64, f64),
) -> (f64, f64) {
    let (_, a2) = tangent;
    let (y1, y2) = field;
    (
        derivs.0 + delta_eps_value * a2 * y2,
        derivs.1 - delta_eps_value * a2 * y1,
    )
}

/// `|e|` statistics over the region's grid plus random samples.
pub fn residual_sweep(e: &Expr, r: &Region) -> Result<SweepStats> {
    sweep(e, r)
}
