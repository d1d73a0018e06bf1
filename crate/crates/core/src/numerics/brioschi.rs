use nalgebra::Matrix3;

use crate::error::{DomainError, Error, Result};
use crate::expr::Expr;
use crate::surface::SurfaceData;

/// Default stencil spacing for [`brioschi_curvature`].
pub const DEFAULT_BRIOSCHI_STEP: f64 = 1e-3;

struct Metric<'a> {
    e: &'a Expr,
    f: &'a Expr,
    g: &'a Expr,
}

impl Metric<'_> {
    fn at(&self, x: f64, u: f64) -> Result<[f64; 3], DomainError> {
        Ok([self.e.eval(x, u)?, self.f.eval(x, u)?, self.g.eval(x, u)?])
    }
}

/// Gaussian curvature from the Brioschi formula with central differences of
/// spacing `h` on the 9-point stencil around `(x, u)`. Error is `O(h^2)`.
///
/// Coordinates are `(x, u)` in the roles of the classical `(u, v)`.
pub fn brioschi_raw(e: &Expr, f: &Expr, g: &Expr, x: f64, u: f64, h: f64) -> Result<f64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("stencil spacing must be positive, got {h}")));
    }
    let m = Metric { e, f, g };
    let at = |i: i32, j: i32| {
        m.at(x + i as f64 * h, u + j as f64 * h)
            .map_err(|source| Error::StencilLeftDomain { x, u, source })
    };
    let c = at(0, 0)?;
    let (xp, xm, up, um) = (at(1, 0)?, at(-1, 0)?, at(0, 1)?, at(0, -1)?);
    let (pp, pm, mp, mm) = (at(1, 1)?, at(1, -1)?, at(-1, 1)?, at(-1, -1)?);

    let d_x = |k: usize| (xp[k] - xm[k]) / (2.0 * h);
    let d_u = |k: usize| (up[k] - um[k]) / (2.0 * h);
    let (ee, ff, gg) = (c[0], c[1], c[2]);
    let (e_x, e_u) = (d_x(0), d_u(0));
    let (f_x, f_u) = (d_x(1), d_u(1));
    let (g_x, g_u) = (d_x(2), d_u(2));
    let e_uu = (up[0] - 2.0 * ee + um[0]) / (h * h);
    let g_xx = (xp[2] - 2.0 * gg + xm[2]) / (h * h);
    let f_xu = (pp[1] - pm[1] - mp[1] + mm[1]) / (4.0 * h * h);

    let m1 = Matrix3::new(
        -0.5 * e_uu + f_xu - 0.5 * g_xx,
        0.5 * e_x,
        f_x - 0.5 * e_u,
        f_u - 0.5 * g_x,
        ee,
        ff,
        0.5 * g_u,
        ff,
        gg,
    );
    let m2 = Matrix3::new(0.0, 0.5 * e_u, 0.5 * g_x, 0.5 * e_u, ee, ff, 0.5 * g_x, ff, gg);
    let det = ee * gg - ff * ff;
    Ok((m1.determinant() - m2.determinant()) / (det * det))
}

/// Brioschi curvature of `s` at `(x, u)`, Richardson-extrapolated from
/// spacings `h` and `h/2` to cancel the leading `O(h^2)` term.
pub fn brioschi_curvature(s: &SurfaceData, x: f64, u: f64, h: f64) -> Result<f64> {
    let coarse = brioschi_raw(&s.e, &s.f, &s.g, x, u, h)?;
    let fine = brioschi_raw(&s.e, &s.f, &s.g, x, u, 0.5 * h)?;
    Ok((4.0 * fine - coarse) / 3.0)
}
