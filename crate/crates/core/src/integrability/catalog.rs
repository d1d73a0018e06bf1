//! Antiderivatives in `x` for a small catalog of shapes: polynomials,
//! `c (x - a)^(-n)`, `c e^(a x)` and `c1 sin(a x) + c2 cos(a x)`.
//!
//! Parameters are estimated numerically from values and derivatives,
//! snapped to nearby small rationals, and the candidate is accepted only
//! when its derivative reproduces the integrand on the whole region.

use nalgebra::{DMatrix, DVector};

use crate::expr::{diff, simplify, BinaryOp, Expr, Region, UnaryOp, Var};

const SAMPLES: usize = 16;
const MAX_DENOMINATOR: i64 = 12;
const MAX_POLE_ORDER: i32 = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogMatch {
    pub family: &'static str,
    pub antiderivative: Expr,
}

/// `v` replaced by the nearest `p/q` with `q <= 12` when within
/// `tol max(1, |v|)`, else `v` unchanged.
pub fn snap_rational(v: f64, tol: f64) -> f64 {
    for q in 1..=MAX_DENOMINATOR {
        let p = (v * q as f64).round();
        let cand = p / q as f64;
        if (v - cand).abs() <= tol * v.abs().max(1.0) {
            return cand;
        }
    }
    v
}

/// Antiderivative in `x` of `g`, which must not depend on `u` in value;
/// it is sampled along `u = u_ref`. Returns `None` when no catalog shape
/// reproduces `g` within `tol (1 + max |g|)` on the region.
pub fn antiderivative(g: &Expr, r: &Region, u_ref: f64, tol: f64) -> Option<CatalogMatch> {
    let g = simplify(g);
    let xs: Vec<f64> = (0..SAMPLES)
        .map(|i| r.x_min + r.width() * (i as f64 + 0.5) / SAMPLES as f64)
        .collect();
    let ys: Vec<f64> = xs.iter().map(|&x| g.eval(x, u_ref).ok()).collect::<Option<_>>()?;

    let candidates = [
        polynomial(&g, &xs, &ys, tol),
        pole(&g, r, u_ref, tol),
        exponential(&g, r, u_ref, tol),
        trigonometric(&g, &xs, &ys, u_ref, tol),
    ];
    candidates
        .into_iter()
        .flatten()
        .flatten()
        .find(|m| verify(&m.antiderivative, &g, r, tol))
}

fn verify(psi: &Expr, g: &Expr, r: &Region, tol: f64) -> bool {
    let check = simplify(&(diff(psi, Var::X) - g));
    let (mut worst, mut scale, mut evaluated, mut total) = (0.0f64, 0.0f64, 0, 0);
    for (x, u) in r.sample_points() {
        total += 1;
        if let (Ok(d), Ok(v)) = (check.eval(x, u), g.eval(x, u)) {
            evaluated += 1;
            worst = worst.max(d.abs());
            scale = scale.max(v.abs());
        }
    }
    2 * evaluated >= total && worst <= tol * (1.0 + scale)
}

fn scaled_x(a: f64) -> Expr {
    if a == 1.0 {
        Expr::x()
    } else {
        a * Expr::x()
    }
}

/// Degree in `x` when `e` is a polynomial in `x`.
fn poly_degree(e: &Expr) -> Option<u32> {
    match e {
        Expr::Const(_) => Some(0),
        Expr::Var(Var::X) => Some(1),
        Expr::Var(Var::U) => None,
        Expr::Unary(UnaryOp::Neg, a) => poly_degree(a),
        Expr::Unary(..) => None,
        Expr::Binary(op, a, b) => match op {
            BinaryOp::Add | BinaryOp::Sub => Some(poly_degree(a)?.max(poly_degree(b)?)),
            BinaryOp::Mul => Some(poly_degree(a)? + poly_degree(b)?),
            BinaryOp::Div => match b.as_const() {
                Some(c) if c != 0.0 => poly_degree(a),
                _ => None,
            },
            BinaryOp::Pow => {
                let n = b.as_const()?;
                (n >= 0.0 && n.fract() == 0.0 && n <= 16.0).then_some(poly_degree(a)? * n as u32)
            }
        },
    }
}

fn least_squares(columns: &[Vec<f64>], ys: &[f64]) -> Option<Vec<f64>> {
    let m = DMatrix::from_fn(ys.len(), columns.len(), |i, j| columns[j][i]);
    let b = DVector::from_column_slice(ys);
    let sol = m.svd(true, true).solve(&b, 1e-14).ok()?;
    Some(sol.iter().copied().collect())
}

fn polynomial(g: &Expr, xs: &[f64], ys: &[f64], tol: f64) -> Option<Option<CatalogMatch>> {
    let degree = poly_degree(g)? as i32;
    if degree as usize >= xs.len() {
        return None;
    }
    let columns: Vec<Vec<f64>> = (0..=degree).map(|k| xs.iter().map(|x| x.powi(k)).collect()).collect();
    let coefs = least_squares(&columns, ys)?;
    let mut psi = Expr::zero();
    for (k, c) in coefs.into_iter().enumerate() {
        let c = snap_rational(c, tol);
        if c != 0.0 {
            let k = k as f64;
            psi = psi + (c / (k + 1.0)) * Expr::x().pow(k + 1.0);
        }
    }
    Some(Some(CatalogMatch {
        family: "polynomial",
        antiderivative: simplify(&psi),
    }))
}

fn pole(g: &Expr, r: &Region, u_ref: f64, tol: f64) -> Option<Option<CatalogMatch>> {
    let dg = diff(g, Var::X);
    let (xc, _) = r.center();
    let (v, dv) = (g.eval(xc, u_ref).ok()?, dg.eval(xc, u_ref).ok()?);
    if v == 0.0 || dv == 0.0 {
        return None;
    }
    for n in 1..=MAX_POLE_ORDER {
        let a = snap_rational(xc + n as f64 * v / dv, tol);
        let below = a < r.x_min;
        if !(below || a > r.x_max) {
            continue;
        }
        let c = snap_rational(v * (xc - a).powi(n), tol);
        let psi = if n == 1 {
            // the logarithm needs the positive one of (x - a), (a - x)
            let base = if below { Expr::x() - a } else { a - Expr::x() };
            c * base.ln()
        } else {
            // c (x - a)^(1-n) / (1 - n), flipping the base to keep the
            // coefficient positive when the exponent is odd
            let coef = c / (1 - n) as f64;
            if coef < 0.0 && n % 2 == 0 {
                -coef * (a - Expr::x()).pow((1 - n) as f64)
            } else {
                coef * (Expr::x() - a).pow((1 - n) as f64)
            }
        };
        let cand = CatalogMatch {
            family: "pole",
            antiderivative: simplify(&psi),
        };
        if verify(&cand.antiderivative, g, r, tol) {
            return Some(Some(cand));
        }
    }
    Some(None)
}

fn exponential(g: &Expr, r: &Region, u_ref: f64, tol: f64) -> Option<Option<CatalogMatch>> {
    let dg = diff(g, Var::X);
    let (xc, _) = r.center();
    let (v, dv) = (g.eval(xc, u_ref).ok()?, dg.eval(xc, u_ref).ok()?);
    if v == 0.0 {
        return None;
    }
    let a = snap_rational(dv / v, tol);
    if a == 0.0 {
        return None;
    }
    let c = snap_rational(v / (a * xc).exp(), tol);
    Some(Some(CatalogMatch {
        family: "exponential",
        antiderivative: simplify(&((c / a) * scaled_x(a).exp())),
    }))
}

fn trigonometric(g: &Expr, xs: &[f64], ys: &[f64], u_ref: f64, tol: f64) -> Option<Option<CatalogMatch>> {
    let d2 = diff(&diff(g, Var::X), Var::X);
    let (i, _) = ys
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))?;
    if ys[i] == 0.0 {
        return None;
    }
    let a2 = -d2.eval(xs[i], u_ref).ok()? / ys[i];
    if !(a2 > 0.0) {
        return None;
    }
    let a = snap_rational(a2.sqrt(), tol);
    let sin_col: Vec<f64> = xs.iter().map(|x| (a * x).sin()).collect();
    let cos_col: Vec<f64> = xs.iter().map(|x| (a * x).cos()).collect();
    let c = least_squares(&[sin_col, cos_col], ys)?;
    let (c1, c2) = (snap_rational(c[0], tol), snap_rational(c[1], tol));
    let ax = scaled_x(a);
    let psi = (-c1 / a) * ax.cos() + (c2 / a) * ax.sin();
    Some(Some(CatalogMatch {
        family: "trigonometric",
        antiderivative: simplify(&psi),
    }))
}
