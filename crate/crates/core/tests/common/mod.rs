#![allow(dead_code)]

use odesurface::{parse, Expr, Region};

pub const LAMBERT_PHI: &str = "(lambert_w(exp(-u-1)) + 1)/(1 - x)";
pub const LAMBERT_F: &str = "lambert_w(exp(-u-1))/(1 - x)";

/// The seven `(phi, eps)` pairs with a region on which both are defined.
pub fn matrix() -> Vec<(&'static str, &'static str, Region)> {
    let rect = |a, b, c, d| Region::rect(a, b, c, d).unwrap();
    vec![
        ("u^2", "0", rect(-1.0, 1.0, 1.0, 2.0)),
        ("(1 - 3*x*u)/x^2", "0", rect(1.0, 2.0, -1.0, 1.0)),
        (LAMBERT_PHI, "0", rect(2.0, 3.0, -1.0, 1.0)),
        ("-1 + sqrt(1 - (x + u)^2)", "0", rect(-0.3, 0.3, -0.3, 0.3)),
        ("-1 + sqrt(1 + (x + u)^2)", "0", rect(-0.3, 0.3, -0.3, 0.3)),
        ("u^2", "ln((1/u^2)*sin(1/u))", rect(0.0, 1.0, 0.35, 0.9)),
        ("(1 - 3*x*u)/x^2", "x + 3*ln(x)", rect(1.0, 2.0, -1.0, 1.0)),
    ]
}

pub fn p(text: &str) -> Expr {
    parse(text).unwrap()
}

/// `max |e|` over the points where it evaluates.
pub fn max_abs(e: &Expr, pts: &[(f64, f64)]) -> f64 {
    pts.iter()
        .filter_map(|&(x, u)| e.eval(x, u).ok())
        .fold(0.0, |m, v| m.max(v.abs()))
}
