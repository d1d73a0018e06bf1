//! Property tests over randomly generated expressions and problems.

mod common;

use common::{matrix, p};
use odesurface::expr::sweep;
use odesurface::integrability::{
    closedness_residual, constant_curvature_integrating_factor, factorization_check, lie_symmetry_check, Branch,
    SymmetryVerdict, Tolerances, VectorFieldXY,
};
use odesurface::numerics::{brioschi_curvature, solve_ode, DEFAULT_BRIOSCHI_STEP};
use odesurface::surface::{build_surface, curvature, delta_eps, Deformation, OdeProblem};
use odesurface::{diff, is_numerically_zero, parse, simplify, Expr, Region, Var};
use proptest::prelude::*;

/// Expressions that evaluate everywhere in `[-2, 2]^2` and stay moderate.
fn smooth_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        Just(Expr::x()),
        Just(Expr::u()),
        (-3i32..=3).prop_map(|n| Expr::num(n as f64)),
        (-20i32..=20).prop_map(|n| Expr::num(n as f64 / 8.0)),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            inner.clone().prop_map(|a| -a),
            inner.clone().prop_map(|a| a.sin()),
            inner.clone().prop_map(|a| a.cos()),
            inner.clone().prop_map(|a| a.sin().exp()),
            (inner.clone(), 0u32..=3).prop_map(|(a, n)| a.pow(n as f64)),
            (inner.clone(), inner).prop_map(|(a, b)| a / (b.pow(2.0) + 1.0)),
        ]
    })
}

fn point() -> impl Strategy<Value = (f64, f64)> {
    (-1.5f64..1.5, -1.5f64..1.5)
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn print_parse_round_trip(e in smooth_expr(), (x, u) in point()) {
        let printed = e.to_string();
        let back = parse(&printed).unwrap();
        prop_assert_eq!(back.to_string(), printed.clone());
        prop_assert!(close(back.eval(x, u).unwrap(), e.eval(x, u).unwrap(), 1e-12), "{}", printed);
    }

    #[test]
    fn simplify_preserves_values(e in smooth_expr(), (x, u) in point()) {
        let s = simplify(&e);
        let (a, b) = (e.eval(x, u).unwrap(), s.eval(x, u).unwrap());
        prop_assert!(close(a, b, 1e-9), "{} -> {}: {} vs {}", e, s, a, b);
        prop_assert_eq!(simplify(&s), s.clone());
    }

    #[test]
    fn diff_is_linear(e1 in smooth_expr(), e2 in smooth_expr(), a in -3.0f64..3.0, b in -3.0f64..3.0, (x, u) in point()) {
        for v in [Var::X, Var::U] {
            let lhs = diff(&(a * &e1 + b * &e2), v).eval(x, u).unwrap();
            let rhs = a * diff(&e1, v).eval(x, u).unwrap() + b * diff(&e2, v).eval(x, u).unwrap();
            prop_assert!(close(lhs, rhs, 1e-9));
        }
    }

    #[test]
    fn diff_matches_finite_differences(e in smooth_expr(), (x, u) in point()) {
        let h = 1e-5;
        let dx = (e.eval(x + h, u).unwrap() - e.eval(x - h, u).unwrap()) / (2.0 * h);
        let du = (e.eval(x, u + h).unwrap() - e.eval(x, u - h).unwrap()) / (2.0 * h);
        let scale = 1.0 + e.eval(x, u).unwrap().abs();
        prop_assert!((diff(&e, Var::X).eval(x, u).unwrap() - dx).abs() <= 1e-4 * scale * (1.0 + dx.abs()));
        prop_assert!((diff(&e, Var::U).eval(x, u).unwrap() - du).abs() <= 1e-4 * scale * (1.0 + du.abs()));
    }
}

/// Low-degree polynomials with small coefficients.
fn small_poly() -> impl Strategy<Value = Expr> {
    proptest::collection::vec(-10i32..=10, 6).prop_map(|c| {
        let c: Vec<f64> = c.into_iter().map(|n| n as f64 / 10.0).collect();
        let (x, u) = (Expr::x(), Expr::u());
        c[0] + c[1] * &x + c[2] * &u + c[3] * (&x * &u) + c[4] * u.pow(2.0) + c[5] * x.pow(2.0)
    })
}

fn unit_square() -> Region {
    Region::new(-0.5, 0.5, -0.5, 0.5, 9, 7).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn coframe_reproduces_metric(phi in small_poly(), eps in small_poly()) {
        let r = unit_square();
        let s = build_surface(&OdeProblem::new(phi.clone(), r).unwrap(), &Deformation::new(eps.clone())).unwrap();
        for (x, u) in r.interior_points(4) {
            // w1 = dx, w2 = e^eps (-phi dx + du)
            let (f, w) = (phi.eval(x, u).unwrap(), eps.eval(x, u).unwrap().exp());
            let (a, b) = (-w * f, w);
            let (e_v, f_v, g_v) = (s.e.eval(x, u).unwrap(), s.f.eval(x, u).unwrap(), s.g.eval(x, u).unwrap());
            prop_assert!(close(e_v, 1.0 + a * a, 1e-12));
            prop_assert!(close(f_v, a * b, 1e-12));
            prop_assert!(close(g_v, b * b, 1e-12));
        }
    }

    #[test]
    fn brioschi_agrees_with_symbolic_curvature(phi in small_poly(), eps in small_poly()) {
        let r = unit_square();
        let s = build_surface(&OdeProblem::new(phi, r).unwrap(), &Deformation::new(eps)).unwrap();
        for (x, u) in r.interior_points(3) {
            let k = s.curvature.eval(x, u).unwrap();
            let kb = brioschi_curvature(&s, x, u, DEFAULT_BRIOSCHI_STEP).unwrap();
            prop_assert!((k - kb).abs() <= 1e-4 * (1.0 + k.abs()), "K = {k}, Brioschi = {kb} at ({x}, {u})");
        }
    }

    #[test]
    fn factorization_holds_for_random_pairs(phi in small_poly(), eps in small_poly(), h in small_poly()) {
        let r = unit_square();
        let check = factorization_check(&phi, &eps, &h);
        let scale = 1.0 + sweep(&curvature(&phi, &eps), &r).unwrap().max_abs;
        let ev = is_numerically_zero(&check, &r, 1e-9 * scale).unwrap();
        prop_assert!(ev.is_zero, "residual {} at {:?}", ev.max_abs, ev.argmax);
    }

    /// Problems built from `F = a(x) u + b(x)` with `a > 0` have the
    /// integrating factor `mu = a`; `eps = ln mu` lands on the flat,
    /// vanishing-S branch whose symmetrizing factor is `1/mu`.
    #[test]
    fn symmetrizing_factor_duality(c in -1.0f64..1.0, b in small_poly()) {
        let b = simplify(&b.substitute(Var::U, &Expr::num(0.0)));
        let a = (c * Expr::x()).exp();
        let phi = simplify(&(-(Expr::u() * diff(&a, Var::X) + diff(&b, Var::X)) / &a));
        let r = unit_square();
        let tol = Tolerances::default();
        let problem = OdeProblem::new(phi.clone(), r).unwrap();
        let rep = constant_curvature_integrating_factor(&problem, &Deformation::new(a.ln()), &tol).unwrap();
        prop_assert_eq!(rep.branch, Some(Branch::SVanishes));
        let delta = rep.delta_used.clone().unwrap();
        let tilde = simplify(&((-a.ln()).exp() * &delta));
        let v = VectorFieldXY::new(Expr::zero(), tilde.clone());
        match lie_symmetry_check(&phi, &v, &r, 1e-8).unwrap() {
            SymmetryVerdict::IsSymmetry { rho, .. } => {
                prop_assert!(is_numerically_zero(&rho, &r, 1e-8).unwrap().is_zero, "rho = {}", rho);
            }
            SymmetryVerdict::NotSymmetry(ev) => prop_assert!(false, "not a symmetry: {}", ev.max_abs),
        }
        let res = closedness_residual(&phi, &simplify(&(Expr::one() / tilde)));
        prop_assert!(is_numerically_zero(&res, &r, 1e-8).unwrap().is_zero);
    }

    /// Deforming by the log of any positive integrating factor flattens
    /// the surface and kills `Delta_eps`.
    #[test]
    fn log_integrating_factor_closes(c in -1.0f64..1.0, b in small_poly(), k in 1i32..=3) {
        // F = e^{c x} u^k + b(x, 0) on u > 0: mu = F_u, phi = -F_x / F_u
        let r = Region::new(-0.5, 0.5, 0.5, 1.5, 9, 7).unwrap();
        let b = simplify(&b.substitute(Var::U, &Expr::num(0.0)));
        let f = (c * Expr::x()).exp() * Expr::u().pow(k as f64) + b;
        let (fx, fu) = (diff(&f, Var::X), diff(&f, Var::U));
        let phi = simplify(&(-fx / &fu));
        let mu = simplify(&fu);
        prop_assert!(is_numerically_zero(&closedness_residual(&phi, &mu), &r, 1e-8).unwrap().is_zero);
        let eps = mu.ln();
        prop_assert!(is_numerically_zero(&delta_eps(&phi, &eps), &r, 1e-8).unwrap().is_zero);
        prop_assert!(is_numerically_zero(&curvature(&phi, &eps), &r, 1e-8).unwrap().is_zero);
    }
}

#[test]
fn factorization_over_test_matrix() {
    let hs = ["1", "x", "u", "sin(x)", "exp(x)"];
    for (phi, eps, r) in matrix() {
        let (phi, eps) = (p(phi), p(eps));
        let scale = 1.0 + sweep(&curvature(&phi, &eps), &r).unwrap().max_abs;
        for h in hs {
            let ev = is_numerically_zero(&factorization_check(&phi, &eps, &p(h)), &r, 1e-9 * scale).unwrap();
            assert!(ev.is_zero, "phi = {phi}, eps = {eps}, h = {h}: {}", ev.max_abs);
        }
    }
}

/// Halving the step divides the global RK4 error by about 16.
#[test]
fn rk4_is_fourth_order() {
    for (phi, exact) in [("u", "exp(x)"), ("cos(x) - u", "(sin(x) + cos(x))/2 + exp(-x)/2")] {
        let r = Region::rect(0.0, 2.0, -10.0, 10.0).unwrap();
        let problem = OdeProblem::new(p(phi), r).unwrap();
        let exact = p(exact);
        let u0 = exact.eval(0.0, 0.0).unwrap();
        let err = |h: f64| {
            let t = solve_ode(&problem, 0.0, u0, 1.0, h).unwrap();
            let last = t.last().unwrap();
            (last.u - exact.eval(last.x, 0.0).unwrap()).abs()
        };
        let ratio = err(0.1) / err(0.05);
        assert!((12.0..=20.0).contains(&ratio), "{phi}: ratio {ratio}");
    }
}
