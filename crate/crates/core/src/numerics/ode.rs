use super::{Method, Sample, Trajectory};
use crate::error::{DomainError, Error, Result};
use crate::expr::{diff, Var};
use crate::surface::{apply_a, OdeProblem};

/// Maximum number of local step halvings before giving up near a boundary.
pub const MAX_HALVINGS: u32 = 12;

/// Pregeodesic integration aborts once `|u'|` exceeds this.
pub const SLOPE_BLOWUP: f64 = 1e6;

type Rhs<'a, const N: usize> = dyn Fn(f64, [f64; N]) -> Result<[f64; N], DomainError> + 'a;

fn axpy<const N: usize>(y: [f64; N], h: f64, k: [f64; N]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * k[i])
}

fn rk4_step<const N: usize>(f: &Rhs<'_, N>, x: f64, y: [f64; N], h: f64) -> Result<[f64; N], DomainError> {
    let k1 = f(x, y)?;
    let k2 = f(x + 0.5 * h, axpy(y, 0.5 * h, k1))?;
    let k3 = f(x + 0.5 * h, axpy(y, 0.5 * h, k2))?;
    let k4 = f(x + h, axpy(y, h, k3))?;
    let next: [f64; N] = std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
    if next.iter().any(|v| !v.is_finite()) {
        return Err(DomainError::new("non-finite state"));
    }
    // the end point itself must be evaluable
    f(x + h, next)?;
    Ok(next)
}

/// Advance from `x` to `x + h`, splitting the interval in halves when a
/// stage hits a domain error.
fn advance<const N: usize>(f: &Rhs<'_, N>, x: f64, y: [f64; N], h: f64, depth: u32) -> Result<[f64; N], DomainError> {
    match rk4_step(f, x, y, h) {
        Ok(next) => Ok(next),
        Err(_) if depth < MAX_HALVINGS => {
            let mid = advance(f, x, y, 0.5 * h, depth + 1)?;
            advance(f, x + 0.5 * h, mid, 0.5 * h, depth + 1)
        }
        Err(e) => Err(e),
    }
}

fn integrate<const N: usize>(
    f: &Rhs<'_, N>,
    x0: f64,
    y0: [f64; N],
    x_end: f64,
    step: f64,
    method: Method,
    sample: impl Fn(f64, [f64; N]) -> Result<Sample, DomainError>,
    guard: impl Fn(&Sample) -> Option<&'static str>,
) -> Result<Trajectory> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
    }
    if !(x0.is_finite() && x_end.is_finite() && x_end > x0) {
        return Err(Error::InvalidArgument(format!("need x0 < x_end, got {x0} and {x_end}")));
    }
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("initial values must be finite".into()));
    }
    let first = sample(x0, y0)?;
    let mut traj = Trajectory {
        samples: vec![first],
        step,
        method,
    };
    let span = x_end - x0;
    let n = ((span / step) - 1e-9).ceil().max(1.0) as usize;
    let mut y = y0;
    let mut x = x0;
    for i in 1..=n {
        let x_next = if i == n { x_end } else { x0 + i as f64 * step };
        let next = advance(f, x, y, x_next - x, 0).and_then(|v| Ok((v, sample(x_next, v)?)));
        let (v, s) = match next {
            Ok(pair) => pair,
            Err(e) => {
                return Err(Error::LeftDomain {
                    x,
                    reason: e.reason.to_string(),
                    partial: Box::new(traj),
                })
            }
        };
        if let Some(reason) = guard(&s) {
            return Err(Error::LeftDomain {
                x,
                reason: reason.to_string(),
                partial: Box::new(traj),
            });
        }
        traj.samples.push(s);
        x = x_next;
        y = v;
    }
    Ok(traj)
}

/// Classic fixed-step RK4 on `u' = phi(x, u)` from `x0` to `x_end`.
///
/// The last step is shortened to land exactly on `x_end`. Steps that run
/// into a domain error are halved locally (up to [`MAX_HALVINGS`] times);
/// past that the integration stops with [`Error::LeftDomain`] carrying the
/// samples computed so far.
pub fn solve_ode(p: &OdeProblem, x0: f64, u0: f64, x_end: f64, step: f64) -> Result<Trajectory> {
    let phi = &p.phi;
    let f = |x: f64, y: [f64; 1]| Ok([phi.eval(x, y[0])?]);
    integrate(
        &f,
        x0,
        [u0],
        x_end,
        step,
        Method::Rk4Ode,
        |x, y| {
            Ok(Sample {
                x,
                u: y[0],
                uprime: phi.eval(x, y[0])?,
            })
        },
        |_| None,
    )
}

/// RK4 on the pregeodesic equation `u'' = A(phi) - phi_u (u' - phi)^3`
/// written as a system in `(u, u')`.
///
/// With `slope0 = phi(x0, u0)` this reproduces the solution through
/// `(x0, u0)`; other slopes trace geodesics that are not solutions.
pub fn solve_pregeodesic(p: &OdeProblem, x0: f64, u0: f64, slope0: f64, x_end: f64, step: f64) -> Result<Trajectory> {
    let phi = &p.phi;
    let a_phi = apply_a(phi, phi);
    let phi_u = diff(phi, Var::U);
    let f = |x: f64, y: [f64; 2]| {
        let [u, up] = y;
        let lag = up - phi.eval(x, u)?;
        Ok([up, a_phi.eval(x, u)? - phi_u.eval(x, u)? * lag * lag * lag])
    };
    integrate(
        &f,
        x0,
        [u0, slope0],
        x_end,
        step,
        Method::Rk4Pregeodesic,
        |x, y| {
            Ok(Sample {
                x,
                u: y[0],
                uprime: y[1],
            })
        },
        |s| (s.uprime.abs() > SLOPE_BLOWUP).then_some("slope blow-up"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Region};

    fn problem(phi: &str) -> OdeProblem {
        OdeProblem::new(parse(phi).unwrap(), Region::rect(-1.0, 1.0, -1.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn riccati_blowup_solution() {
        let t = solve_ode(&problem("u^2"), 0.0, 1.0, 0.5, 1e-3).unwrap();
        let last = t.last().unwrap();
        assert_eq!(last.x, 0.5);
        assert!((last.u - 2.0).abs() < 1e-8);
        assert!(t.samples.windows(2).all(|w| w[0].x < w[1].x));
    }

    #[test]
    fn direct_quadrature() {
        let t = solve_ode(&problem("sin(x)"), 0.0, 0.0, 2.0, 1e-2).unwrap();
        for s in &t.samples {
            assert!((s.u - (1.0 - s.x.cos())).abs() < 1e-9);
        }
    }

    #[test]
    fn uneven_final_step() {
        let t = solve_ode(&problem("x"), 0.0, 0.0, 1.0, 0.3).unwrap();
        let xs: Vec<f64> = t.samples.iter().map(|s| s.x).collect();
        assert_eq!(xs.len(), 5);
        assert_eq!(*xs.last().unwrap(), 1.0);
    }

    #[test]
    fn leaving_the_domain() {
        let err = solve_ode(&problem("sqrt(1 - x)"), 0.0, 1.0, 2.0, 1e-2).unwrap_err();
        match err {
            Error::LeftDomain { x, partial, .. } => {
                assert!(x > 0.9 && x <= 1.0, "{x}");
                assert!(!partial.samples.is_empty());
                assert_eq!(partial.samples.last().unwrap().x, x);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_arguments() {
        assert!(matches!(solve_ode(&problem("u"), 0.0, 1.0, 1.0, 0.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(solve_ode(&problem("u"), 1.0, 1.0, 0.0, 0.1), Err(Error::InvalidArgument(_))));
        let p = OdeProblem::new(parse("ln(u)").unwrap(), Region::rect(0.0, 1.0, 1.0, 2.0).unwrap()).unwrap();
        assert!(matches!(solve_ode(&p, 0.0, -1.0, 1.0, 0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn pregeodesic_matches_solution() {
        let p = problem("u^2");
        let a = solve_ode(&p, 0.0, 1.0, 0.5, 1e-3).unwrap();
        let b = solve_pregeodesic(&p, 0.0, 1.0, 1.0, 0.5, 1e-3).unwrap();
        for (s, t) in a.samples.iter().zip(&b.samples) {
            assert!((s.u - t.u).abs() < 1e-6);
        }
    }

    #[test]
    fn geodesic_that_is_not_a_solution() {
        let t = solve_pregeodesic(&problem("sin(x)"), 0.0, -1.0, 1.0, 2.0, 1e-3).unwrap();
        for s in &t.samples {
            assert!((s.u - (s.x - s.x.cos())).abs() < 1e-6);
        }
    }
}
