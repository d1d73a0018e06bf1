//! Curvature-based integrability analysis for first-order ODEs `u' = phi(x, u)`.
//!
//! Every such equation carries a Riemannian metric on its domain for which
//! the solution curves are geodesics. Deforming that metric by a function
//! `epsilon(x, u)` and reading off the Gaussian curvature gives a route to
//! integrating factors and first integrals:
//!
//! - [`expr`]: parse, evaluate, differentiate and simplify expressions in `x`, `u`;
//! - [`surface`]: metric components, `Delta_eps` and curvature `K_eps`;
//! - [`integrability`]: the operators `T_eps`/`S_eps`, symmetry checks, flat
//!   and constant-curvature integration;
//! - [`numerics`]: RK4 trajectories, pregeodesics, Brioschi curvature and sweeps;
//! - [`cli`]: the `odesurface` command-line front end.

pub mod cli;
pub mod error;
pub mod expr;
pub mod integrability;
pub mod json;
pub mod numerics;
pub mod surface;

pub use error::{DomainError, Error, Result};
pub use expr::{diff, is_numerically_zero, parse, simplify, Expr, Region, Var};
