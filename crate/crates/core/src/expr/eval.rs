use std::f64::consts::PI;

use super::lambert::lambert_w0;
use super::{BinaryOp, Expr, UnaryOp, Var};
use crate::error::DomainError;

fn finite(v: f64, reason: &'static str) -> Result<f64, DomainError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(DomainError::new(reason))
    }
}

pub(crate) fn apply_unary(op: UnaryOp, a: f64) -> Result<f64, DomainError> {
    let v = match op {
        UnaryOp::Neg => -a,
        UnaryOp::Sin => a.sin(),
        UnaryOp::Cos => a.cos(),
        UnaryOp::Tan => {
            let c = a.cos();
            if c == 0.0 {
                return Err(DomainError::new("tan at a pole"));
            }
            a.sin() / c
        }
        UnaryOp::Cot => {
            let k = (a / PI).round();
            if (a - k * PI).abs() <= 4.0 * f64::EPSILON * a.abs().max(1.0) {
                return Err(DomainError::new("cot at a multiple of pi"));
            }
            a.cos() / a.sin()
        }
        UnaryOp::Sinh => a.sinh(),
        UnaryOp::Cosh => a.cosh(),
        UnaryOp::Tanh => a.tanh(),
        UnaryOp::Exp => a.exp(),
        UnaryOp::Ln => {
            if a <= 0.0 {
                return Err(DomainError::new("ln of a non-positive value"));
            }
            a.ln()
        }
        UnaryOp::Sqrt => {
            if a < 0.0 {
                return Err(DomainError::new("sqrt of a negative value"));
            }
            a.sqrt()
        }
        UnaryOp::LambertW => lambert_w0(a)?,
    };
    finite(v, "non-finite intermediate value")
}

pub(crate) fn apply_binary(op: BinaryOp, a: f64, b: f64) -> Result<f64, DomainError> {
    let v = match op {
        BinaryOp::Add => a + b,
        BinaryOp::Sub => a - b,
        BinaryOp::Mul => a * b,
        BinaryOp::Div => {
            if b == 0.0 {
                return Err(DomainError::new("division by zero"));
            }
            a / b
        }
        BinaryOp::Pow => pow(a, b)?,
    };
    finite(v, "non-finite intermediate value")
}

fn pow(base: f64, exponent: f64) -> Result<f64, DomainError> {
    let integral = exponent.fract() == 0.0;
    if base == 0.0 && exponent < 0.0 {
        return Err(DomainError::new("zero raised to a negative power"));
    }
    if base < 0.0 && !integral {
        return Err(DomainError::new("negative base with non-integer exponent"));
    }
    if integral && exponent.abs() <= 64.0 {
        Ok(base.powi(exponent as i32))
    } else {
        Ok(base.powf(exponent))
    }
}

impl Expr {
    /// Evaluate at `(x, u)` in double precision.
    pub fn eval(&self, x: f64, u: f64) -> Result<f64, DomainError> {
        match self {
            Expr::Const(c) => Ok(*c),
            Expr::Var(Var::X) => Ok(x),
            Expr::Var(Var::U) => Ok(u),
            Expr::Unary(op, a) => apply_unary(*op, a.eval(x, u)?),
            Expr::Binary(op, a, b) => apply_binary(*op, a.eval(x, u)?, b.eval(x, u)?),
        }
    }
}
