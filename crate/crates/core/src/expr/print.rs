use std::fmt;

use super::{BinaryOp, Expr, UnaryOp};

const PREC_SUM: u8 = 1;
const PREC_PRODUCT: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Const(c) if c.is_sign_negative() && *c != 0.0 => PREC_NEG,
        Expr::Const(_) | Expr::Var(_) => PREC_ATOM,
        Expr::Unary(UnaryOp::Neg, _) => PREC_NEG,
        Expr::Unary(..) => PREC_ATOM,
        Expr::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => PREC_SUM,
        Expr::Binary(BinaryOp::Mul | BinaryOp::Div, ..) => PREC_PRODUCT,
        Expr::Binary(BinaryOp::Pow, ..) => PREC_POW,
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

/// Prints the canonical text form. The output re-parses to a structurally
/// equal tree: parentheses are inserted exactly where precedence or
/// associativity would otherwise change the shape.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => {
                if *c == 0.0 {
                    write!(f, "0")
                } else {
                    write!(f, "{c}")
                }
            }
            Expr::Var(v) => f.write_str(v.name()),
            Expr::Unary(UnaryOp::Neg, a) => {
                f.write_str("-")?;
                // `-2` would re-parse as the literal -2, not a negation node.
                let parens = precedence(a) < PREC_NEG || matches!(**a, Expr::Const(c) if c >= 0.0);
                write_child(f, a, parens)
            }
            Expr::Unary(op, a) => write!(f, "{}({a})", op.name().unwrap_or("?")),
            Expr::Binary(op, a, b) => {
                let (symbol, prec) = match op {
                    BinaryOp::Add => (" + ", PREC_SUM),
                    BinaryOp::Sub => (" - ", PREC_SUM),
                    BinaryOp::Mul => ("*", PREC_PRODUCT),
                    BinaryOp::Div => ("/", PREC_PRODUCT),
                    BinaryOp::Pow => ("^", PREC_POW),
                };
                if *op == BinaryOp::Pow {
                    write_child(f, a, precedence(a) <= PREC_POW)?;
                    f.write_str(symbol)?;
                    write_child(f, b, precedence(b) < PREC_NEG)
                } else {
                    write_child(f, a, precedence(a) < prec)?;
                    f.write_str(symbol)?;
                    write_child(f, b, precedence(b) <= prec)
                }
            }
        }
    }
}
