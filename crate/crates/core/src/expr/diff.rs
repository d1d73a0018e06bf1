use super::{simplify, BinaryOp, Expr, UnaryOp, Var};

/// Exact partial derivative with respect to `v`, simplified.
///
/// Lambert W uses `d/dv W(g) = g' / (e^{W(g)} (1 + W(g)))`.
pub fn diff(e: &Expr, v: Var) -> Expr {
    simplify(&raw(e, v))
}

fn raw(e: &Expr, v: Var) -> Expr {
    match e {
        Expr::Const(_) => Expr::zero(),
        Expr::Var(w) => {
            if *w == v {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Expr::Unary(op, a) => {
            if !a.depends_on(v) {
                return Expr::zero();
            }
            let da = raw(a, v);
            let a = (**a).clone();
            let outer = match op {
                UnaryOp::Neg => return -da,
                UnaryOp::Sin => a.cos(),
                UnaryOp::Cos => -a.sin(),
                UnaryOp::Tan => 1.0 / a.cos().pow(2.0),
                UnaryOp::Cot => -1.0 / a.sin().pow(2.0),
                UnaryOp::Sinh => a.cosh(),
                UnaryOp::Cosh => a.sinh(),
                UnaryOp::Tanh => 1.0 - Expr::unary(UnaryOp::Tanh, a).pow(2.0),
                UnaryOp::Exp => a.exp(),
                UnaryOp::Ln => 1.0 / a,
                UnaryOp::Sqrt => 1.0 / (2.0 * a.sqrt()),
                UnaryOp::LambertW => {
                    let w = a.lambert_w();
                    1.0 / (w.exp() * (1.0 + w))
                }
            };
            outer * da
        }
        Expr::Binary(op, a, b) => {
            let (a, b) = (&**a, &**b);
            match op {
                BinaryOp::Add => raw(a, v) + raw(b, v),
                BinaryOp::Sub => raw(a, v) - raw(b, v),
                BinaryOp::Mul => raw(a, v) * b + a * raw(b, v),
                BinaryOp::Div => (raw(a, v) * b - a * raw(b, v)) / b.pow(2.0),
                BinaryOp::Pow => {
                    let base_varies = a.depends_on(v);
                    let exp_varies = b.depends_on(v);
                    match (base_varies, exp_varies) {
                        (false, false) => Expr::zero(),
                        (true, false) => b * a.pow(b - 1.0) * raw(a, v),
                        (false, true) => a.pow(b) * a.ln() * raw(b, v),
                        (true, true) => a.pow(b) * (raw(b, v) * a.ln() + b * raw(a, v) / a),
                    }
                }
            }
        }
    }
}
