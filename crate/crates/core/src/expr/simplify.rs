//! Normalizing simplifier.
//!
//! Sums are flattened into a list of `coefficient * monomial` terms plus a
//! constant; products are flattened into a coefficient and a list of
//! `base^exponent` factors. Like terms and like bases are merged, the lists
//! are sorted with [`Expr::canonical_cmp`] and the tree is rebuilt, so two
//! inputs that differ only by reordering or cancellation come out
//! structurally equal.
//!
//! Every rewrite agrees with the input wherever the input evaluates; some
//! rewrites (`a/a -> 1`, `exp(ln a) -> a`) enlarge the domain.

use std::cmp::Ordering;

use super::eval::{apply_binary, apply_unary};
use super::{BinaryOp, Expr, UnaryOp};

/// Upper bound on the number of terms produced when distributing a product
/// over sums.
const EXPAND_LIMIT: usize = 64;

#[derive(Debug, Clone)]
struct Factor {
    base: Expr,
    exp: Expr,
}

impl Factor {
    fn new(base: Expr, exp: Expr) -> Self {
        Self { base, exp }
    }

    fn cmp(&self, other: &Factor) -> Ordering {
        self.base
            .canonical_cmp(&other.base)
            .then_with(|| self.exp.canonical_cmp(&other.exp))
    }
}

#[derive(Debug, Clone)]
struct Term {
    coef: f64,
    factors: Vec<Factor>,
}

fn cmp_factor_lists(a: &[Factor], b: &[Factor]) -> Ordering {
    for (fa, fb) in a.iter().zip(b) {
        let o = fa.cmp(fb);
        if o != Ordering::Equal {
            return o;
        }
    }
    a.len().cmp(&b.len())
}

fn same_factors(a: &[Factor], b: &[Factor]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(fa, fb)| fa.base == fb.base && fa.exp == fb.exp)
}

/// Simplify `e` into its normal form.
pub fn simplify(e: &Expr) -> Expr {
    match e {
        Expr::Const(_) | Expr::Var(_) => e.clone(),
        Expr::Unary(op, a) => unary(*op, simplify(a)),
        Expr::Binary(op, a, b) => {
            let (a, b) = (simplify(a), simplify(b));
            match op {
                BinaryOp::Add => sum(vec![(1.0, a), (1.0, b)]),
                BinaryOp::Sub => sum(vec![(1.0, a), (-1.0, b)]),
                BinaryOp::Mul => product(1.0, vec![Factor::new(a, Expr::one()), Factor::new(b, Expr::one())]),
                BinaryOp::Div => product(1.0, vec![Factor::new(a, Expr::one()), Factor::new(b, Expr::num(-1.0))]),
                BinaryOp::Pow => power(a, b),
            }
        }
    }
}

fn fold_unary(op: UnaryOp, c: f64) -> Option<Expr> {
    apply_unary(op, c).ok().map(Expr::Const)
}

fn unary(op: UnaryOp, a: Expr) -> Expr {
    if let Expr::Const(c) = a {
        if let Some(folded) = fold_unary(op, c) {
            return folded;
        }
    }
    match op {
        UnaryOp::Neg => sum(vec![(-1.0, a)]),
        UnaryOp::Exp => product(1.0, vec![Factor::new(Expr::unary(UnaryOp::Exp, a), Expr::one())]),
        UnaryOp::Ln => match a {
            Expr::Unary(UnaryOp::Exp, inner) => (*inner).clone(),
            other => Expr::unary(UnaryOp::Ln, other),
        },
        _ => Expr::unary(op, a),
    }
}

fn power(base: Expr, exp: Expr) -> Expr {
    if let (Expr::Const(b), Expr::Const(e)) = (&base, &exp) {
        if let Ok(v) = apply_binary(BinaryOp::Pow, *b, *e) {
            return Expr::Const(v);
        }
    }
    product(1.0, vec![Factor::new(base, exp)])
}

fn mul_exprs(a: &Expr, b: &Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(1.0), _) => b.clone(),
        (_, Some(1.0)) => a.clone(),
        (Some(x), Some(y)) => Expr::Const(x * y),
        _ => product(1.0, vec![Factor::new(a.clone(), Expr::one()), Factor::new(b.clone(), Expr::one())]),
    }
}

fn is_integer(e: &Expr) -> bool {
    matches!(e, Expr::Const(c) if c.fract() == 0.0)
}

fn is_even_integer(e: &Expr) -> bool {
    matches!(e, Expr::Const(c) if (c / 2.0).fract() == 0.0)
}

fn is_product_shaped(e: &Expr) -> bool {
    matches!(
        e,
        Expr::Binary(BinaryOp::Mul | BinaryOp::Div, ..) | Expr::Unary(UnaryOp::Neg, _)
    )
}

fn is_sum_shaped(e: &Expr) -> bool {
    matches!(e, Expr::Binary(BinaryOp::Add | BinaryOp::Sub, ..))
}

// ---------------------------------------------------------------------------
// sums

/// Decompose an already-normalized expression into `coef * factors`.
fn collect_product(e: &Expr, exp: &Expr, coef: &mut f64, factors: &mut Vec<Factor>) {
    match e {
        Expr::Binary(BinaryOp::Mul, a, b) => {
            collect_product(a, exp, coef, factors);
            collect_product(b, exp, coef, factors);
        }
        Expr::Binary(BinaryOp::Div, a, b) => {
            collect_product(a, exp, coef, factors);
            let inv = negate(exp);
            collect_product(b, &inv, coef, factors);
        }
        Expr::Unary(UnaryOp::Neg, a) if is_integer(exp) => {
            if !is_even_integer(exp) {
                *coef = -*coef;
            }
            collect_product(a, exp, coef, factors);
        }
        Expr::Const(c) => match exp.as_const() {
            Some(k) => match apply_binary(BinaryOp::Pow, *c, k) {
                Ok(v) => *coef *= v,
                Err(_) => factors.push(Factor::new(e.clone(), exp.clone())),
            },
            None => factors.push(Factor::new(e.clone(), exp.clone())),
        },
        Expr::Binary(BinaryOp::Pow, b, inner) if is_integer(exp) => {
            factors.push(Factor::new((**b).clone(), mul_exprs(inner, exp)));
        }
        _ => factors.push(Factor::new(e.clone(), exp.clone())),
    }
}

fn negate(e: &Expr) -> Expr {
    match e {
        Expr::Const(c) => Expr::Const(-c),
        other => sum(vec![(-1.0, other.clone())]),
    }
}

fn term_of(e: &Expr) -> Term {
    let mut coef = 1.0;
    let mut factors = Vec::new();
    collect_product(e, &Expr::one(), &mut coef, &mut factors);
    factors.sort_by(Factor::cmp);
    Term { coef, factors }
}

fn collect_sum(e: &Expr, scale: f64, constant: &mut Vec<f64>, terms: &mut Vec<Term>) {
    match e {
        Expr::Const(c) => constant.push(scale * c),
        Expr::Binary(BinaryOp::Add, a, b) => {
            collect_sum(a, scale, constant, terms);
            collect_sum(b, scale, constant, terms);
        }
        Expr::Binary(BinaryOp::Sub, a, b) => {
            collect_sum(a, scale, constant, terms);
            collect_sum(b, -scale, constant, terms);
        }
        Expr::Unary(UnaryOp::Neg, a) => collect_sum(a, -scale, constant, terms),
        _ => {
            let mut t = term_of(e);
            t.coef *= scale;
            if t.coef != 0.0 {
                terms.push(t);
            }
        }
    }
}

/// Add up values, snapping pure cancellation noise to exactly zero.
fn cancel_sum(values: &[f64]) -> f64 {
    let total: f64 = values.iter().sum();
    let magnitude: f64 = values.iter().map(|v| v.abs()).sum();
    if total.abs() <= 8.0 * f64::EPSILON * magnitude {
        0.0
    } else {
        total
    }
}

fn sum(items: Vec<(f64, Expr)>) -> Expr {
    let mut constants = Vec::new();
    let mut raw_terms = Vec::new();
    for (scale, e) in &items {
        collect_sum(e, *scale, &mut constants, &mut raw_terms);
    }
    raw_terms.sort_by(|a, b| cmp_factor_lists(&a.factors, &b.factors));

    let mut terms: Vec<Term> = Vec::new();
    let mut i = 0;
    while i < raw_terms.len() {
        let mut j = i + 1;
        while j < raw_terms.len() && same_factors(&raw_terms[i].factors, &raw_terms[j].factors) {
            j += 1;
        }
        let coefs: Vec<f64> = raw_terms[i..j].iter().map(|t| t.coef).collect();
        let coef = cancel_sum(&coefs);
        if coef != 0.0 {
            terms.push(Term {
                coef,
                factors: raw_terms[i].factors.clone(),
            });
        }
        i = j;
    }
    build_sum(&terms, cancel_sum(&constants))
}

fn build_sum(terms: &[Term], constant: f64) -> Expr {
    let mut acc: Option<Expr> = None;
    for t in terms {
        acc = Some(match acc {
            None => build_term(t.coef, &t.factors),
            Some(prev) if t.coef < 0.0 => prev - build_term(-t.coef, &t.factors),
            Some(prev) => prev + build_term(t.coef, &t.factors),
        });
    }
    match acc {
        None => Expr::Const(constant + 0.0),
        Some(e) if constant == 0.0 => e,
        Some(e) if constant < 0.0 => e - Expr::Const(-constant),
        Some(e) => e + Expr::Const(constant),
    }
}

fn factor_expr(base: &Expr, exp: &Expr) -> Expr {
    if exp.is_one() {
        base.clone()
    } else {
        base.pow(exp.clone())
    }
}

fn left_product(items: impl IntoIterator<Item = Expr>) -> Option<Expr> {
    items.into_iter().reduce(|acc, e| acc * e)
}

/// Rebuild `coef * prod(factors)` with negative constant exponents moved to
/// a denominator.
fn build_term(coef: f64, factors: &[Factor]) -> Expr {
    let mut num = Vec::new();
    let mut den = Vec::new();
    for f in factors {
        match f.exp.as_const() {
            Some(k) if k < 0.0 => den.push(factor_expr(&f.base, &Expr::Const(-k))),
            _ => num.push(factor_expr(&f.base, &f.exp)),
        }
    }
    if num.is_empty() && den.is_empty() {
        return Expr::Const(coef);
    }
    let unit = coef == 1.0 || coef == -1.0;
    if !unit {
        num.insert(0, Expr::Const(coef));
    }
    let numerator = left_product(num).unwrap_or_else(Expr::one);
    let core = match left_product(den) {
        Some(d) => numerator / d,
        None => numerator,
    };
    if coef == -1.0 {
        Expr::unary(UnaryOp::Neg, core)
    } else {
        core
    }
}

// ---------------------------------------------------------------------------
// products

struct ProductAcc {
    coef: f64,
    factors: Vec<Factor>,
    exp_args: Vec<Expr>,
}

impl ProductAcc {
    fn push(&mut self, base: Expr, exp: Expr) {
        if exp.is_zero() {
            return;
        }
        match &base {
            Expr::Const(c) => {
                if *c == 1.0 {
                    return;
                }
                if let Some(k) = exp.as_const() {
                    if let Ok(v) = apply_binary(BinaryOp::Pow, *c, k) {
                        self.coef *= v;
                        return;
                    }
                }
                self.factors.push(Factor::new(base, exp));
            }
            b if is_product_shaped(b) && is_integer(&exp) => {
                let mut coef = 1.0;
                let mut inner = Vec::new();
                collect_product(b, &exp, &mut coef, &mut inner);
                self.coef *= coef;
                for f in inner {
                    self.push(f.base, f.exp);
                }
            }
            Expr::Binary(BinaryOp::Pow, b, inner)
                if is_integer(&exp) || (inner.as_const().is_some() && !is_even_integer(inner)) =>
            {
                let e = mul_exprs(inner, &exp);
                self.push((**b).clone(), e);
            }
            Expr::Unary(UnaryOp::Exp, arg) => self.exp_args.push(mul_exprs(arg, &exp)),
            _ => self.factors.push(Factor::new(base, exp)),
        }
    }

    /// Merge pending `exp(...)` factors into one and pull `c*ln(y)` terms
    /// out as `y^c`.
    fn settle_exponentials(&mut self) {
        while !self.exp_args.is_empty() {
            let args: Vec<(f64, Expr)> = self.exp_args.drain(..).map(|a| (1.0, a)).collect();
            let arg = sum(args);
            let mut constants = Vec::new();
            let mut terms = Vec::new();
            collect_sum(&arg, 1.0, &mut constants, &mut terms);
            let mut rest = Vec::new();
            let mut logs = Vec::new();
            for t in terms {
                match t.factors.as_slice() {
                    [Factor { base: Expr::Unary(UnaryOp::Ln, y), exp }] if exp.is_one() => {
                        logs.push(((**y).clone(), t.coef));
                    }
                    _ => rest.push(t),
                }
            }
            let constant = cancel_sum(&constants);
            if rest.is_empty() {
                let v = constant.exp();
                if v.is_finite() {
                    self.coef *= v;
                } else {
                    self.factors.push(Factor::new(Expr::unary(UnaryOp::Exp, Expr::Const(constant)), Expr::one()));
                }
            } else {
                let remaining = build_sum(&rest, constant);
                self.factors
                    .push(Factor::new(Expr::unary(UnaryOp::Exp, remaining), Expr::one()));
            }
            for (y, c) in logs {
                self.push(y, Expr::Const(c));
            }
        }
    }
}

fn product(coef: f64, input: Vec<Factor>) -> Expr {
    let mut acc = ProductAcc {
        coef,
        factors: Vec::new(),
        exp_args: Vec::new(),
    };
    for f in input {
        acc.push(f.base, f.exp);
    }
    acc.settle_exponentials();
    if acc.coef == 0.0 {
        return Expr::zero();
    }

    acc.factors.sort_by(Factor::cmp);
    let mut merged: Vec<Factor> = Vec::new();
    let mut needs_repass = false;
    let mut i = 0;
    while i < acc.factors.len() {
        let base = acc.factors[i].base.clone();
        let mut j = i;
        let mut exps = Vec::new();
        while j < acc.factors.len() && acc.factors[j].base == base {
            exps.push((1.0, acc.factors[j].exp.clone()));
            j += 1;
        }
        let exp = if exps.len() == 1 { exps.pop().unwrap().1 } else { sum(exps) };
        if j - i > 1 {
            needs_repass = true;
        }
        if !exp.is_zero() {
            merged.push(Factor::new(base, exp));
        }
        i = j;
    }
    if needs_repass && merged.iter().any(reducible) {
        return product(acc.coef, merged);
    }
    merged.sort_by(Factor::cmp);

    match expand(acc.coef, &merged) {
        Some(e) => e,
        None => build_term(acc.coef, &merged),
    }
}

/// Whether pushing this factor again would rewrite it.
fn reducible(f: &Factor) -> bool {
    match &f.base {
        Expr::Const(_) => f.exp.as_const().is_some(),
        Expr::Unary(UnaryOp::Exp, _) => true,
        b if is_product_shaped(b) => is_integer(&f.exp),
        Expr::Binary(BinaryOp::Pow, _, inner) => {
            is_integer(&f.exp) || (inner.as_const().is_some() && !is_even_integer(inner))
        }
        _ => false,
    }
}

/// Distribute the product over every factor that is a sum raised to the
/// first power, if the result stays small.
fn expand(coef: f64, factors: &[Factor]) -> Option<Expr> {
    let (sums, others): (Vec<&Factor>, Vec<&Factor>) =
        factors.iter().partition(|f| f.exp.is_one() && is_sum_shaped(&f.base));
    if sums.is_empty() {
        return None;
    }
    let mut expanded: Vec<(f64, Vec<Factor>)> = vec![(coef, others.into_iter().cloned().collect())];
    for s in sums {
        let mut constants = Vec::new();
        let mut terms = Vec::new();
        collect_sum(&s.base, 1.0, &mut constants, &mut terms);
        let constant = cancel_sum(&constants);
        if constant != 0.0 {
            terms.push(Term {
                coef: constant,
                factors: Vec::new(),
            });
        }
        if expanded.len() * terms.len() > EXPAND_LIMIT {
            return None;
        }
        let mut next = Vec::with_capacity(expanded.len() * terms.len());
        for (c, fs) in &expanded {
            for t in &terms {
                let mut combined = fs.clone();
                combined.extend(t.factors.iter().cloned());
                next.push((c * t.coef, combined));
            }
        }
        expanded = next;
    }
    let items = expanded
        .into_iter()
        .map(|(c, fs)| (1.0, product(c, fs)))
        .collect();
    Some(sum(items))
}
