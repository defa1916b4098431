use super::{Expr, Func, Var};

// Smart constructors. They fold literal arithmetic and the identities
// 0+a, a*1, a^1 and friends; nothing else is rewritten.

fn lit(e: &Expr) -> Option<f64> {
    match e {
        Expr::Num(v) => Some(*v),
        _ => None,
    }
}

fn finite_or(v: f64, fallback: impl FnOnce() -> Expr) -> Expr {
    if v.is_finite() {
        Expr::Num(v)
    } else {
        fallback()
    }
}

pub(crate) fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(v) => Expr::Num(-v),
        Expr::Neg(inner) => *inner,
        other => Expr::Neg(Box::new(other)),
    }
}

pub(crate) fn add(a: Expr, b: Expr) -> Expr {
    match (lit(&a), lit(&b)) {
        (Some(p), Some(q)) => Expr::Num(p + q),
        (Some(p), _) if p == 0.0 => b,
        (_, Some(q)) if q == 0.0 => a,
        _ => Expr::Add(Box::new(a), Box::new(b)),
    }
}

pub(crate) fn sub(a: Expr, b: Expr) -> Expr {
    match (lit(&a), lit(&b)) {
        (Some(p), Some(q)) => Expr::Num(p - q),
        (Some(p), _) if p == 0.0 => neg(b),
        (_, Some(q)) if q == 0.0 => a,
        _ => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

pub(crate) fn mul(a: Expr, b: Expr) -> Expr {
    match (lit(&a), lit(&b)) {
        (Some(p), Some(q)) => Expr::Num(p * q),
        (Some(p), _) | (_, Some(p)) if p == 0.0 => Expr::Num(0.0),
        (Some(p), _) if p == 1.0 => b,
        (_, Some(q)) if q == 1.0 => a,
        (Some(p), _) if p == -1.0 => neg(b),
        (_, Some(q)) if q == -1.0 => neg(a),
        _ => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

pub(crate) fn div(a: Expr, b: Expr) -> Expr {
    match (lit(&a), lit(&b)) {
        (Some(p), Some(q)) if q != 0.0 => finite_or(p / q, || {
            Expr::Div(Box::new(a.clone()), Box::new(b.clone()))
        }),
        (Some(p), _) if p == 0.0 => Expr::Num(0.0),
        (_, Some(q)) if q == 1.0 => a,
        _ => Expr::Div(Box::new(a), Box::new(b)),
    }
}

pub(crate) fn pow(a: Expr, n: i32) -> Expr {
    match (lit(&a), n) {
        (_, 0) => Expr::Num(1.0),
        (_, 1) => a,
        (Some(p), _) if !(p == 0.0 && n < 0) => {
            finite_or(p.powi(n), || Expr::Pow(Box::new(a.clone()), n))
        }
        _ => Expr::Pow(Box::new(a), n),
    }
}

fn call(f: Func, a: Expr) -> Expr {
    Expr::Call(f, Box::new(a))
}

pub(crate) fn derivative(e: &Expr, var: Var) -> Expr {
    match e {
        Expr::Num(_) | Expr::Pi => Expr::Num(0.0),
        Expr::Var(v) => Expr::Num(if *v == var { 1.0 } else { 0.0 }),
        Expr::Neg(a) => neg(derivative(a, var)),
        Expr::Add(a, b) => add(derivative(a, var), derivative(b, var)),
        Expr::Sub(a, b) => sub(derivative(a, var), derivative(b, var)),
        Expr::Mul(a, b) => add(
            mul(derivative(a, var), (**b).clone()),
            mul((**a).clone(), derivative(b, var)),
        ),
        Expr::Div(a, b) => {
            let da = derivative(a, var);
            let db = derivative(b, var);
            if lit(&db) == Some(0.0) {
                div(da, (**b).clone())
            } else {
                div(
                    sub(mul(da, (**b).clone()), mul((**a).clone(), db)),
                    pow((**b).clone(), 2),
                )
            }
        }
        Expr::Pow(a, n) => {
            let da = derivative(a, var);
            mul(mul(Expr::Num(f64::from(*n)), pow((**a).clone(), n - 1)), da)
        }
        Expr::Call(f, a) => {
            let da = derivative(a, var);
            if lit(&da) == Some(0.0) {
                return Expr::Num(0.0);
            }
            let inner = (**a).clone();
            match f {
                Func::Sin => mul(da, call(Func::Cos, inner)),
                Func::Cos => neg(mul(da, call(Func::Sin, inner))),
                Func::Exp => mul(da, call(Func::Exp, inner)),
                Func::Sqrt => div(da, mul(Expr::Num(2.0), call(Func::Sqrt, inner))),
                Func::Atan => div(da, add(Expr::Num(1.0), pow(inner, 2))),
            }
        }
    }
}
