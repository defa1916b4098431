//! Scalar expressions in the two chart coordinates `x` and `y`.
//!
//! The grammar covers literals, `pi`, the variables, `+ - * /`, integer
//! powers `^`, unary minus and the functions `sin cos exp sqrt atan`.
//! Expressions are immutable trees; [`Expr::differentiate`] produces a new
//! tree with literal arithmetic folded away.

pub(crate) mod diff;
mod parser;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub use parser::parse;

/// Chart coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    X,
    Y,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
    Atan,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Atan => "atan",
        }
    }

    pub(crate) fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            "atan" => Func::Atan,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Pi,
    Var(Var),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: expected {}", .expected.join(" or "))]
    Syntax {
        offset: usize,
        expected: Vec<&'static str>,
    },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("domain error in `{subexpr}`: {reason}")]
    Domain {
        subexpr: String,
        reason: &'static str,
    },
}

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn x() -> Expr {
        Expr::Var(Var::X)
    }

    pub fn y() -> Expr {
        Expr::Var(Var::Y)
    }

    /// Evaluates at `(x, y)`. Division by zero, square roots of negative
    /// numbers and non-positive bases under negative powers are reported
    /// together with the offending subexpression.
    pub fn eval(&self, x: f64, y: f64) -> Result<f64, ExprError> {
        let domain = |e: &Expr, reason| ExprError::Domain {
            subexpr: e.to_string(),
            reason,
        };
        Ok(match self {
            Expr::Num(v) => *v,
            Expr::Pi => std::f64::consts::PI,
            Expr::Var(Var::X) => x,
            Expr::Var(Var::Y) => y,
            Expr::Neg(a) => -a.eval(x, y)?,
            Expr::Add(a, b) => a.eval(x, y)? + b.eval(x, y)?,
            Expr::Sub(a, b) => a.eval(x, y)? - b.eval(x, y)?,
            Expr::Mul(a, b) => a.eval(x, y)? * b.eval(x, y)?,
            Expr::Div(a, b) => {
                let den = b.eval(x, y)?;
                if den == 0.0 {
                    return Err(domain(self, "division by zero"));
                }
                a.eval(x, y)? / den
            }
            Expr::Pow(a, n) => {
                let base = a.eval(x, y)?;
                if *n < 0 && base == 0.0 {
                    return Err(domain(self, "zero raised to a negative power"));
                }
                base.powi(*n)
            }
            Expr::Call(f, a) => {
                let v = a.eval(x, y)?;
                match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Exp => v.exp(),
                    Func::Atan => v.atan(),
                    Func::Sqrt => {
                        if v < 0.0 {
                            return Err(domain(self, "square root of a negative number"));
                        }
                        v.sqrt()
                    }
                }
            }
        })
    }

    /// Exact partial derivative with respect to `var`.
    pub fn differentiate(&self, var: Var) -> Expr {
        diff::derivative(self, var)
    }

    /// True if the tree contains no variable.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Num(_) | Expr::Pi => true,
            Expr::Var(_) => false,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.is_constant(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.is_constant() && b.is_constant()
            }
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Expr::Num(_) | Expr::Pi | Expr::Var(_) => 1,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => 1 + a.size(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                1 + a.size() + b.size()
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Num(v) if v.is_sign_negative() && *v != 0.0 => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }
}

// Printing mirrors the parser: a child is parenthesised when its precedence
// is lower than the slot it sits in, and right operands of the
// left-associative operators are parenthesised at equal precedence.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
            if e.precedence() < min {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            Expr::Num(v) if v.is_sign_negative() && *v != 0.0 => {
                write!(f, "-")?;
                child(f, &Expr::Num(-v), 4)
            }
            Expr::Num(v) => write!(f, "{}", v.abs()),
            Expr::Pi => write!(f, "pi"),
            Expr::Var(v) => write!(f, "{}", v.name()),
            Expr::Neg(a) => {
                write!(f, "-")?;
                child(f, a, 4)
            }
            Expr::Add(a, b) => {
                child(f, a, 1)?;
                write!(f, " + ")?;
                child(f, b, 2)
            }
            Expr::Sub(a, b) => {
                child(f, a, 1)?;
                write!(f, " - ")?;
                child(f, b, 2)
            }
            Expr::Mul(a, b) => {
                child(f, a, 2)?;
                write!(f, "*")?;
                child(f, b, 3)
            }
            Expr::Div(a, b) => {
                child(f, a, 2)?;
                write!(f, "/")?;
                child(f, b, 3)
            }
            Expr::Pow(a, n) => {
                child(f, a, 5)?;
                if *n < 0 {
                    write!(f, "^({n})")
                } else {
                    write!(f, "^{n}")
                }
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

impl FromStr for Expr {
    type Err = ExprError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

impl Serialize for Expr {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        parse(&text).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_basic() {
        assert_eq!(parse("x*y+1").unwrap().eval(2.0, 3.0).unwrap(), 7.0);
        let s = parse("sin(2*pi*x)").unwrap().eval(0.25, 0.0).unwrap();
        assert!((s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eval_domain_errors() {
        let err = parse("1/x").unwrap().eval(0.0, 0.0).unwrap_err();
        match err {
            ExprError::Domain { subexpr, .. } => assert_eq!(subexpr, "1/x"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse("2 + sqrt(y)").unwrap().eval(0.0, -1.0).is_err());
        assert!(parse("x^-2").unwrap().eval(0.0, 1.0).is_err());
        assert!(parse("sqrt(y)").unwrap().eval(0.0, 0.0).is_ok());
    }

    #[test]
    fn printing_negative_literals_matches_negation() {
        let folded = Expr::Mul(Box::new(Expr::Num(-3.0)), Box::new(Expr::x()));
        let negated = Expr::Mul(
            Box::new(Expr::Neg(Box::new(Expr::Num(3.0)))),
            Box::new(Expr::x()),
        );
        assert_eq!(folded.to_string(), negated.to_string());
        assert_eq!(parse(&folded.to_string()).unwrap(), negated);
    }

    #[test]
    fn printer_parenthesises_by_precedence() {
        for text in [
            "x - (y - 1)",
            "(x + y)*2",
            "x/(y*2)",
            "-(x + 1)^2",
            "(-x)^2",
            "2^(-1)",
            "sin(x)^3",
            "-x*y",
            "x*-y",
        ] {
            let e = parse(text).unwrap();
            assert_eq!(parse(&e.to_string()).unwrap(), e, "{text} -> {e}");
        }
    }

    #[test]
    fn serde_uses_text_form() {
        let e: Expr = serde_json::from_str("\"y - x^2\"").unwrap();
        assert_eq!(serde_json::to_string(&e).unwrap(), "\"y - x^2\"");
        assert!(serde_json::from_str::<Expr>("\"foo(x)\"").is_err());
    }
}
