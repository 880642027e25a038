//! Scalar expressions over chart coordinates `x1..xn`.
//!
//! Metric tensor entries and transition maps of user-defined manifolds are
//! given as strings like `"4/((1+x1^2+x2^2)^2)"`. This module parses them
//! into trees, evaluates them at points, and differentiates them
//! symbolically so connection coefficients of expression metrics carry no
//! finite-difference truncation error.
//!
//! The grammar is fixed: variables `x1..xn`, literals, `+ - * / ^`, unary
//! minus, and the functions `sin cos exp log sqrt cosh sinh tanh`.
//! Precedence is `^` over unary minus over `* /` over `+ -`; `^` is
//! right-associative, everything else left-associative.

mod parser;

pub use parser::parse_expr;

use std::fmt;
use thiserror::Error;

/// Unary function applicable to a subexpression.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Cosh,
    Sinh,
    Tanh,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Cosh => "cosh",
            Func::Sinh => "sinh",
            Func::Tanh => "tanh",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "cosh" => Func::Cosh,
            "sinh" => Func::Sinh,
            "tanh" => Func::Tanh,
            _ => return None,
        })
    }
}

/// Binary operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// Parsed expression tree. Closed under [`diff_expr`]: the derivative of
/// any tree is again a tree over the same grammar.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricExpr {
    Literal(f64),
    /// Zero-based variable index; `x1` is `Var(0)`.
    Var(usize),
    Neg(Box<MetricExpr>),
    Binary(BinOp, Box<MetricExpr>, Box<MetricExpr>),
    Func(Func, Box<MetricExpr>),
}

/// Expression parse failure, with the byte offset into the source string.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { offset: usize, name: String },
    #[error("function `{name}` at byte {offset} expects exactly one parenthesized argument")]
    ArityMismatch { offset: usize, name: String },
}

/// Expression evaluation failure.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("log of non-positive value {0}")]
    LogNonPositive(f64),
    #[error("square root of negative value {0}")]
    SqrtNegative(f64),
    #[error("expression uses x{used} but point has dimension {dim}")]
    DimensionMismatch { used: usize, dim: usize },
    #[error("non-finite result")]
    NonFinite,
}

impl MetricExpr {
    pub fn literal(v: f64) -> MetricExpr {
        MetricExpr::Literal(v)
    }

    pub fn var(index: usize) -> MetricExpr {
        MetricExpr::Var(index)
    }

    /// Highest 1-based variable index appearing in the tree, or 0 for a
    /// constant expression.
    pub fn max_var(&self) -> usize {
        match self {
            MetricExpr::Literal(_) => 0,
            MetricExpr::Var(i) => i + 1,
            MetricExpr::Neg(a) | MetricExpr::Func(_, a) => a.max_var(),
            MetricExpr::Binary(_, a, b) => a.max_var().max(b.max_var()),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, MetricExpr::Literal(v) if *v == 0.0)
    }

    fn is_one(&self) -> bool {
        matches!(self, MetricExpr::Literal(v) if *v == 1.0)
    }

    /// Evaluate at a coordinate tuple. The point must cover every variable
    /// used by the expression.
    pub fn eval(&self, point: &[f64]) -> Result<f64, EvalError> {
        let v = self.eval_inner(point)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    fn eval_inner(&self, point: &[f64]) -> Result<f64, EvalError> {
        match self {
            MetricExpr::Literal(v) => Ok(*v),
            MetricExpr::Var(i) => point.get(*i).copied().ok_or(EvalError::DimensionMismatch {
                used: i + 1,
                dim: point.len(),
            }),
            MetricExpr::Neg(a) => Ok(-a.eval_inner(point)?),
            MetricExpr::Binary(op, a, b) => {
                let x = a.eval_inner(point)?;
                let y = b.eval_inner(point)?;
                match op {
                    BinOp::Add => Ok(x + y),
                    BinOp::Sub => Ok(x - y),
                    BinOp::Mul => Ok(x * y),
                    BinOp::Div => {
                        if y == 0.0 {
                            Err(EvalError::DivisionByZero)
                        } else {
                            Ok(x / y)
                        }
                    }
                    BinOp::Pow => Ok(x.powf(y)),
                }
            }
            MetricExpr::Func(f, a) => {
                let x = a.eval_inner(point)?;
                match f {
                    Func::Sin => Ok(x.sin()),
                    Func::Cos => Ok(x.cos()),
                    Func::Exp => Ok(x.exp()),
                    Func::Log => {
                        if x <= 0.0 {
                            Err(EvalError::LogNonPositive(x))
                        } else {
                            Ok(x.ln())
                        }
                    }
                    Func::Sqrt => {
                        if x < 0.0 {
                            Err(EvalError::SqrtNegative(x))
                        } else {
                            Ok(x.sqrt())
                        }
                    }
                    Func::Cosh => Ok(x.cosh()),
                    Func::Sinh => Ok(x.sinh()),
                    Func::Tanh => Ok(x.tanh()),
                }
            }
        }
    }

    /// Symbolic partial derivative with respect to the 0-based variable
    /// `var`. Total on the grammar: every term has a symbolic derivative.
    pub fn diff(&self, var: usize) -> MetricExpr {
        match self {
            MetricExpr::Literal(_) => MetricExpr::Literal(0.0),
            MetricExpr::Var(i) => MetricExpr::Literal(if *i == var { 1.0 } else { 0.0 }),
            MetricExpr::Neg(a) => neg(a.diff(var)),
            MetricExpr::Binary(op, a, b) => {
                let da = a.diff(var);
                let db = b.diff(var);
                match op {
                    BinOp::Add => add(da, db),
                    BinOp::Sub => sub(da, db),
                    BinOp::Mul => add(mul(da, (**b).clone()), mul((**a).clone(), db)),
                    BinOp::Div => {
                        // (a/b)' = a'/b - a b'/b^2
                        sub(
                            div(da, (**b).clone()),
                            div(
                                mul((**a).clone(), db),
                                pow((**b).clone(), MetricExpr::Literal(2.0)),
                            ),
                        )
                    }
                    BinOp::Pow => {
                        if let MetricExpr::Literal(c) = **b {
                            // power rule keeps the tree log-free, so bases may be negative
                            mul(
                                mul(
                                    MetricExpr::Literal(c),
                                    pow((**a).clone(), MetricExpr::Literal(c - 1.0)),
                                ),
                                da,
                            )
                        } else {
                            // a^b = exp(b log a): a^b * (b' log a + b a'/a)
                            mul(
                                pow((**a).clone(), (**b).clone()),
                                add(
                                    mul(db, func(Func::Log, (**a).clone())),
                                    div(mul((**b).clone(), da), (**a).clone()),
                                ),
                            )
                        }
                    }
                }
            }
            MetricExpr::Func(f, a) => {
                let da = a.diff(var);
                let inner = (**a).clone();
                let outer = match f {
                    Func::Sin => func(Func::Cos, inner),
                    Func::Cos => neg(func(Func::Sin, inner)),
                    Func::Exp => func(Func::Exp, inner),
                    Func::Log => div(MetricExpr::Literal(1.0), inner),
                    Func::Sqrt => div(
                        MetricExpr::Literal(0.5),
                        func(Func::Sqrt, inner),
                    ),
                    Func::Cosh => func(Func::Sinh, inner),
                    Func::Sinh => func(Func::Cosh, inner),
                    Func::Tanh => {
                        // 1 - tanh^2
                        sub(
                            MetricExpr::Literal(1.0),
                            pow(func(Func::Tanh, inner), MetricExpr::Literal(2.0)),
                        )
                    }
                };
                mul(outer, da)
            }
        }
    }
}

// Smart constructors fold the identities produced in bulk by
// differentiation (0+e, 0*e, 1*e, literal arithmetic). Correctness is by
// evaluation; no canonical form is attempted.

fn add(a: MetricExpr, b: MetricExpr) -> MetricExpr {
    if a.is_zero() {
        return b;
    }
    if b.is_zero() {
        return a;
    }
    if let (MetricExpr::Literal(x), MetricExpr::Literal(y)) = (&a, &b) {
        return MetricExpr::Literal(x + y);
    }
    MetricExpr::Binary(BinOp::Add, Box::new(a), Box::new(b))
}

fn sub(a: MetricExpr, b: MetricExpr) -> MetricExpr {
    if b.is_zero() {
        return a;
    }
    if a.is_zero() {
        return neg(b);
    }
    if let (MetricExpr::Literal(x), MetricExpr::Literal(y)) = (&a, &b) {
        return MetricExpr::Literal(x - y);
    }
    MetricExpr::Binary(BinOp::Sub, Box::new(a), Box::new(b))
}

fn mul(a: MetricExpr, b: MetricExpr) -> MetricExpr {
    if a.is_zero() || b.is_zero() {
        return MetricExpr::Literal(0.0);
    }
    if a.is_one() {
        return b;
    }
    if b.is_one() {
        return a;
    }
    if let (MetricExpr::Literal(x), MetricExpr::Literal(y)) = (&a, &b) {
        return MetricExpr::Literal(x * y);
    }
    MetricExpr::Binary(BinOp::Mul, Box::new(a), Box::new(b))
}

fn div(a: MetricExpr, b: MetricExpr) -> MetricExpr {
    if a.is_zero() {
        return MetricExpr::Literal(0.0);
    }
    if b.is_one() {
        return a;
    }
    MetricExpr::Binary(BinOp::Div, Box::new(a), Box::new(b))
}

fn pow(a: MetricExpr, b: MetricExpr) -> MetricExpr {
    if b.is_zero() {
        return MetricExpr::Literal(1.0);
    }
    if b.is_one() {
        return a;
    }
    MetricExpr::Binary(BinOp::Pow, Box::new(a), Box::new(b))
}

fn neg(a: MetricExpr) -> MetricExpr {
    if a.is_zero() {
        return a;
    }
    if let MetricExpr::Literal(v) = a {
        return MetricExpr::Literal(-v);
    }
    MetricExpr::Neg(Box::new(a))
}

fn func(f: Func, a: MetricExpr) -> MetricExpr {
    MetricExpr::Func(f, Box::new(a))
}

impl fmt::Display for MetricExpr {
    /// Fully parenthesized form; re-parsing reproduces the identical tree,
    /// so evaluation sequences round-trip exactly.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricExpr::Literal(v) => {
                if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) {
                    write!(f, "(-{})", format_literal(-v))
                } else {
                    write!(f, "{}", format_literal(*v))
                }
            }
            MetricExpr::Var(i) => write!(f, "x{}", i + 1),
            MetricExpr::Neg(a) => write!(f, "(-{a})"),
            MetricExpr::Binary(op, a, b) => {
                let s = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({a}{s}{b})")
            }
            MetricExpr::Func(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

fn format_literal(v: f64) -> String {
    // Shortest representation that round-trips through the literal parser.
    let mut s = format!("{v}");
    if !s.contains('.') && !s.contains('e') && !s.contains("inf") && !s.contains("NaN") {
        s.push_str(".0");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(src: &str) -> MetricExpr {
        parse_expr(src).unwrap()
    }

    #[test]
    fn parses_literal() {
        assert_eq!(p("1"), MetricExpr::Literal(1.0));
        assert_eq!(p(" 2.5e-3 "), MetricExpr::Literal(2.5e-3));
    }

    #[test]
    fn sphere_conformal_factor_roundtrips() {
        let e = p("4/((1+x1^2+x2^2)^2)");
        assert_eq!(e.eval(&[0.0, 0.0]).unwrap(), 4.0);
        let back = parse_expr(&e.to_string()).unwrap();
        assert_eq!(back.eval(&[0.0, 0.0]).unwrap(), 4.0);
        assert_eq!(back.eval(&[1.0, 0.0]).unwrap(), 1.0);
    }

    #[test]
    fn half_plane_entry() {
        let e = p("1/x2^2");
        assert_eq!(e.eval(&[0.0, 2.0]).unwrap(), 0.25);
    }

    #[test]
    fn eval_examples() {
        assert_eq!(p("x1+x2").eval(&[1.0, 2.0]).unwrap(), 3.0);
        assert_eq!(p("sin(x1)").eval(&[0.0]).unwrap(), 0.0);
    }

    #[test]
    fn precedence_and_unary_minus() {
        // ^ binds tighter than unary minus: -x1^2 at x1=3 is -9
        assert_eq!(p("-x1^2").eval(&[3.0]).unwrap(), -9.0);
        // right-associativity: 2^3^2 = 2^9
        assert_eq!(p("2^3^2").eval(&[]).unwrap(), 512.0);
        // exponent may itself be signed
        assert_eq!(p("2^-2").eval(&[]).unwrap(), 0.25);
        assert_eq!(p("1-2-3").eval(&[]).unwrap(), -4.0);
        assert_eq!(p("12/2/3").eval(&[]).unwrap(), 2.0);
    }

    #[test]
    fn diff_power_rule() {
        let d = p("x1^2").diff(0);
        for x in [-2.0, -0.5, 0.0, 1.5, 3.0] {
            assert!((d.eval(&[x]).unwrap() - 2.0 * x).abs() < 1e-14);
        }
    }

    #[test]
    fn diff_of_other_variable_is_zero() {
        let d = p("x2").diff(0);
        assert!(d.is_zero());
    }

    #[test]
    fn diff_half_plane_metric_entry() {
        // d/dx2 of 1/x2^2 = -2/x2^3; at x2=1 this is -2
        let d = p("1/x2^2").diff(1);
        assert!((d.eval(&[0.0, 1.0]).unwrap() - (-2.0)).abs() < 1e-12);
    }

    #[test]
    fn diff_matches_central_differences() {
        let exprs = [
            "sin(x1)*cos(x2)",
            "exp(x1*x2)",
            "log(1+x1^2)",
            "sqrt(1+x1^2+x2^2)",
            "tanh(x1)/cosh(x2)",
            "x1^3-2*x1*x2+x2^2",
        ];
        let h = 1e-3;
        for src in exprs {
            let e = p(src);
            for var in 0..2 {
                let d = e.diff(var);
                for pt in [[0.3, 0.7], [-0.5, 0.2], [1.1, -0.4]] {
                    let shifted = |k: f64| {
                        let mut q = pt;
                        q[var] += k * h;
                        e.eval(&q).unwrap()
                    };
                    let fd = (shifted(-2.0) - 8.0 * shifted(-1.0) + 8.0 * shifted(1.0)
                        - shifted(2.0))
                        / (12.0 * h);
                    let sym = d.eval(&pt).unwrap();
                    let scale = sym.abs().max(1.0);
                    assert!(
                        (sym - fd).abs() / scale < 1e-6,
                        "{src} d/dx{} at {pt:?}: sym {sym} vs fd {fd}",
                        var + 1
                    );
                }
            }
        }
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(
            p("1/x1").eval(&[0.0]),
            Err(EvalError::DivisionByZero)
        ));
        assert!(matches!(
            p("log(x1)").eval(&[-1.0]),
            Err(EvalError::LogNonPositive(_))
        ));
        assert!(matches!(
            p("sqrt(x1)").eval(&[-4.0]),
            Err(EvalError::SqrtNegative(_))
        ));
        assert!(matches!(
            p("x2").eval(&[1.0]),
            Err(EvalError::DimensionMismatch { used: 2, dim: 1 })
        ));
    }

    #[test]
    fn parse_errors_carry_offsets() {
        match parse_expr("1+ +2") {
            Err(ParseError::Syntax { offset, .. }) => assert_eq!(offset, 3),
            other => panic!("expected syntax error, got {other:?}"),
        }
        match parse_expr("1+y") {
            Err(ParseError::UnknownIdentifier { offset, name }) => {
                assert_eq!(offset, 2);
                assert_eq!(name, "y");
            }
            other => panic!("expected unknown identifier, got {other:?}"),
        }
        match parse_expr("sin+1") {
            Err(ParseError::ArityMismatch { name, .. }) => assert_eq!(name, "sin"),
            other => panic!("expected arity mismatch, got {other:?}"),
        }
        assert!(parse_expr("").is_err());
        assert!(parse_expr("(1+2").is_err());
        assert!(parse_expr("1 2").is_err());
        assert!(parse_expr("sin(x1,x2)").is_err());
    }
}
