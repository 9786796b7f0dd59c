//! Closed-form scalar expressions and their prefix s-expression syntax.
//!
//! ```
//! use hypersurf::expr::AnalyticExpr;
//! let cap: AnalyticExpr = "(add 2 (sqrt (sub 1 (add (mul x1 x1) (mul x2 x2)))))".parse().unwrap();
//! let j = cap.lift(&[0.0, 0.0], 2).unwrap();
//! assert_eq!(j.value(), 3.0);
//! assert_eq!(j.der(&[0, 0]), -1.0);
//! ```

use std::fmt;
use std::ops;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::jet::Jet;

#[derive(Clone, PartialEq)]
pub enum AnalyticExpr {
    Const(f64),
    /// Zero-based variable index; written one-based as `x1`, `x2`, ...
    Var(usize),
    Add(Arc<AnalyticExpr>, Arc<AnalyticExpr>),
    Sub(Arc<AnalyticExpr>, Arc<AnalyticExpr>),
    Mul(Arc<AnalyticExpr>, Arc<AnalyticExpr>),
    Div(Arc<AnalyticExpr>, Arc<AnalyticExpr>),
    Neg(Arc<AnalyticExpr>),
    Sqrt(Arc<AnalyticExpr>),
    Exp(Arc<AnalyticExpr>),
    Log(Arc<AnalyticExpr>),
    Pow(Arc<AnalyticExpr>, i32),
}

use AnalyticExpr as E;

pub fn c(v: f64) -> AnalyticExpr {
    E::Const(v)
}

pub fn x(i: usize) -> AnalyticExpr {
    E::Var(i)
}

impl AnalyticExpr {
    pub fn sqrt(self) -> AnalyticExpr {
        E::Sqrt(Arc::new(self))
    }

    pub fn exp(self) -> AnalyticExpr {
        E::Exp(Arc::new(self))
    }

    pub fn ln(self) -> AnalyticExpr {
        E::Log(Arc::new(self))
    }

    pub fn powi(self, n: i32) -> AnalyticExpr {
        E::Pow(Arc::new(self), n)
    }

    /// `Σ x_i²` over the first `n` variables.
    pub fn norm_sq(n: usize) -> AnalyticExpr {
        (1..n).fold(x(0) * x(0), |acc, i| acc + x(i) * x(i))
    }

    /// One more than the largest variable index used, or 0.
    pub fn num_vars(&self) -> usize {
        match self {
            E::Const(_) => 0,
            E::Var(i) => i + 1,
            E::Add(a, b) | E::Sub(a, b) | E::Mul(a, b) | E::Div(a, b) => a.num_vars().max(b.num_vars()),
            E::Neg(a) | E::Sqrt(a) | E::Exp(a) | E::Log(a) | E::Pow(a, _) => a.num_vars(),
        }
    }

    /// Evaluates the tree on jets standing for the variables.
    pub fn eval(&self, vars: &[Jet]) -> Result<Jet> {
        let proto = vars.first().ok_or(Error::DimMismatch { expected: 1, got: 0 })?;
        self.eval_with(vars, proto)
    }

    fn eval_with(&self, vars: &[Jet], proto: &Jet) -> Result<Jet> {
        let tag = |e: Error| match e {
            Error::Domain { reason, .. } => Error::Domain { node: self.to_string(), reason },
            other => other,
        };
        Ok(match self {
            E::Const(v) => Jet::constant(proto.dim(), proto.order(), *v),
            E::Var(i) => vars
                .get(*i)
                .cloned()
                .ok_or(Error::DimMismatch { expected: i + 1, got: vars.len() })?,
            E::Add(a, b) => a.eval_with(vars, proto)? + b.eval_with(vars, proto)?,
            E::Sub(a, b) => a.eval_with(vars, proto)? - b.eval_with(vars, proto)?,
            E::Mul(a, b) => a.eval_with(vars, proto)? * b.eval_with(vars, proto)?,
            E::Div(a, b) => {
                let num = a.eval_with(vars, proto)?;
                let den = b.eval_with(vars, proto)?;
                num.try_div(&den).map_err(tag)?
            }
            E::Neg(a) => -a.eval_with(vars, proto)?,
            E::Sqrt(a) => a.eval_with(vars, proto)?.sqrt().map_err(tag)?,
            E::Exp(a) => a.eval_with(vars, proto)?.exp(),
            E::Log(a) => a.eval_with(vars, proto)?.ln().map_err(tag)?,
            E::Pow(a, n) => a.eval_with(vars, proto)?.powi(*n).map_err(tag)?,
        })
    }

    /// All partial derivatives up to `order` at `point`.
    pub fn lift(&self, point: &[f64], order: usize) -> Result<Jet> {
        if point.len() < self.num_vars() {
            return Err(Error::DimMismatch { expected: self.num_vars(), got: point.len() });
        }
        self.eval(&Jet::seed(point, order))
    }

    pub fn value_at(&self, point: &[f64]) -> Result<f64> {
        Ok(self.lift(point, 0)?.value())
    }

    /// Replaces `x_i` by `subs[i]`.
    pub fn substitute(&self, subs: &[AnalyticExpr]) -> AnalyticExpr {
        let s = |a: &Arc<AnalyticExpr>| Arc::new(a.substitute(subs));
        match self {
            E::Const(v) => E::Const(*v),
            E::Var(i) => subs.get(*i).cloned().unwrap_or(E::Var(*i)),
            E::Add(a, b) => E::Add(s(a), s(b)),
            E::Sub(a, b) => E::Sub(s(a), s(b)),
            E::Mul(a, b) => E::Mul(s(a), s(b)),
            E::Div(a, b) => E::Div(s(a), s(b)),
            E::Neg(a) => E::Neg(s(a)),
            E::Sqrt(a) => E::Sqrt(s(a)),
            E::Exp(a) => E::Exp(s(a)),
            E::Log(a) => E::Log(s(a)),
            E::Pow(a, n) => E::Pow(s(a), *n),
        }
    }
}

impl fmt::Display for AnalyticExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            E::Const(v) => write!(f, "{v}"),
            E::Var(i) => write!(f, "x{}", i + 1),
            E::Add(a, b) => write!(f, "(add {a} {b})"),
            E::Sub(a, b) => write!(f, "(sub {a} {b})"),
            E::Mul(a, b) => write!(f, "(mul {a} {b})"),
            E::Div(a, b) => write!(f, "(div {a} {b})"),
            E::Neg(a) => write!(f, "(neg {a})"),
            E::Sqrt(a) => write!(f, "(sqrt {a})"),
            E::Exp(a) => write!(f, "(exp {a})"),
            E::Log(a) => write!(f, "(log {a})"),
            E::Pow(a, n) => write!(f, "(pow {a} {n})"),
        }
    }
}

impl fmt::Debug for AnalyticExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token<'a> {
    Open,
    Close,
    Atom(&'a str),
}

fn tokenize(s: &str) -> Vec<(usize, Token<'_>)> {
    let mut out = Vec::new();
    let bytes = s.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'(' => {
                out.push((i, Token::Open));
                i += 1;
            }
            b')' => {
                out.push((i, Token::Close));
                i += 1;
            }
            b if b.is_ascii_whitespace() => i += 1,
            _ => {
                let start = i;
                while i < bytes.len() && !bytes[i].is_ascii_whitespace() && bytes[i] != b'(' && bytes[i] != b')' {
                    i += 1;
                }
                out.push((start, Token::Atom(&s[start..i])));
            }
        }
    }
    out
}

struct Parser<'a> {
    toks: Vec<(usize, Token<'a>)>,
    pos: usize,
    end: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        let pos = self.toks.get(self.pos).map(|t| t.0).unwrap_or(self.end);
        Err(Error::Parse { pos, msg: msg.into() })
    }

    fn next(&mut self) -> Option<Token<'a>> {
        let t = self.toks.get(self.pos).map(|t| t.1.clone());
        self.pos += 1;
        t
    }

    fn peek(&self) -> Option<&Token<'a>> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn expr(&mut self) -> Result<AnalyticExpr> {
        match self.next() {
            None => self.err("unexpected end of input"),
            Some(Token::Close) => {
                self.pos -= 1;
                self.err("unexpected ')'")
            }
            Some(Token::Atom(a)) => self.atom(a),
            Some(Token::Open) => {
                let head = match self.next() {
                    Some(Token::Atom(h)) => h,
                    _ => {
                        self.pos -= 1;
                        return self.err("expected an operator name");
                    }
                };
                let mut args = Vec::new();
                while !matches!(self.peek(), Some(Token::Close) | None) {
                    if head == "pow" && args.len() == 1 {
                        break;
                    }
                    args.push(self.expr()?);
                }
                let n_exp = if head == "pow" {
                    match self.next() {
                        Some(Token::Atom(a)) => match a.parse::<i32>() {
                            Ok(n) => Some(n),
                            Err(_) => {
                                self.pos -= 1;
                                return self.err("pow exponent must be an integer");
                            }
                        },
                        _ => {
                            self.pos -= 1;
                            return self.err("pow needs an integer exponent");
                        }
                    }
                } else {
                    None
                };
                match self.next() {
                    Some(Token::Close) => {}
                    _ => {
                        self.pos -= 1;
                        return self.err("expected ')'");
                    }
                }
                self.build(head, args, n_exp)
            }
        }
    }

    fn atom(&mut self, a: &str) -> Result<AnalyticExpr> {
        if let Some(rest) = a.strip_prefix('x') {
            if let Ok(k) = rest.parse::<usize>() {
                if k >= 1 {
                    return Ok(E::Var(k - 1));
                }
            }
        }
        match a.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(E::Const(v)),
            _ => {
                self.pos -= 1;
                self.err(format!("unknown atom `{a}`"))
            }
        }
    }

    fn build(&mut self, head: &str, mut args: Vec<AnalyticExpr>, n_exp: Option<i32>) -> Result<AnalyticExpr> {
        let arity = args.len();
        let unary = |args: &mut Vec<AnalyticExpr>| Arc::new(args.pop().unwrap());
        let fold = |args: Vec<AnalyticExpr>, f: fn(Arc<E>, Arc<E>) -> E| {
            let mut it = args.into_iter();
            let first = it.next().unwrap();
            it.fold(first, |acc, b| f(Arc::new(acc), Arc::new(b)))
        };
        let bad = |me: &Self, want: &str| me.err::<AnalyticExpr>(format!("`{head}` takes {want}, got {arity}"));
        match head {
            "add" | "mul" if arity == 0 => bad(self, "at least one argument"),
            "add" => Ok(fold(args, E::Add)),
            "mul" => Ok(fold(args, E::Mul)),
            "sub" if arity == 1 => Ok(E::Neg(unary(&mut args))),
            "sub" if arity == 2 => Ok(fold(args, E::Sub)),
            "sub" => bad(self, "one or two arguments"),
            "div" if arity == 2 => Ok(fold(args, E::Div)),
            "div" => bad(self, "two arguments"),
            "neg" | "sqrt" | "exp" | "log" if arity != 1 => bad(self, "one argument"),
            "neg" => Ok(E::Neg(unary(&mut args))),
            "sqrt" => Ok(E::Sqrt(unary(&mut args))),
            "exp" => Ok(E::Exp(unary(&mut args))),
            "log" => Ok(E::Log(unary(&mut args))),
            "pow" if arity == 1 => Ok(E::Pow(unary(&mut args), n_exp.unwrap())),
            "pow" => bad(self, "a base and an integer exponent"),
            _ => self.err(format!("unknown operator `{head}`")),
        }
    }
}

impl FromStr for AnalyticExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<AnalyticExpr> {
        let mut p = Parser { toks: tokenize(s), pos: 0, end: s.len() };
        let e = p.expr()?;
        if p.pos < p.toks.len() {
            return p.err("trailing input");
        }
        Ok(e)
    }
}

impl Serialize for AnalyticExpr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for AnalyticExpr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! expr_binop {
    ($tr:ident, $m:ident, $variant:ident) => {
        impl ops::$tr for AnalyticExpr {
            type Output = AnalyticExpr;
            fn $m(self, rhs: AnalyticExpr) -> AnalyticExpr {
                E::$variant(Arc::new(self), Arc::new(rhs))
            }
        }
        impl ops::$tr<f64> for AnalyticExpr {
            type Output = AnalyticExpr;
            fn $m(self, rhs: f64) -> AnalyticExpr {
                E::$variant(Arc::new(self), Arc::new(E::Const(rhs)))
            }
        }
        impl ops::$tr<AnalyticExpr> for f64 {
            type Output = AnalyticExpr;
            fn $m(self, rhs: AnalyticExpr) -> AnalyticExpr {
                E::$variant(Arc::new(E::Const(self)), Arc::new(rhs))
            }
        }
    };
}

expr_binop!(Add, add, Add);
expr_binop!(Sub, sub, Sub);
expr_binop!(Mul, mul, Mul);
expr_binop!(Div, div, Div);

impl ops::Neg for AnalyticExpr {
    type Output = AnalyticExpr;
    fn neg(self) -> AnalyticExpr {
        E::Neg(Arc::new(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pole_of_unit_cap() {
        let e = (1.0 - AnalyticExpr::norm_sq(2)).sqrt();
        let j = e.lift(&[0.0, 0.0], 2).unwrap();
        assert_eq!(j.value(), 1.0);
        assert_eq!(j.grad(), vec![0.0, 0.0]);
        assert_eq!(j.der(&[0, 0]), -1.0);
        assert_eq!(j.der(&[0, 1]), 0.0);
        assert_eq!(j.der(&[1, 1]), -1.0);
    }

    #[test]
    fn parse_print_round_trip() {
        let s = "(add 2 (sqrt (sub 1 (add (mul x1 x1) (mul x2 x2)))))";
        let e: AnalyticExpr = s.parse().unwrap();
        assert_eq!(e.to_string(), s);
        let nary: AnalyticExpr = "(add 1 x1 (pow x2 -3) (neg 0.5))".parse().unwrap();
        let again: AnalyticExpr = nary.to_string().parse().unwrap();
        assert_eq!(nary, again);
    }

    #[test]
    fn parse_errors() {
        for bad in ["", "(add", "(foo 1)", "(pow x1 1.5)", "(div 1)", "y3", "(add 1))", "x0"] {
            assert!(matches!(bad.parse::<AnalyticExpr>(), Err(Error::Parse { .. })), "{bad}");
        }
    }

    #[test]
    fn domain_error_names_node() {
        let e: AnalyticExpr = "(add 1 (sqrt (sub x1 2)))".parse().unwrap();
        match e.lift(&[1.0], 1) {
            Err(Error::Domain { node, .. }) => assert_eq!(node, "(sqrt (sub x1 2))"),
            other => panic!("{other:?}"),
        }
        let d: AnalyticExpr = "(div 1 x1)".parse().unwrap();
        assert!(matches!(d.lift(&[0.0], 2), Err(Error::Domain { .. })));
    }

    #[test]
    fn substitution() {
        let e = x(0) * x(1);
        let s = e.substitute(&[x(0) + 1.0, c(3.0)]);
        assert_eq!(s.value_at(&[2.0]).unwrap(), 9.0);
    }
}
