//! Scalar expressions in named chart coordinates.
//!
//! An [`Expr`] is an immutable, reference-counted AST. Derivatives are exact
//! symbolic transformations; the only simplifications applied are constant
//! folding and the identities `0*x`, `1*x`, `x+0`, `x-0`, `x/1`, `x^1`, `x^0`.
//! Nothing attempts a canonical form.
//!
//! Grammar (used verbatim by metric spec files):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('-' | '+') unary | power
//! power  := atom ('^' unary)?            (right associative)
//! atom   := number | ident | ident '(' expr ')' | '(' expr ')'
//! number := digits ['.' digits] [('e' | 'E') ['+' | '-'] digits]
//! ```
//!
//! Identifiers are either declared coordinates or the constant `pi`.
//! Functions: `exp ln sqrt sin cos sinh cosh tanh`.

mod parse;

use std::collections::BTreeMap;
use std::fmt;
use std::ops;
use std::sync::Arc;

use thiserror::Error;

pub use parse::parse;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { name: String, offset: usize },
    #[error("domain error in `{subexpr}`: {message}")]
    Domain { subexpr: String, message: String },
    #[error("variable `{0}` has no value at this point")]
    Unbound(String),
    #[error("`{0}` is not a declared coordinate")]
    InvalidVariable(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Func {
    Exp,
    Ln,
    Sqrt,
    Sin,
    Cos,
    Sinh,
    Cosh,
    Tanh,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
            _ => return None,
        })
    }

    /// Applies the function, or returns a message when `x` is outside its domain.
    fn apply(self, x: f64) -> Result<f64, &'static str> {
        match self {
            Func::Exp => Ok(x.exp()),
            Func::Ln if x <= 0.0 => Err("logarithm of a nonpositive number"),
            Func::Ln => Ok(x.ln()),
            Func::Sqrt if x < 0.0 => Err("square root of a negative number"),
            Func::Sqrt => Ok(x.sqrt()),
            Func::Sin => Ok(x.sin()),
            Func::Cos => Ok(x.cos()),
            Func::Sinh => Ok(x.sinh()),
            Func::Cosh => Ok(x.cosh()),
            Func::Tanh => Ok(x.tanh()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Var(Arc<str>),
    Neg(Expr),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Pow(Expr, Expr),
    Call(Func, Expr),
}

/// Immutable expression handle; cloning is a reference-count bump.
#[derive(Clone, PartialEq)]
pub struct Expr(Arc<Node>);

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

/// Coordinate values keyed by coordinate name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Point(BTreeMap<String, f64>);

impl Point {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a point from parallel slices of names and values.
    pub fn from_chart<S: AsRef<str>>(names: &[S], values: &[f64]) -> Self {
        assert_eq!(names.len(), values.len(), "chart/value length mismatch");
        Point(
            names
                .iter()
                .zip(values)
                .map(|(n, v)| (n.as_ref().to_string(), *v))
                .collect(),
        )
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.insert(name, value);
        self
    }

    pub fn insert(&mut self, name: &str, value: f64) {
        self.0.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// Values in the order of `names`; errors on a missing coordinate.
    pub fn values_for<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<f64>, ExprError> {
        names
            .iter()
            .map(|n| {
                self.get(n.as_ref())
                    .ok_or_else(|| ExprError::Unbound(n.as_ref().to_string()))
            })
            .collect()
    }

    /// True when the point carries exactly the given coordinates.
    pub fn matches_chart<S: AsRef<str>>(&self, names: &[S]) -> bool {
        self.0.len() == names.len() && names.iter().all(|n| self.0.contains_key(n.as_ref()))
    }
}

impl<S: Into<String>> FromIterator<(S, f64)> for Point {
    fn from_iter<I: IntoIterator<Item = (S, f64)>>(iter: I) -> Self {
        Point(iter.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn is_integral(x: f64) -> bool {
    x.fract() == 0.0 && x.abs() < 2f64.powi(31)
}

/// Integer or positive-base real power; `None` marks a domain violation.
fn checked_pow(base: f64, exponent: f64) -> Result<f64, &'static str> {
    if is_integral(exponent) {
        if base == 0.0 && exponent < 0.0 {
            return Err("division by zero in negative power");
        }
        Ok(base.powi(exponent as i32))
    } else if base > 0.0 {
        Ok(base.powf(exponent))
    } else {
        Err("non-integer power of a nonpositive base")
    }
}

impl Expr {
    fn from_node(node: Node) -> Self {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn num(value: f64) -> Self {
        Self::from_node(Node::Num(value))
    }

    pub fn zero() -> Self {
        Self::num(0.0)
    }

    pub fn one() -> Self {
        Self::num(1.0)
    }

    pub fn var(name: &str) -> Self {
        Self::from_node(Node::Var(Arc::from(name)))
    }

    pub fn as_num(&self) -> Option<f64> {
        match self.node() {
            Node::Num(v) => Some(*v),
            _ => None,
        }
    }

    /// Value of a variable-free expression (folded or not).
    pub fn constant_value(&self) -> Option<f64> {
        if let Some(v) = self.as_num() {
            return Some(v);
        }
        if self.variables().is_empty() {
            self.eval_with(&|_| None).ok()
        } else {
            None
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_num() == Some(0.0)
    }

    pub fn is_one(&self) -> bool {
        self.as_num() == Some(1.0)
    }

    // Smart constructors: constant folding plus trivial identities only.

    #[allow(clippy::should_implement_trait)]
    pub fn neg(a: Expr) -> Expr {
        match a.node() {
            Node::Num(v) => Expr::num(-v),
            Node::Neg(inner) => inner.clone(),
            _ => Expr::from_node(Node::Neg(a)),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(a: Expr, b: Expr) -> Expr {
        if let (Some(x), Some(y)) = (a.as_num(), b.as_num()) {
            if let Some(v) = finite(x + y) {
                return Expr::num(v);
            }
        }
        if a.is_zero() {
            return b;
        }
        if b.is_zero() {
            return a;
        }
        Expr::from_node(Node::Add(a, b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(a: Expr, b: Expr) -> Expr {
        if let (Some(x), Some(y)) = (a.as_num(), b.as_num()) {
            if let Some(v) = finite(x - y) {
                return Expr::num(v);
            }
        }
        if b.is_zero() {
            return a;
        }
        if a.is_zero() {
            return Expr::neg(b);
        }
        Expr::from_node(Node::Sub(a, b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(a: Expr, b: Expr) -> Expr {
        if let (Some(x), Some(y)) = (a.as_num(), b.as_num()) {
            if let Some(v) = finite(x * y) {
                return Expr::num(v);
            }
        }
        if a.is_zero() || b.is_zero() {
            return Expr::zero();
        }
        if a.is_one() {
            return b;
        }
        if b.is_one() {
            return a;
        }
        if a.as_num() == Some(-1.0) {
            return Expr::neg(b);
        }
        if b.as_num() == Some(-1.0) {
            return Expr::neg(a);
        }
        Expr::from_node(Node::Mul(a, b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn div(a: Expr, b: Expr) -> Expr {
        if let (Some(x), Some(y)) = (a.as_num(), b.as_num()) {
            if y != 0.0 {
                if let Some(v) = finite(x / y) {
                    return Expr::num(v);
                }
            }
        }
        if a.is_zero() && b.as_num() != Some(0.0) {
            return Expr::zero();
        }
        if b.is_one() {
            return a;
        }
        Expr::from_node(Node::Div(a, b))
    }

    pub fn pow(base: Expr, exponent: Expr) -> Expr {
        if let Some(e) = exponent.as_num() {
            if e == 1.0 {
                return base;
            }
            if e == 0.0 {
                return Expr::one();
            }
            if let Some(b) = base.as_num() {
                if let Ok(v) = checked_pow(b, e) {
                    if let Some(v) = finite(v) {
                        return Expr::num(v);
                    }
                }
            }
        }
        Expr::from_node(Node::Pow(base, exponent))
    }

    pub fn powi(base: Expr, exponent: i32) -> Expr {
        Expr::pow(base, Expr::num(exponent as f64))
    }

    pub fn call(func: Func, arg: Expr) -> Expr {
        if let Some(x) = arg.as_num() {
            if let Ok(v) = func.apply(x) {
                if let Some(v) = finite(v) {
                    return Expr::num(v);
                }
            }
        }
        Expr::from_node(Node::Call(func, arg))
    }

    pub fn exp(self) -> Expr {
        Expr::call(Func::Exp, self)
    }
    pub fn ln(self) -> Expr {
        Expr::call(Func::Ln, self)
    }
    pub fn sqrt(self) -> Expr {
        Expr::call(Func::Sqrt, self)
    }
    pub fn sin(self) -> Expr {
        Expr::call(Func::Sin, self)
    }
    pub fn cos(self) -> Expr {
        Expr::call(Func::Cos, self)
    }
    pub fn sinh(self) -> Expr {
        Expr::call(Func::Sinh, self)
    }
    pub fn cosh(self) -> Expr {
        Expr::call(Func::Cosh, self)
    }
    pub fn tanh(self) -> Expr {
        Expr::call(Func::Tanh, self)
    }

    /// True if `var` occurs anywhere in the tree.
    pub fn depends_on(&self, var: &str) -> bool {
        match self.node() {
            Node::Num(_) => false,
            Node::Var(v) => &**v == var,
            Node::Neg(a) | Node::Call(_, a) => a.depends_on(var),
            Node::Add(a, b)
            | Node::Sub(a, b)
            | Node::Mul(a, b)
            | Node::Div(a, b)
            | Node::Pow(a, b) => a.depends_on(var) || b.depends_on(var),
        }
    }

    /// Collects the variable names appearing in the tree.
    pub fn variables(&self) -> Vec<String> {
        fn walk(e: &Expr, out: &mut Vec<String>) {
            match e.node() {
                Node::Num(_) => {}
                Node::Var(v) => {
                    if !out.iter().any(|o| o == &**v) {
                        out.push(v.to_string());
                    }
                }
                Node::Neg(a) | Node::Call(_, a) => walk(a, out),
                Node::Add(a, b)
                | Node::Sub(a, b)
                | Node::Mul(a, b)
                | Node::Div(a, b)
                | Node::Pow(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }

    /// Exact symbolic derivative with respect to `var`.
    pub fn differentiate(&self, var: &str) -> Expr {
        match self.node() {
            Node::Num(_) => Expr::zero(),
            Node::Var(v) => {
                if &**v == var {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Neg(a) => Expr::neg(a.differentiate(var)),
            Node::Add(a, b) => Expr::add(a.differentiate(var), b.differentiate(var)),
            Node::Sub(a, b) => Expr::sub(a.differentiate(var), b.differentiate(var)),
            Node::Mul(a, b) => Expr::add(
                Expr::mul(a.differentiate(var), b.clone()),
                Expr::mul(a.clone(), b.differentiate(var)),
            ),
            Node::Div(a, b) => {
                let da = a.differentiate(var);
                let db = b.differentiate(var);
                Expr::sub(
                    Expr::div(da, b.clone()),
                    Expr::div(Expr::mul(a.clone(), db), Expr::powi(b.clone(), 2)),
                )
            }
            Node::Pow(base, exponent) => {
                let db = base.differentiate(var);
                let de = exponent.differentiate(var);
                if de.is_zero() {
                    // e * b^(e-1) * b'
                    let lowered = Expr::pow(base.clone(), Expr::sub(exponent.clone(), Expr::one()));
                    Expr::mul(Expr::mul(exponent.clone(), lowered), db)
                } else {
                    // b^e * (e' ln b + e b'/b)
                    Expr::mul(
                        self.clone(),
                        Expr::add(
                            Expr::mul(de, base.clone().ln()),
                            Expr::div(Expr::mul(exponent.clone(), db), base.clone()),
                        ),
                    )
                }
            }
            Node::Call(func, a) => {
                let da = a.differentiate(var);
                if da.is_zero() {
                    return Expr::zero();
                }
                let outer = match func {
                    Func::Exp => self.clone(),
                    Func::Ln => Expr::div(Expr::one(), a.clone()),
                    Func::Sqrt => Expr::div(Expr::num(0.5), self.clone()),
                    Func::Sin => a.clone().cos(),
                    Func::Cos => Expr::neg(a.clone().sin()),
                    Func::Sinh => a.clone().cosh(),
                    Func::Cosh => a.clone().sinh(),
                    Func::Tanh => Expr::sub(Expr::one(), Expr::powi(self.clone(), 2)),
                };
                Expr::mul(outer, da)
            }
        }
    }

    /// Replaces variables for which `map` returns a value, re-folding constants.
    pub fn substitute(&self, map: &dyn Fn(&str) -> Option<Expr>) -> Expr {
        match self.node() {
            Node::Num(_) => self.clone(),
            Node::Var(v) => map(v).unwrap_or_else(|| self.clone()),
            Node::Neg(a) => Expr::neg(a.substitute(map)),
            Node::Add(a, b) => Expr::add(a.substitute(map), b.substitute(map)),
            Node::Sub(a, b) => Expr::sub(a.substitute(map), b.substitute(map)),
            Node::Mul(a, b) => Expr::mul(a.substitute(map), b.substitute(map)),
            Node::Div(a, b) => Expr::div(a.substitute(map), b.substitute(map)),
            Node::Pow(a, b) => Expr::pow(a.substitute(map), b.substitute(map)),
            Node::Call(f, a) => Expr::call(*f, a.substitute(map)),
        }
    }

    /// Renames variables according to `pairs` (old, new).
    pub fn rename(&self, pairs: &[(&str, &str)]) -> Expr {
        self.substitute(&|v| {
            pairs
                .iter()
                .find(|(old, _)| *old == v)
                .map(|(_, new)| Expr::var(new))
        })
    }

    pub fn eval(&self, p: &Point) -> Result<f64, ExprError> {
        self.eval_with(&|name| p.get(name))
    }

    /// Evaluates with an arbitrary variable lookup.
    pub fn eval_with(&self, lookup: &dyn Fn(&str) -> Option<f64>) -> Result<f64, ExprError> {
        let domain = |message: &str| ExprError::Domain {
            subexpr: self.to_string(),
            message: message.to_string(),
        };
        let value = match self.node() {
            Node::Num(v) => *v,
            Node::Var(v) => lookup(v).ok_or_else(|| ExprError::Unbound(v.to_string()))?,
            Node::Neg(a) => -a.eval_with(lookup)?,
            Node::Add(a, b) => a.eval_with(lookup)? + b.eval_with(lookup)?,
            Node::Sub(a, b) => a.eval_with(lookup)? - b.eval_with(lookup)?,
            Node::Mul(a, b) => a.eval_with(lookup)? * b.eval_with(lookup)?,
            Node::Div(a, b) => {
                let num = a.eval_with(lookup)?;
                let den = b.eval_with(lookup)?;
                if den == 0.0 {
                    return Err(domain("division by zero"));
                }
                num / den
            }
            Node::Pow(a, b) => {
                let base = a.eval_with(lookup)?;
                let exponent = b.eval_with(lookup)?;
                checked_pow(base, exponent).map_err(domain)?
            }
            Node::Call(f, a) => f.apply(a.eval_with(lookup)?).map_err(domain)?,
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(domain("non-finite result"))
        }
    }

    fn precedence(&self) -> u8 {
        match self.node() {
            Node::Add(..) | Node::Sub(..) => 1,
            Node::Mul(..) | Node::Div(..) => 2,
            Node::Neg(_) => 3,
            Node::Num(v) if v.is_sign_negative() => 3,
            Node::Pow(..) => 4,
            Node::Num(_) | Node::Var(_) | Node::Call(..) => 5,
        }
    }

    fn fmt_child(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Num(v) => write!(f, "{v:?}"),
            Node::Var(v) => f.write_str(v),
            Node::Neg(a) => {
                f.write_str("-")?;
                a.fmt_child(f, 3)
            }
            Node::Add(a, b) | Node::Sub(a, b) => {
                a.fmt_child(f, 1)?;
                f.write_str(if matches!(self.node(), Node::Add(..)) { "+" } else { "-" })?;
                b.fmt_child(f, 2)
            }
            Node::Mul(a, b) | Node::Div(a, b) => {
                a.fmt_child(f, 2)?;
                f.write_str(if matches!(self.node(), Node::Mul(..)) { "*" } else { "/" })?;
                b.fmt_child(f, 3)
            }
            Node::Pow(a, b) => {
                a.fmt_child(f, 5)?;
                f.write_str("^")?;
                b.fmt_child(f, 3)
            }
            Node::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

/// Derivative that first checks `var` against a coordinate list.
pub fn differentiate<S: AsRef<str>>(e: &Expr, var: &str, coords: &[S]) -> Result<Expr, ExprError> {
    if coords.iter().any(|c| c.as_ref() == var) {
        Ok(e.differentiate(var))
    } else {
        Err(ExprError::InvalidVariable(var.to_string()))
    }
}

impl From<f64> for Expr {
    fn from(v: f64) -> Self {
        Expr::num(v)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $ctor:path) => {
        impl ops::$trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $ctor(self, rhs)
            }
        }
        impl ops::$trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $ctor(self.clone(), rhs.clone())
            }
        }
        impl ops::$trait<f64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                $ctor(self, Expr::num(rhs))
            }
        }
        impl ops::$trait<Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $ctor(Expr::num(self), rhs)
            }
        }
    };
}

binop!(Add, add, Expr::add);
binop!(Sub, sub, Expr::sub);
binop!(Mul, mul, Expr::mul);
binop!(Div, div, Expr::div);

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(pairs: &[(&str, f64)]) -> Point {
        pairs.iter().map(|(k, v)| (*k, *v)).collect()
    }

    #[test]
    fn chain_rule_exp() {
        let e = parse("exp(sqrt(2)*r)", &["r"]).unwrap();
        let d = e.differentiate("r");
        for r in [-1.0, 0.0, 0.3, 1.7] {
            let expected = 2f64.sqrt() * (2f64.sqrt() * r).exp();
            let got = d.eval(&p(&[("r", r)])).unwrap();
            assert!((got - expected).abs() <= 1e-14 * expected.abs());
        }
        assert_eq!(e.eval(&p(&[("r", 0.0)])).unwrap(), 1.0);
    }

    #[test]
    fn cosh_squared_derivative() {
        let e = parse("cosh(t)^2", &["t"]).unwrap();
        let d = e.differentiate("t");
        for t in [-0.7f64, 0.0, 0.4, 2.0] {
            let expected = 2.0 * t.cosh() * t.sinh();
            assert!((d.eval(&p(&[("t", t)])).unwrap() - expected).abs() < 1e-13);
        }
    }

    #[test]
    fn example_two_profile() {
        let e = parse("(x1+2)^2/2", &["x1"]).unwrap();
        assert_eq!(e.eval(&p(&[("x1", 0.0)])).unwrap(), 2.0);
        let dd = e.differentiate("x1").differentiate("x1");
        assert_eq!(dd.eval(&p(&[("x1", 0.37)])).unwrap(), 1.0);
    }

    #[test]
    fn ln_domain_error_names_subexpression() {
        let e = parse("ln(x1)", &["x1"]).unwrap();
        match e.eval(&p(&[("x1", -1.0)])) {
            Err(ExprError::Domain { subexpr, .. }) => assert_eq!(subexpr, "ln(x1)"),
            other => panic!("expected domain error, got {other:?}"),
        }
    }

    #[test]
    fn division_by_zero_and_fractional_power_are_domain_errors() {
        let e = parse("1/x", &["x"]).unwrap();
        assert!(matches!(e.eval(&p(&[("x", 0.0)])), Err(ExprError::Domain { .. })));
        let e = parse("x^0.5", &["x"]).unwrap();
        assert!(matches!(e.eval(&p(&[("x", -4.0)])), Err(ExprError::Domain { .. })));
        let e = parse("x^3", &["x"]).unwrap();
        assert_eq!(e.eval(&p(&[("x", -2.0)])).unwrap(), -8.0);
        let e = parse("sqrt(x)", &["x"]).unwrap();
        assert!(matches!(e.eval(&p(&[("x", -1.0)])), Err(ExprError::Domain { .. })));
    }

    #[test]
    fn unbound_variable() {
        let e = parse("x*y", &["x", "y"]).unwrap();
        assert_eq!(e.eval(&p(&[("x", 1.0)])), Err(ExprError::Unbound("y".into())));
    }

    #[test]
    fn derivative_of_independent_expression_is_literal_zero() {
        let e = parse("cosh(x2)^2*sin(x3)+x2^x3/ln(x3)", &["x0", "x2", "x3"]).unwrap();
        assert!(e.differentiate("x0").is_zero());
    }

    #[test]
    fn trivial_identities() {
        let x = Expr::var("x");
        assert_eq!(Expr::mul(Expr::zero(), x.clone()), Expr::zero());
        assert_eq!(Expr::add(x.clone(), Expr::zero()), x);
        assert_eq!(Expr::pow(x.clone(), Expr::one()), x);
        assert_eq!(Expr::mul(Expr::num(2.0), Expr::num(3.0)), Expr::num(6.0));
        // 1/0 is not folded
        assert!(Expr::div(Expr::one(), Expr::zero()).as_num().is_none());
    }

    #[test]
    fn differentiate_checks_declared_coordinates() {
        let e = parse("x^2", &["x"]).unwrap();
        assert!(differentiate(&e, "x", &["x"]).is_ok());
        assert_eq!(
            differentiate(&e, "y", &["x"]),
            Err(ExprError::InvalidVariable("y".into()))
        );
    }

    #[test]
    fn printing_respects_precedence() {
        let cases = [
            ("a-(b-c)", "a-(b-c)"),
            ("(a-b)-c", "a-b-c"),
            ("a/(b*c)", "a/(b*c)"),
            ("-x^2", "-x^2.0"),
            ("(-x)^2", "(-x)^2.0"),
            ("x^-2", "x^-2.0"),
            ("2^3^2", "2.0^3.0^2.0"),
            ("(2^3)^2", "(2.0^3.0)^2.0"),
        ];
        for (src, printed) in cases {
            let e = parse(src, &["a", "b", "c", "x"]).unwrap();
            assert_eq!(e.to_string(), printed, "{src}");
        }
        assert_eq!(Expr::num(-2.0).to_string(), "-2.0");
        let e = Expr::pow(Expr::num(-2.0), Expr::var("x"));
        assert_eq!(e.to_string(), "(-2.0)^x");
    }

    #[test]
    fn operator_overloads_build_the_same_trees() {
        let x = Expr::var("x");
        let e = (x.clone() + 1.0) * (x.clone() - 2.0) / 3.0;
        let parsed = parse("(x+1)*(x-2)/3", &["x"]).unwrap();
        let at = p(&[("x", 0.75)]);
        assert_eq!(e.eval(&at).unwrap(), parsed.eval(&at).unwrap());
    }
}
