//! Exact symbolic expressions over t1..tn, exponentials of rational linear
//! forms and logarithms.
//!
//! Expressions are immutable trees behind `Arc`, so clones are cheap and
//! values can be shared across threads. The canonical form used for equality
//! testing lives in [`poly`]; parsing of the model-file syntax in [`parse`].

pub mod parse;
pub mod poly;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::scalar::{EvalError, MpFloat, Precision, Scalar};

pub use parse::{parse, ParseError};
pub use poly::{ExpPoly, LogArg, LogPoly, TermKey};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("expression shape not supported by normalization: {0}")]
    UnsupportedShape(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Rational linear form `sum_i c_i t_i` (zero-based variable indices).
pub type LinearForm = BTreeMap<usize, BigRational>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    Const(BigRational),
    /// Zero-based variable index; variable `t1` is index 0.
    Var(usize),
    Exp(LinearForm),
    Log(Expression),
    Sum(Vec<Expression>),
    Product(Vec<Expression>),
    Pow(Expression, i32),
    Quotient(Expression, Expression),
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Expression(Arc<Node>);

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl Expression {
    pub fn node(&self) -> &Node {
        &self.0
    }

    fn from_node(n: Node) -> Self {
        Expression(Arc::new(n))
    }

    pub fn constant(q: BigRational) -> Self {
        Self::from_node(Node::Const(q))
    }

    pub fn int(v: i64) -> Self {
        Self::constant(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn zero() -> Self {
        Self::int(0)
    }

    pub fn one() -> Self {
        Self::int(1)
    }

    /// Variable `t_{index+1}`.
    pub fn var(index: usize) -> Self {
        Self::from_node(Node::Var(index))
    }

    pub fn exp(form: LinearForm) -> Self {
        let form: LinearForm = form.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        if form.is_empty() {
            return Self::one();
        }
        Self::from_node(Node::Exp(form))
    }

    /// `exp(c * t_{index+1})`.
    pub fn exp_var(index: usize, c: BigRational) -> Self {
        let mut f = LinearForm::new();
        f.insert(index, c);
        Self::exp(f)
    }

    pub fn log(arg: Expression) -> Self {
        if let Some(c) = arg.as_const() {
            if c.is_one() {
                return Self::zero();
            }
        }
        Self::from_node(Node::Log(arg))
    }

    pub fn sum(items: Vec<Expression>) -> Self {
        let mut konst = BigRational::zero();
        let mut out = Vec::with_capacity(items.len());
        for it in items {
            match it.node() {
                Node::Const(c) => konst += c,
                Node::Sum(inner) => {
                    for x in inner {
                        if let Some(c) = x.as_const() {
                            konst += c;
                        } else {
                            out.push(x.clone());
                        }
                    }
                }
                _ => out.push(it),
            }
        }
        if !konst.is_zero() {
            out.push(Self::constant(konst));
        }
        match out.len() {
            0 => Self::zero(),
            1 => out.pop().unwrap(),
            _ => Self::from_node(Node::Sum(out)),
        }
    }

    pub fn product(items: Vec<Expression>) -> Self {
        let mut konst = BigRational::one();
        let mut out = Vec::with_capacity(items.len());
        for it in items {
            match it.node() {
                Node::Const(c) => konst *= c,
                Node::Product(inner) => {
                    for x in inner {
                        if let Some(c) = x.as_const() {
                            konst *= c;
                        } else {
                            out.push(x.clone());
                        }
                    }
                }
                _ => out.push(it),
            }
        }
        if konst.is_zero() {
            return Self::zero();
        }
        if !konst.is_one() || out.is_empty() {
            out.insert(0, Self::constant(konst));
        }
        match out.len() {
            1 => out.pop().unwrap(),
            _ => Self::from_node(Node::Product(out)),
        }
    }

    pub fn pow(base: Expression, e: i32) -> Self {
        if e == 0 {
            return Self::one();
        }
        if e == 1 {
            return base;
        }
        if let Some(c) = base.as_const() {
            if !(c.is_zero() && e < 0) {
                return Self::constant(pow_rational(c, e));
            }
        }
        Self::from_node(Node::Pow(base, e))
    }

    pub fn quotient(num: Expression, den: Expression) -> Self {
        if let Some(d) = den.as_const() {
            if d.is_one() {
                return num;
            }
            if !d.is_zero() {
                return Self::product(vec![Self::constant(d.recip()), num]);
            }
        }
        if num.is_zero() {
            return Self::zero();
        }
        Self::from_node(Node::Quotient(num, den))
    }

    pub fn neg(&self) -> Self {
        Self::product(vec![Self::int(-1), self.clone()])
    }

    pub fn add(&self, rhs: &Expression) -> Self {
        Self::sum(vec![self.clone(), rhs.clone()])
    }

    pub fn sub(&self, rhs: &Expression) -> Self {
        Self::sum(vec![self.clone(), rhs.neg()])
    }

    pub fn mul(&self, rhs: &Expression) -> Self {
        Self::product(vec![self.clone(), rhs.clone()])
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::product(vec![Self::constant(c.clone()), self.clone()])
    }

    pub fn as_const(&self) -> Option<&BigRational> {
        match self.node() {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.as_const(), Some(c) if c.is_zero())
    }

    /// Largest variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self.node() {
            Node::Const(_) => None,
            Node::Var(i) => Some(*i),
            Node::Exp(f) => f.keys().next_back().copied(),
            Node::Log(a) => a.max_var(),
            Node::Sum(v) | Node::Product(v) => v.iter().filter_map(|x| x.max_var()).max(),
            Node::Pow(b, _) => b.max_var(),
            Node::Quotient(a, b) => a.max_var().max(b.max_var()),
        }
    }

    pub fn contains_log(&self) -> bool {
        match self.node() {
            Node::Log(_) => true,
            Node::Const(_) | Node::Var(_) | Node::Exp(_) => false,
            Node::Sum(v) | Node::Product(v) => v.iter().any(|x| x.contains_log()),
            Node::Pow(b, _) => b.contains_log(),
            Node::Quotient(a, b) => a.contains_log() || b.contains_log(),
        }
    }

    pub fn contains_exp(&self) -> bool {
        match self.node() {
            Node::Exp(_) => true,
            Node::Const(_) | Node::Var(_) => false,
            Node::Log(a) => a.contains_exp(),
            Node::Sum(v) | Node::Product(v) => v.iter().any(|x| x.contains_exp()),
            Node::Pow(b, _) => b.contains_exp(),
            Node::Quotient(a, b) => a.contains_exp() || b.contains_exp(),
        }
    }

    /// Exact partial derivative with respect to `t_{i+1}`.
    pub fn diff(&self, i: usize) -> Expression {
        match self.node() {
            Node::Const(_) => Self::zero(),
            Node::Var(j) => {
                if *j == i {
                    Self::one()
                } else {
                    Self::zero()
                }
            }
            Node::Exp(form) => match form.get(&i) {
                Some(c) => Self::product(vec![Self::constant(c.clone()), self.clone()]),
                None => Self::zero(),
            },
            Node::Log(a) => {
                let da = a.diff(i);
                if da.is_zero() {
                    Self::zero()
                } else {
                    Self::quotient(da, a.clone())
                }
            }
            Node::Sum(items) => Self::sum(items.iter().map(|x| x.diff(i)).collect()),
            Node::Product(items) => {
                let mut terms = Vec::new();
                for (k, item) in items.iter().enumerate() {
                    let d = item.diff(i);
                    if d.is_zero() {
                        continue;
                    }
                    let mut factors: Vec<Expression> = items.clone();
                    factors[k] = d;
                    terms.push(Self::product(factors));
                }
                Self::sum(terms)
            }
            Node::Pow(b, e) => {
                let db = b.diff(i);
                if db.is_zero() {
                    return Self::zero();
                }
                Self::product(vec![Self::int(*e as i64), Self::pow(b.clone(), e - 1), db])
            }
            Node::Quotient(a, b) => {
                let da = a.diff(i);
                let db = b.diff(i);
                if db.is_zero() {
                    return Self::quotient(da, b.clone());
                }
                let num = Self::sum(vec![
                    Self::product(vec![da, b.clone()]),
                    Self::product(vec![Self::int(-1), a.clone(), db]),
                ]);
                Self::quotient(num, Self::pow(b.clone(), 2))
            }
        }
    }

    /// Evaluates with an arbitrary backend; `point[i]` is the value of `t_{i+1}`.
    pub fn eval_with<S: Scalar>(&self, point: &[S], prec: Precision) -> Result<S, EvalError> {
        match self.node() {
            Node::Const(c) => Ok(S::from_rational(c, prec)),
            Node::Var(i) => point.get(*i).cloned().ok_or(EvalError::UnassignedVariable(i + 1)),
            Node::Exp(form) => {
                let mut arg = S::zero_at(prec);
                for (i, c) in form {
                    let v = point.get(*i).ok_or(EvalError::UnassignedVariable(i + 1))?;
                    arg = arg + S::from_rational(c, prec) * v.clone();
                }
                arg.exp()
            }
            Node::Log(a) => a.eval_with(point, prec)?.ln(),
            Node::Sum(items) => {
                let mut acc = S::zero_at(prec);
                for x in items {
                    acc = acc + x.eval_with(point, prec)?;
                }
                Ok(acc)
            }
            Node::Product(items) => {
                let mut acc = S::one_at(prec);
                for x in items {
                    acc = acc * x.eval_with(point, prec)?;
                }
                Ok(acc)
            }
            Node::Pow(b, e) => b.eval_with(point, prec)?.powi(*e, prec),
            Node::Quotient(a, b) => {
                let d = b.eval_with(point, prec)?;
                let n = a.eval_with(point, prec)?;
                n.checked_div(d)
            }
        }
    }

    /// Exact value on rational points when possible, otherwise a float at the
    /// point's precision.
    pub fn evaluate(&self, p: &EvaluationPoint) -> Result<Value, EvalError> {
        if let Some(exact) = p.exact_coords() {
            match self.eval_with::<BigRational>(&exact, p.precision) {
                Ok(v) => return Ok(Value::Exact(v)),
                Err(EvalError::Inexact) => {}
                Err(e) => return Err(e),
            }
        }
        let f = p.float_coords();
        self.eval_with::<MpFloat>(&f, p.precision).map(Value::Float)
    }
}

fn pow_rational(c: &BigRational, e: i32) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..e.unsigned_abs() {
        acc *= c;
    }
    if e < 0 {
        acc.recip()
    } else {
        acc
    }
}

/// A coordinate value: exact rational or multiprecision float.
#[derive(Debug, Clone, PartialEq)]
pub enum Coordinate {
    Exact(BigRational),
    Float(MpFloat),
}

/// Assignment of values to t1..tn with a working precision for float paths.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationPoint {
    pub coords: Vec<Option<Coordinate>>,
    pub precision: Precision,
}

impl EvaluationPoint {
    pub fn rational(values: Vec<BigRational>, precision: Precision) -> Self {
        EvaluationPoint { coords: values.into_iter().map(|v| Some(Coordinate::Exact(v))).collect(), precision }
    }

    pub fn float(values: Vec<MpFloat>, precision: Precision) -> Self {
        EvaluationPoint { coords: values.into_iter().map(|v| Some(Coordinate::Float(v))).collect(), precision }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// All coordinates as rationals, if every one is exact and assigned.
    pub fn exact_coords(&self) -> Option<Vec<BigRational>> {
        self.coords
            .iter()
            .map(|c| match c {
                Some(Coordinate::Exact(q)) => Some(q.clone()),
                _ => None,
            })
            .collect()
    }

    /// Float coordinates; unassigned slots are filled with NaN-free zeros only
    /// for indices never referenced (callers check assignment separately).
    pub fn float_coords(&self) -> Vec<MpFloat> {
        self.coords
            .iter()
            .map(|c| match c {
                Some(Coordinate::Exact(q)) => MpFloat::from_rational(q, self.precision),
                Some(Coordinate::Float(f)) => f.clone(),
                None => MpFloat::zero_at(self.precision),
            })
            .collect()
    }

    /// Coordinates converted to any backend. Fails on unassigned slots.
    pub fn coords_as<S: Scalar>(&self) -> Result<Vec<S>, EvalError> {
        self.coords
            .iter()
            .enumerate()
            .map(|(i, c)| match c {
                Some(Coordinate::Exact(q)) => Ok(S::from_rational(q, self.precision)),
                Some(Coordinate::Float(f)) => {
                    if S::is_exact() {
                        Err(EvalError::Inexact)
                    } else {
                        Ok(S::from_rational(&f64_to_rational(f.as_f64()), self.precision))
                    }
                }
                None => Err(EvalError::UnassignedVariable(i + 1)),
            })
            .collect()
    }
}

/// Exact rational value of a finite double.
pub fn f64_to_rational(v: f64) -> BigRational {
    BigRational::from_float(v).unwrap_or_else(BigRational::zero)
}

/// Result of [`Expression::evaluate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Exact(BigRational),
    Float(MpFloat),
}

impl Value {
    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(q) => crate::scalar::rational_to_f64(q),
            Value::Float(f) => f.as_f64(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Value::Exact(_))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Exact(q) => write!(f, "{q}"),
            Value::Float(x) => write!(f, "{x}"),
        }
    }
}

// Display in the model-file syntax; `parse(&e.to_string())` reproduces `e`
// up to smart-constructor folding.
impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(self, f, 0)
    }
}

impl fmt::Debug for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expression({self})")
    }
}

// Precedence levels: 0 sum, 1 product, 2 power operand / unary.
fn write_expr(e: &Expression, f: &mut fmt::Formatter<'_>, ctx: u8) -> fmt::Result {
    match e.node() {
        Node::Const(c) => {
            let needs = (c.is_negative() && ctx > 0) || (!c.is_integer() && ctx > 0);
            if needs {
                write!(f, "(")?;
            }
            if c.is_integer() {
                write!(f, "{}", c.numer())?;
            } else {
                write!(f, "{}/{}", c.numer(), c.denom())?;
            }
            if needs {
                write!(f, ")")?;
            }
            Ok(())
        }
        Node::Var(i) => write!(f, "t{}", i + 1),
        Node::Exp(form) => {
            write!(f, "exp(")?;
            for (k, (i, c)) in form.iter().enumerate() {
                if k > 0 {
                    write!(f, " + ")?;
                }
                if c.is_one() {
                    write!(f, "t{}", i + 1)?;
                } else if c.is_integer() && !c.is_negative() {
                    write!(f, "{}*t{}", c.numer(), i + 1)?;
                } else {
                    write!(f, "({})*t{}", display_rat(c), i + 1)?;
                }
            }
            write!(f, ")")
        }
        Node::Log(a) => {
            write!(f, "log(")?;
            write_expr(a, f, 0)?;
            write!(f, ")")
        }
        Node::Sum(items) => {
            if ctx > 0 {
                write!(f, "(")?;
            }
            for (k, x) in items.iter().enumerate() {
                if k > 0 {
                    write!(f, " + ")?;
                }
                write_expr(x, f, 1)?;
            }
            if ctx > 0 {
                write!(f, ")")?;
            }
            Ok(())
        }
        Node::Product(items) => {
            if ctx > 1 {
                write!(f, "(")?;
            }
            for (k, x) in items.iter().enumerate() {
                if k > 0 {
                    write!(f, "*")?;
                }
                write_expr(x, f, 2)?;
            }
            if ctx > 1 {
                write!(f, ")")?;
            }
            Ok(())
        }
        Node::Pow(b, e) => {
            write_expr(b, f, 3)?;
            if *e < 0 {
                write!(f, "^({e})")
            } else {
                write!(f, "^{e}")
            }
        }
        Node::Quotient(a, b) => {
            if ctx > 1 {
                write!(f, "(")?;
            }
            write_expr(a, f, 2)?;
            write!(f, "/")?;
            write_expr(b, f, 3)?;
            if ctx > 1 {
                write!(f, ")")?;
            }
            Ok(())
        }
    }
}

fn display_rat(c: &BigRational) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

/// Canonical form of an exp-polynomial expression (see [`ExpPoly`]).
pub fn normalize(f: &Expression) -> Result<Expression, ExprError> {
    Ok(ExpPoly::from_expr(f)?.to_expr())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(i: usize) -> Expression {
        Expression::var(i - 1)
    }

    fn p(vals: &[i64]) -> EvaluationPoint {
        EvaluationPoint::rational(vals.iter().map(|v| rat(*v, 1)).collect(), Precision::default())
    }

    #[test]
    fn polynomial_rule() {
        let f = Expression::product(vec![t(1), t(1), t(3)]);
        let d = normalize(&f.diff(0)).unwrap();
        let want = normalize(&Expression::product(vec![Expression::int(2), t(1), t(3)])).unwrap();
        assert_eq!(d, want);
    }

    #[test]
    fn exponential_rule() {
        let f = Expression::exp_var(2, rat(1, 1));
        assert_eq!(normalize(&f.diff(2)).unwrap(), normalize(&f).unwrap());
    }

    #[test]
    fn log_rule() {
        let f = Expression::log(t(2));
        let d = normalize(&f.diff(1)).unwrap();
        assert_eq!(d, normalize(&Expression::pow(t(2), -1)).unwrap());
    }

    #[test]
    fn evaluate_examples() {
        let f = t(1).add(&t(2));
        assert_eq!(f.evaluate(&p(&[1, 2])).unwrap(), Value::Exact(rat(3, 1)));
        let e = Expression::exp_var(2, rat(1, 1));
        assert_eq!(e.evaluate(&p(&[5, 5, 0])).unwrap(), Value::Exact(rat(1, 1)));
        let q = Expression::quotient(Expression::one(), t(2));
        assert_eq!(q.evaluate(&p(&[1, 0])), Err(EvalError::DivisionByZero));
    }

    #[test]
    fn unassigned_variable_is_reported() {
        let f = t(3);
        assert_eq!(f.evaluate(&p(&[1, 2])), Err(EvalError::UnassignedVariable(3)));
    }

    #[test]
    fn float_path_for_transcendentals() {
        let e = Expression::exp_var(0, rat(1, 1));
        match e.evaluate(&p(&[1])).unwrap() {
            Value::Float(x) => assert!((x.as_f64() - std::f64::consts::E).abs() < 1e-15),
            v => panic!("expected float, got {v:?}"),
        }
        let l = Expression::log(t(1));
        assert_eq!(l.evaluate(&p(&[-1])), Err(EvalError::LogOfNonPositive));
    }
}
