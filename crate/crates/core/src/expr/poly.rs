//! Canonical forms.
//!
//! An [`ExpPoly`] is a finite sum `sum c * t^a * exp(lambda . t)` with rational
//! `c`, integer (possibly negative) exponents `a` and rational frequency
//! vectors `lambda`. Distinct `(a, lambda)` give linearly independent
//! functions, so the sorted term map is a canonical form: two exp-polynomials
//! are equal as functions iff their maps are identical.
//!
//! [`LogPoly`] extends this with terms `P * log(A)` where `A` is a single
//! term; that closure is enough for every prepotential in the catalog and is
//! stable under differentiation.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{Expression, ExprError, LinearForm, Node};
use crate::scalar::{EvalError, Precision, Scalar};

/// Monomial-times-exponential key. Both vectors are sorted by variable index
/// and contain no zero entries.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct TermKey {
    pub powers: Vec<(usize, i32)>,
    pub exp: Vec<(usize, BigRational)>,
}

impl TermKey {
    pub fn one() -> Self {
        TermKey::default()
    }

    pub fn var(i: usize) -> Self {
        TermKey { powers: vec![(i, 1)], exp: Vec::new() }
    }

    pub fn power_of(&self, i: usize) -> i32 {
        self.powers.iter().find(|(j, _)| *j == i).map(|(_, e)| *e).unwrap_or(0)
    }

    pub fn exp_of(&self, i: usize) -> BigRational {
        self.exp.iter().find(|(j, _)| *j == i).map(|(_, c)| c.clone()).unwrap_or_else(BigRational::zero)
    }

    pub fn mul(&self, other: &TermKey) -> TermKey {
        let mut powers: BTreeMap<usize, i32> = self.powers.iter().cloned().collect();
        for (i, e) in &other.powers {
            *powers.entry(*i).or_insert(0) += e;
        }
        let mut exp: BTreeMap<usize, BigRational> = self.exp.iter().cloned().collect();
        for (i, c) in &other.exp {
            *exp.entry(*i).or_insert_with(BigRational::zero) += c;
        }
        TermKey {
            powers: powers.into_iter().filter(|(_, e)| *e != 0).collect(),
            exp: exp.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }

    pub fn inv(&self) -> TermKey {
        TermKey {
            powers: self.powers.iter().map(|(i, e)| (*i, -e)).collect(),
            exp: self.exp.iter().map(|(i, c)| (*i, -c.clone())).collect(),
        }
    }

    pub fn total_degree(&self) -> i32 {
        self.powers.iter().map(|(_, e)| e).sum()
    }

    /// Plain polynomial monomial: no exponential, no negative powers.
    pub fn is_polynomial(&self) -> bool {
        self.exp.is_empty() && self.powers.iter().all(|(_, e)| *e >= 0)
    }

    pub fn max_var(&self) -> Option<usize> {
        let a = self.powers.last().map(|(i, _)| *i);
        let b = self.exp.last().map(|(i, _)| *i);
        a.max(b)
    }

    pub fn to_expr(&self) -> Expression {
        let mut factors: Vec<Expression> =
            self.powers.iter().map(|(i, e)| Expression::pow(Expression::var(*i), *e)).collect();
        if !self.exp.is_empty() {
            let form: LinearForm = self.exp.iter().cloned().collect();
            factors.push(Expression::exp(form));
        }
        Expression::product(factors)
    }
}

/// Per-point evaluation cache shared across many polynomials.
pub struct TermEvaluator<'a, S: Scalar> {
    point: &'a [S],
    prec: Precision,
    exps: RefCell<HashMap<Vec<(usize, BigRational)>, S>>,
    coeffs: RefCell<HashMap<BigRational, S>>,
}

impl<'a, S: Scalar> TermEvaluator<'a, S> {
    pub fn new(point: &'a [S], prec: Precision) -> Self {
        TermEvaluator { point, prec, exps: RefCell::new(HashMap::new()), coeffs: RefCell::new(HashMap::new()) }
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }

    pub fn coeff(&self, c: &BigRational) -> S {
        if let Some(v) = self.coeffs.borrow().get(c) {
            return v.clone();
        }
        let v = S::from_rational(c, self.prec);
        self.coeffs.borrow_mut().insert(c.clone(), v.clone());
        v
    }

    fn coord(&self, i: usize) -> Result<&S, EvalError> {
        self.point.get(i).ok_or(EvalError::UnassignedVariable(i + 1))
    }

    pub fn term(&self, key: &TermKey) -> Result<S, EvalError> {
        let mut acc = S::one_at(self.prec);
        for (i, e) in &key.powers {
            acc = acc * self.coord(*i)?.powi(*e, self.prec)?;
        }
        if !key.exp.is_empty() {
            let cached = self.exps.borrow().get(&key.exp).cloned();
            let ev = match cached {
                Some(v) => v,
                None => {
                    let mut arg = S::zero_at(self.prec);
                    for (i, c) in &key.exp {
                        arg = arg + self.coeff(c) * self.coord(*i)?.clone();
                    }
                    let v = arg.exp()?;
                    self.exps.borrow_mut().insert(key.exp.clone(), v.clone());
                    v
                }
            };
            acc = acc * ev;
        }
        Ok(acc)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct ExpPoly {
    terms: BTreeMap<TermKey, BigRational>,
}

impl ExpPoly {
    pub fn zero() -> Self {
        ExpPoly::default()
    }

    pub fn constant(c: BigRational) -> Self {
        Self::term(TermKey::one(), c)
    }

    pub fn var(i: usize) -> Self {
        Self::term(TermKey::var(i), BigRational::one())
    }

    pub fn term(key: TermKey, c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(key, c);
        }
        ExpPoly { terms }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TermKey, &BigRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => {
                let (k, c) = self.terms.iter().next().unwrap();
                if *k == TermKey::one() {
                    Some(c.clone())
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    pub fn single_term(&self) -> Option<(&TermKey, &BigRational)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    pub fn has_exp(&self) -> bool {
        self.terms.keys().any(|k| !k.exp.is_empty())
    }

    pub fn max_var(&self) -> Option<usize> {
        self.terms.keys().filter_map(|k| k.max_var()).max()
    }

    fn add_term(&mut self, key: TermKey, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let remove = {
            let e = self.terms.entry(key.clone()).or_insert_with(BigRational::zero);
            *e += c;
            e.is_zero()
        };
        if remove {
            self.terms.remove(&key);
        }
    }

    pub fn add(&self, other: &ExpPoly) -> ExpPoly {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &ExpPoly) -> ExpPoly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> ExpPoly {
        self.scale(&-BigRational::one())
    }

    pub fn scale(&self, s: &BigRational) -> ExpPoly {
        if s.is_zero() {
            return ExpPoly::zero();
        }
        ExpPoly { terms: self.terms.iter().map(|(k, c)| (k.clone(), c * s)).collect() }
    }

    pub fn mul(&self, other: &ExpPoly) -> ExpPoly {
        let mut out = ExpPoly::zero();
        for (k1, c1) in &self.terms {
            for (k2, c2) in &other.terms {
                out.add_term(k1.mul(k2), c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, e: i32) -> Result<ExpPoly, ExprError> {
        if e < 0 {
            let inv = self.inverse()?;
            return inv.pow(-e);
        }
        let mut acc = ExpPoly::constant(BigRational::one());
        let mut base = self.clone();
        let mut k = e as u32;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        Ok(acc)
    }

    /// Inverse of a single nonzero term.
    pub fn inverse(&self) -> Result<ExpPoly, ExprError> {
        match self.single_term() {
            Some((k, c)) => Ok(ExpPoly::term(k.inv(), c.recip())),
            None => Err(ExprError::UnsupportedShape(if self.is_zero() {
                "division by the zero polynomial".into()
            } else {
                "quotient with a non-monomial denominator".into()
            })),
        }
    }

    pub fn diff(&self, i: usize) -> ExpPoly {
        let mut out = ExpPoly::zero();
        for (k, c) in &self.terms {
            let a = k.power_of(i);
            if a != 0 {
                let dk = k.mul(&TermKey { powers: vec![(i, -1)], exp: Vec::new() });
                out.add_term(dk, c * BigRational::from_integer(BigInt::from(a)));
            }
            let lam = k.exp_of(i);
            if !lam.is_zero() {
                out.add_term(k.clone(), c * lam);
            }
        }
        out
    }

    /// Splits into (part that is not a polynomial of degree <= 2, the rest).
    pub fn split_quadratic(&self) -> (ExpPoly, ExpPoly) {
        let mut high = ExpPoly::zero();
        let mut low = ExpPoly::zero();
        for (k, c) in &self.terms {
            if k.is_polynomial() && k.total_degree() <= 2 {
                low.add_term(k.clone(), c.clone());
            } else {
                high.add_term(k.clone(), c.clone());
            }
        }
        (high, low)
    }

    pub fn eval<S: Scalar>(&self, ev: &TermEvaluator<'_, S>) -> Result<S, EvalError> {
        let mut acc = S::zero_at(ev.precision());
        for (k, c) in &self.terms {
            acc = acc + ev.coeff(c) * ev.term(k)?;
        }
        Ok(acc)
    }

    pub fn eval_at<S: Scalar>(&self, point: &[S], prec: Precision) -> Result<S, EvalError> {
        self.eval(&TermEvaluator::new(point, prec))
    }

    /// Canonical expression tree; terms appear in key order.
    pub fn to_expr(&self) -> Expression {
        let items = self
            .terms
            .iter()
            .map(|(k, c)| Expression::product(vec![Expression::constant(c.clone()), k.to_expr()]))
            .collect();
        Expression::sum(items)
    }

    pub fn from_expr(e: &Expression) -> Result<ExpPoly, ExprError> {
        match e.node() {
            Node::Const(c) => Ok(ExpPoly::constant(c.clone())),
            Node::Var(i) => Ok(ExpPoly::var(*i)),
            Node::Exp(form) => Ok(ExpPoly::term(
                TermKey { powers: Vec::new(), exp: form.iter().map(|(i, c)| (*i, c.clone())).collect() },
                BigRational::one(),
            )),
            Node::Log(_) => Err(ExprError::UnsupportedShape("logarithm".into())),
            Node::Sum(items) => {
                let mut acc = ExpPoly::zero();
                for x in items {
                    acc = acc.add(&ExpPoly::from_expr(x)?);
                }
                Ok(acc)
            }
            Node::Product(items) => {
                let mut acc = ExpPoly::constant(BigRational::one());
                for x in items {
                    acc = acc.mul(&ExpPoly::from_expr(x)?);
                }
                Ok(acc)
            }
            Node::Pow(b, k) => ExpPoly::from_expr(b)?.pow(*k),
            Node::Quotient(a, b) => {
                let den = ExpPoly::from_expr(b)?;
                Ok(ExpPoly::from_expr(a)?.mul(&den.inverse()?))
            }
        }
    }

    /// Applies the vector field `sum_a (w_a t^a + s_a) d/dt^a`.
    pub fn apply_field(&self, weights: &[BigRational], shifts: &[BigRational]) -> ExpPoly {
        let mut out = ExpPoly::zero();
        for (a, (w, s)) in weights.iter().zip(shifts).enumerate() {
            let d = self.diff(a);
            if d.is_zero() {
                continue;
            }
            if !w.is_zero() {
                out = out.add(&d.mul(&ExpPoly::var(a)).scale(w));
            }
            if !s.is_zero() {
                out = out.add(&d.scale(s));
            }
        }
        out
    }
}

/// Argument of a logarithm: a single nonzero term `coeff * key`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LogArg {
    pub coeff: BigRational,
    pub key: TermKey,
}

impl LogArg {
    fn to_poly(&self) -> ExpPoly {
        ExpPoly::term(self.key.clone(), self.coeff.clone())
    }

    /// d/dt_i log(arg), an exp-polynomial.
    fn dlog(&self, i: usize) -> ExpPoly {
        let a = self.key.power_of(i);
        let mut out = ExpPoly::constant(self.key.exp_of(i));
        if a != 0 {
            out = out.add(&ExpPoly::term(
                TermKey { powers: vec![(i, -1)], exp: Vec::new() },
                BigRational::from_integer(BigInt::from(a)),
            ));
        }
        out
    }
}

/// `base + sum_j P_j * log(A_j)` with single-term arguments `A_j`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct LogPoly {
    pub base: ExpPoly,
    pub logs: BTreeMap<LogArg, ExpPoly>,
}

impl From<ExpPoly> for LogPoly {
    fn from(base: ExpPoly) -> Self {
        LogPoly { base, logs: BTreeMap::new() }
    }
}

impl LogPoly {
    pub fn is_log_free(&self) -> bool {
        self.logs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.base.is_zero() && self.logs.is_empty()
    }

    pub fn as_exp_poly(&self) -> Option<&ExpPoly> {
        if self.logs.is_empty() {
            Some(&self.base)
        } else {
            None
        }
    }

    pub fn max_var(&self) -> Option<usize> {
        let mut m = self.base.max_var();
        for (a, p) in &self.logs {
            m = m.max(a.key.max_var()).max(p.max_var());
        }
        m
    }

    fn add_log(&mut self, arg: LogArg, p: ExpPoly) {
        if p.is_zero() {
            return;
        }
        let merged = match self.logs.get(&arg) {
            Some(q) => q.add(&p),
            None => p,
        };
        if merged.is_zero() {
            self.logs.remove(&arg);
        } else {
            self.logs.insert(arg, merged);
        }
    }

    pub fn add(&self, other: &LogPoly) -> LogPoly {
        let mut out = LogPoly::from(self.base.add(&other.base));
        out.logs = self.logs.clone();
        for (a, p) in &other.logs {
            out.add_log(a.clone(), p.clone());
        }
        out
    }

    pub fn scale(&self, s: &BigRational) -> LogPoly {
        let mut out = LogPoly::from(self.base.scale(s));
        for (a, p) in &self.logs {
            out.add_log(a.clone(), p.scale(s));
        }
        out
    }

    pub fn mul_poly(&self, q: &ExpPoly) -> LogPoly {
        let mut out = LogPoly::from(self.base.mul(q));
        for (a, p) in &self.logs {
            out.add_log(a.clone(), p.mul(q));
        }
        out
    }

    pub fn mul(&self, other: &LogPoly) -> Result<LogPoly, ExprError> {
        match (self.as_exp_poly(), other.as_exp_poly()) {
            (_, Some(q)) => Ok(self.mul_poly(q)),
            (Some(p), None) => Ok(other.mul_poly(p)),
            (None, None) => Err(ExprError::UnsupportedShape("product of logarithms".into())),
        }
    }

    pub fn diff(&self, i: usize) -> LogPoly {
        let mut out = LogPoly::from(self.base.diff(i));
        for (a, p) in &self.logs {
            out.add_log(a.clone(), p.diff(i));
            let dl = a.dlog(i);
            if !dl.is_zero() {
                out.base = out.base.add(&p.mul(&dl));
            }
        }
        out
    }

    pub fn apply_field(&self, weights: &[BigRational], shifts: &[BigRational]) -> LogPoly {
        let mut out = LogPoly::default();
        for (a, (w, s)) in weights.iter().zip(shifts).enumerate() {
            let d = self.diff(a);
            if d.is_zero() {
                continue;
            }
            if !w.is_zero() {
                out = out.add(&d.mul_poly(&ExpPoly::var(a)).scale(w));
            }
            if !s.is_zero() {
                out = out.add(&d.scale(s));
            }
        }
        out
    }

    /// (non-quadratic part, polynomial part of degree <= 2). Log terms are
    /// never quadratic.
    pub fn split_quadratic(&self) -> (LogPoly, ExpPoly) {
        let (high, low) = self.base.split_quadratic();
        (LogPoly { base: high, logs: self.logs.clone() }, low)
    }

    pub fn eval<S: Scalar>(&self, ev: &TermEvaluator<'_, S>) -> Result<S, EvalError> {
        let mut acc = self.base.eval(ev)?;
        for (a, p) in &self.logs {
            let arg = ev.coeff(&a.coeff) * ev.term(&a.key)?;
            acc = acc + p.eval(ev)? * arg.ln()?;
        }
        Ok(acc)
    }

    pub fn to_expr(&self) -> Expression {
        let mut items = vec![self.base.to_expr()];
        for (a, p) in &self.logs {
            items.push(Expression::product(vec![p.to_expr(), Expression::log(a.to_poly().to_expr())]));
        }
        Expression::sum(items)
    }

    pub fn from_expr(e: &Expression) -> Result<LogPoly, ExprError> {
        if !e.contains_log() {
            return Ok(LogPoly::from(ExpPoly::from_expr(e)?));
        }
        match e.node() {
            Node::Log(arg) => {
                let a = ExpPoly::from_expr(arg)?;
                let (key, coeff) = a.single_term().ok_or_else(|| {
                    ExprError::UnsupportedShape("logarithm of a non-monomial argument".into())
                })?;
                if !coeff.is_positive() && key.powers.is_empty() {
                    return Err(ExprError::UnsupportedShape("logarithm of a non-positive constant".into()));
                }
                let mut out = LogPoly::default();
                out.add_log(LogArg { coeff: coeff.clone(), key: key.clone() }, ExpPoly::constant(BigRational::one()));
                Ok(out)
            }
            Node::Sum(items) => {
                let mut acc = LogPoly::default();
                for x in items {
                    acc = acc.add(&LogPoly::from_expr(x)?);
                }
                Ok(acc)
            }
            Node::Product(items) => {
                let mut acc = LogPoly::from(ExpPoly::constant(BigRational::one()));
                for x in items {
                    acc = acc.mul(&LogPoly::from_expr(x)?)?;
                }
                Ok(acc)
            }
            Node::Quotient(a, b) => {
                if b.contains_log() {
                    return Err(ExprError::UnsupportedShape("logarithm in a denominator".into()));
                }
                let den = ExpPoly::from_expr(b)?.inverse()?;
                Ok(LogPoly::from_expr(a)?.mul_poly(&den))
            }
            Node::Pow(b, 1) => LogPoly::from_expr(b),
            _ => Err(ExprError::UnsupportedShape("nonlinear use of a logarithm".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{normalize, parse, rat};
    use proptest::prelude::*;

    fn ep(s: &str) -> ExpPoly {
        ExpPoly::from_expr(&parse(s).unwrap()).unwrap()
    }

    #[test]
    fn cancellation_normalizes_to_zero() {
        assert!(ep("t1*t2 - t2*t1").is_zero());
        assert_eq!(normalize(&parse("t1*t2 - t2*t1").unwrap()).unwrap(), Expression::zero());
    }

    #[test]
    fn exponentials_combine() {
        let e = ep("exp(t3)*exp(t3)");
        let (k, c) = e.single_term().unwrap();
        assert_eq!(*c, rat(1, 1));
        assert_eq!(k.exp, vec![(2, rat(2, 1))]);
    }

    #[test]
    fn monomial_quotient_cancels() {
        assert_eq!(ep("(t2)^2/t2"), ep("t2"));
    }

    #[test]
    fn non_monomial_denominator_is_rejected() {
        let r = ExpPoly::from_expr(&parse("1/(t1 + t2)").unwrap());
        assert!(matches!(r, Err(ExprError::UnsupportedShape(_))));
        let r = normalize(&parse("log(t1)").unwrap());
        assert!(matches!(r, Err(ExprError::UnsupportedShape(_))));
    }

    #[test]
    fn log_poly_derivatives_close_up() {
        let f = LogPoly::from_expr(&parse("1/2*t1^2*(log(t1) - 3/4)").unwrap()).unwrap();
        let d3 = f.diff(0).diff(0).diff(0);
        assert!(d3.is_log_free());
        assert_eq!(d3.base, ep("1/t1"));
    }

    #[test]
    fn quadratic_split() {
        let (hi, lo) = ep("t1^2 + t1*t2 + t1^3 + exp(t2) + 3").split_quadratic();
        assert_eq!(hi, ep("t1^3 + exp(t2)"));
        assert_eq!(lo, ep("t1^2 + t1*t2 + 3"));
    }

    fn arb_poly() -> impl Strategy<Value = ExpPoly> {
        let term = (
            -3i64..=3,
            prop::collection::vec(0i32..=3, 3),
            prop::collection::vec(-2i64..=2, 3),
        )
            .prop_map(|(c, pw, ex)| {
                let key = TermKey {
                    powers: pw.iter().enumerate().filter(|(_, e)| **e != 0).map(|(i, e)| (i, *e)).collect(),
                    exp: ex.iter().enumerate().filter(|(_, c)| **c != 0).map(|(i, c)| (i, rat(*c, 2))).collect(),
                };
                ExpPoly::term(key, rat(c, 1))
            });
        prop::collection::vec(term, 0..5).prop_map(|ts| ts.iter().fold(ExpPoly::zero(), |a, t| a.add(t)))
    }

    proptest! {
        #[test]
        fn normalization_is_idempotent(p in arb_poly()) {
            let once = normalize(&p.to_expr()).unwrap();
            let twice = normalize(&once).unwrap();
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn mixed_partials_commute(p in arb_poly(), i in 0usize..3, j in 0usize..3) {
            prop_assert_eq!(p.diff(i).diff(j), p.diff(j).diff(i));
        }

        #[test]
        fn tree_and_canonical_derivatives_agree(p in arb_poly(), i in 0usize..3) {
            let via_tree = ExpPoly::from_expr(&p.to_expr().diff(i)).unwrap();
            prop_assert_eq!(via_tree, p.diff(i));
        }

        #[test]
        fn normalization_respects_exact_evaluation(
            p in arb_poly(),
            a in -4i64..=4, b in 1i64..=3, c in -4i64..=4,
        ) {
            // Exact evaluation only exists where exponentials are trivial;
            // zero out exp-bearing coordinates by evaluating at t = 0 there.
            let pt = [rat(a, b), rat(c, b), rat(0, 1)];
            let tree = parse(&p.to_expr().to_string()).unwrap();
            let lhs = tree.eval_with::<BigRational>(&pt, Precision::default());
            let rhs = p.eval_at::<BigRational>(&pt, Precision::default());
            match (lhs, rhs) {
                (Ok(x), Ok(y)) => prop_assert_eq!(x, y),
                (Err(x), Err(y)) => prop_assert_eq!(x, y),
                (x, y) => prop_assert!(false, "mismatch {:?} vs {:?}", x, y),
            }
        }
    }
}
