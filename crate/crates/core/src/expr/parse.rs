//! Recursive-descent parser for the model-file expression syntax.
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' exponent)?
//! atom    := number | 't' index | name | exp(sum) | log(sum) | '(' sum ')'
//! ```
//!
//! Exponents must fold to integer constants and `exp` arguments to rational
//! linear forms without a constant term. Named parameters (for example `r`
//! or `h`) are substituted as rationals at parse time.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use super::{Expression, LinearForm};
use super::poly::ExpPoly;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at byte {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

pub fn parse(src: &str) -> Result<Expression, ParseError> {
    parse_with_params(src, &BTreeMap::new())
}

pub fn parse_with_params(src: &str, params: &BTreeMap<String, BigRational>) -> Result<Expression, ParseError> {
    let mut p = Parser { src: src.as_bytes(), pos: 0, params };
    let e = p.sum()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    params: &'a BTreeMap<String, BigRational>,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError { pos: self.pos, msg: msg.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(format!("expected '{}'", c as char)))
        }
    }

    fn sum(&mut self) -> Result<Expression, ParseError> {
        let mut items = vec![self.product()?];
        loop {
            if self.eat(b'+') {
                items.push(self.product()?);
            } else if self.eat(b'-') {
                items.push(self.product()?.neg());
            } else {
                break;
            }
        }
        Ok(Expression::sum(items))
    }

    fn product(&mut self) -> Result<Expression, ParseError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                let rhs = self.unary()?;
                acc = acc.mul(&rhs);
            } else if self.eat(b'/') {
                let at = self.pos;
                let rhs = self.unary()?;
                if rhs.is_zero() {
                    return Err(ParseError { pos: at, msg: "division by literal zero".into() });
                }
                acc = Expression::quotient(acc, rhs);
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Expression, ParseError> {
        if self.eat(b'-') {
            return Ok(self.unary()?.neg());
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expression, ParseError> {
        let base = self.atom()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        let at = self.pos;
        let neg = self.eat(b'-');
        let e = self.atom()?;
        let k = e
            .as_const()
            .filter(|c| c.is_integer())
            .and_then(|c| c.to_integer().to_i32())
            .ok_or(ParseError { pos: at, msg: "exponent must be an integer constant".into() })?;
        Ok(Expression::pow(base, if neg { -k } else { k }))
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn atom(&mut self) -> Result<Expression, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.sum()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let at = self.pos;
                let name = self.ident();
                match name.as_str() {
                    "exp" => {
                        self.expect(b'(')?;
                        let arg_at = self.pos;
                        let arg = self.sum()?;
                        self.expect(b')')?;
                        linear_form(&arg)
                            .map(Expression::exp)
                            .ok_or(ParseError { pos: arg_at, msg: "exp argument must be a linear form in t1..tn".into() })
                    }
                    "log" => {
                        self.expect(b'(')?;
                        let arg = self.sum()?;
                        self.expect(b')')?;
                        Ok(Expression::log(arg))
                    }
                    _ => {
                        if let Some(v) = self.params.get(&name) {
                            return Ok(Expression::constant(v.clone()));
                        }
                        if let Some(idx) = name.strip_prefix('t').and_then(|s| s.parse::<usize>().ok()) {
                            if idx >= 1 && !name[1..].starts_with('0') {
                                return Ok(Expression::var(idx - 1));
                            }
                        }
                        Err(ParseError { pos: at, msg: format!("unknown identifier '{name}'") })
                    }
                }
            }
            Some(c) => Err(self.err(format!("unexpected character '{}'", c as char))),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Expression, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let int_part = &self.src[start..self.pos];
        let mut frac_part: &[u8] = &[];
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            let fs = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            frac_part = &self.src[fs..self.pos];
        }
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(ParseError { pos: start, msg: "malformed number".into() });
        }
        let digits: String = int_part.iter().chain(frac_part).map(|&b| b as char).collect();
        let num: BigInt = digits.parse().map_err(|_| ParseError { pos: start, msg: "malformed number".into() })?;
        let den = BigInt::from(10u32).pow(frac_part.len() as u32);
        Ok(Expression::constant(BigRational::new(num, den)))
    }
}

fn linear_form(arg: &Expression) -> Option<LinearForm> {
    let p = ExpPoly::from_expr(arg).ok()?;
    let mut form = LinearForm::new();
    for (k, c) in p.terms() {
        if !k.exp.is_empty() || k.powers.len() != 1 || k.powers[0].1 != 1 {
            return None;
        }
        form.insert(k.powers[0].0, c.clone());
    }
    if form.values().all(|c| c.is_zero()) && !p.is_zero() {
        return None;
    }
    Some(form)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{normalize, rat};

    #[test]
    fn parses_model_syntax() {
        let f = parse("1/2*t1^2*t3 + 1/2*t1*t2^2 - 1/24*t2^4 + t2*exp(t3)").unwrap();
        assert_eq!(f.max_var(), Some(2));
        assert!(f.contains_exp());
        let g = parse("t1*t2 - t2*t1 + 0.5").unwrap();
        assert_eq!(normalize(&g).unwrap(), Expression::constant(rat(1, 2)));
    }

    #[test]
    fn negative_and_parameter_exponents() {
        let mut params = BTreeMap::new();
        params.insert("h".to_string(), rat(5, 1));
        params.insert("r".to_string(), rat(2, 1));
        let f = parse_with_params("t2^(h+1) + exp(r*t2) + t1^-2", &params).unwrap();
        let want = parse("t2^6 + exp(2*t2) + t1^(-2)").unwrap();
        assert_eq!(normalize(&f).unwrap(), normalize(&want).unwrap());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse("exp(t1^2)").is_err());
        assert!(parse("exp(1 + t1)").is_err());
        assert!(parse("t1^t2").is_err());
        assert!(parse("x + 1").is_err());
        assert!(parse("t0").is_err());
        assert!(parse("(t1").is_err());
        assert!(parse("t1 t2").is_err());
        assert!(parse("t1/0").is_err());
    }

    #[test]
    fn display_round_trips() {
        let src = "1/2*t1^2*t3 - t2^(-1) + log(t2) + exp((1/2)*t3 - t1)/t2";
        let e = parse(src).unwrap();
        let again = parse(&e.to_string()).unwrap();
        assert_eq!(e, again);
    }
}
