//! Numeric backends shared by every evaluator.
//!
//! All pointwise computations are generic over [`Scalar`]. Three backends
//! exist: exact [`BigRational`] (no transcendental functions except at the
//! trivial arguments), `f64`, and [`MpFloat`], a binary floating point type
//! whose working precision is chosen in decimal digits.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use dashu_int::{IBig, Sign, UBig};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Default working precision in decimal digits.
pub const DEFAULT_DIGITS: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("logarithm of a non-positive value")]
    LogOfNonPositive,
    #[error("variable t{0} is not assigned")]
    UnassignedVariable(usize),
    #[error("value is not representable exactly (transcendental function at a nonzero argument)")]
    Inexact,
    #[error("square root of a negative value")]
    NegativeSqrt,
}

/// Working precision for floating evaluation, in decimal digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Precision {
    pub digits: u32,
}

impl Precision {
    pub fn new(digits: u32) -> Self {
        Precision { digits: digits.max(16) }
    }

    /// Binary mantissa length, with a guard of 16 bits.
    pub fn bits(&self) -> usize {
        (self.digits as f64 * std::f64::consts::LOG2_10).ceil() as usize + 16
    }

    /// Smallest relative spacing representable at this precision.
    pub fn epsilon(&self) -> f64 {
        10f64.powi(-(self.digits.min(300) as i32))
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision::new(DEFAULT_DIGITS)
    }
}

pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_rational(q: &BigRational, prec: Precision) -> Self;
    fn vanishes(&self) -> bool;
    fn exp(&self) -> Result<Self, EvalError>;
    fn ln(&self) -> Result<Self, EvalError>;
    fn magnitude(&self) -> Self;
    fn as_f64(&self) -> f64;
    /// True when the backend carries no rounding error.
    fn is_exact() -> bool;

    fn from_i64(v: i64, prec: Precision) -> Self {
        Self::from_rational(&BigRational::from_integer(BigInt::from(v)), prec)
    }

    fn zero_at(prec: Precision) -> Self {
        Self::from_i64(0, prec)
    }

    fn one_at(prec: Precision) -> Self {
        Self::from_i64(1, prec)
    }

    fn powi(&self, e: i32, prec: Precision) -> Result<Self, EvalError> {
        if e < 0 {
            if self.vanishes() {
                return Err(EvalError::DivisionByZero);
            }
            let p = self.powi(-e, prec)?;
            return Ok(Self::one_at(prec) / p);
        }
        let mut base = self.clone();
        let mut acc = Self::one_at(prec);
        let mut k = e as u32;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base.clone();
            }
            k >>= 1;
            if k > 0 {
                base = base.clone() * base;
            }
        }
        Ok(acc)
    }

    fn checked_div(self, rhs: Self) -> Result<Self, EvalError> {
        if rhs.vanishes() {
            Err(EvalError::DivisionByZero)
        } else {
            Ok(self / rhs)
        }
    }
}

/// Ordered scalars with square roots; needed by root finding and pivoting.
pub trait Real: Scalar + PartialOrd {
    fn from_f64(v: f64, prec: Precision) -> Self;
    fn sqrt(&self) -> Result<Self, EvalError>;
    fn max_of(a: Self, b: Self) -> Self {
        if a.partial_cmp(&b) == Some(Ordering::Less) {
            b
        } else {
            a
        }
    }
}

impl Scalar for BigRational {
    fn from_rational(q: &BigRational, _: Precision) -> Self {
        q.clone()
    }
    fn vanishes(&self) -> bool {
        Zero::is_zero(self)
    }
    fn exp(&self) -> Result<Self, EvalError> {
        if Zero::is_zero(self) {
            Ok(BigRational::one())
        } else {
            Err(EvalError::Inexact)
        }
    }
    fn ln(&self) -> Result<Self, EvalError> {
        if !self.is_positive() {
            Err(EvalError::LogOfNonPositive)
        } else if One::is_one(self) {
            Ok(BigRational::zero())
        } else {
            Err(EvalError::Inexact)
        }
    }
    fn magnitude(&self) -> Self {
        Signed::abs(self)
    }
    fn as_f64(&self) -> f64 {
        rational_to_f64(self)
    }
    fn is_exact() -> bool {
        true
    }
}

impl Real for BigRational {
    fn from_f64(v: f64, _: Precision) -> Self {
        BigRational::from_float(v).unwrap_or_else(BigRational::zero)
    }
    /// Exact square roots of perfect squares only.
    fn sqrt(&self) -> Result<Self, EvalError> {
        if self.is_negative() {
            return Err(EvalError::NegativeSqrt);
        }
        let n = self.numer().sqrt();
        let d = self.denom().sqrt();
        if &(&n * &n) == self.numer() && &(&d * &d) == self.denom() {
            Ok(BigRational::new(n, d))
        } else {
            Err(EvalError::Inexact)
        }
    }
}

impl Scalar for f64 {
    fn from_rational(q: &BigRational, _: Precision) -> Self {
        rational_to_f64(q)
    }
    fn vanishes(&self) -> bool {
        *self == 0.0
    }
    fn exp(&self) -> Result<Self, EvalError> {
        Ok(f64::exp(*self))
    }
    fn ln(&self) -> Result<Self, EvalError> {
        if *self <= 0.0 {
            Err(EvalError::LogOfNonPositive)
        } else {
            Ok(f64::ln(*self))
        }
    }
    fn magnitude(&self) -> Self {
        f64::abs(*self)
    }
    fn as_f64(&self) -> f64 {
        *self
    }
    fn is_exact() -> bool {
        false
    }
}

impl Real for f64 {
    fn from_f64(v: f64, _: Precision) -> Self {
        v
    }
    fn sqrt(&self) -> Result<Self, EvalError> {
        if *self < 0.0 {
            Err(EvalError::NegativeSqrt)
        } else {
            Ok(f64::sqrt(*self))
        }
    }
}

pub fn rational_to_f64(q: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (q.numer().to_f64(), q.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // Large numerator or denominator: shift both down before dividing.
    let nb = q.numer().bits() as i64;
    let db = q.denom().bits() as i64;
    let shift_n = (nb - 900).max(0) as usize;
    let shift_d = (db - 900).max(0) as usize;
    let n = (q.numer() >> shift_n).to_f64().unwrap_or(0.0);
    let d = (q.denom() >> shift_d).to_f64().unwrap_or(1.0);
    n / d * 2f64.powi(shift_n as i32 - shift_d as i32)
}

type Fb = FBig<HalfEven, 2>;

/// Binary multiprecision float.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct MpFloat(Fb);

fn to_ibig(v: &BigInt) -> IBig {
    let (sign, bytes) = v.to_bytes_le();
    let mag = UBig::from_le_bytes(&bytes);
    let s = if sign == num_bigint::Sign::Minus {
        Sign::Negative
    } else {
        Sign::Positive
    };
    IBig::from_parts(s, mag)
}

impl MpFloat {
    pub fn with_precision(v: Fb, prec: Precision) -> Self {
        MpFloat(v.with_precision(prec.bits()).value())
    }

    pub fn precision_bits(&self) -> usize {
        self.0.precision()
    }

    fn prec(&self) -> Precision {
        let digits = ((self.0.precision().saturating_sub(16)) as f64 / std::f64::consts::LOG2_10)
            .floor() as u32;
        Precision::new(digits)
    }

    /// Scientific decimal rendering with `sig` significant digits.
    pub fn to_sci_string(&self, sig: usize) -> String {
        format_sci(self.as_f64(), sig)
    }
}

impl fmt::Debug for MpFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e}", self.as_f64())
    }
}

impl fmt::Display for MpFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e}", self.as_f64())
    }
}

macro_rules! mp_binop {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr for MpFloat {
            type Output = MpFloat;
            fn $m(self, rhs: MpFloat) -> MpFloat {
                MpFloat(self.0 $op rhs.0)
            }
        }
    };
}
mp_binop!(Add, add, +);
mp_binop!(Sub, sub, -);
mp_binop!(Mul, mul, *);
mp_binop!(Div, div, /);

impl Neg for MpFloat {
    type Output = MpFloat;
    fn neg(self) -> MpFloat {
        MpFloat(-self.0)
    }
}

impl Scalar for MpFloat {
    fn from_rational(q: &BigRational, prec: Precision) -> Self {
        let bits = prec.bits();
        let n = Fb::from(to_ibig(q.numer())).with_precision(bits).value();
        if q.denom().is_one() {
            return MpFloat(n);
        }
        let d = Fb::from(to_ibig(q.denom())).with_precision(bits).value();
        MpFloat(n / d)
    }
    fn vanishes(&self) -> bool {
        self.0.repr().significand().is_zero()
    }
    fn exp(&self) -> Result<Self, EvalError> {
        Ok(MpFloat(self.0.exp()))
    }
    fn ln(&self) -> Result<Self, EvalError> {
        if self.0.repr().significand().is_zero() || self.0.repr().sign() == Sign::Negative {
            return Err(EvalError::LogOfNonPositive);
        }
        Ok(MpFloat(self.0.ln()))
    }
    fn magnitude(&self) -> Self {
        if self.0.repr().sign() == Sign::Negative {
            MpFloat(-self.0.clone())
        } else {
            self.clone()
        }
    }
    fn as_f64(&self) -> f64 {
        self.0.to_f64().value()
    }
    fn is_exact() -> bool {
        false
    }
}

impl Real for MpFloat {
    fn from_f64(v: f64, prec: Precision) -> Self {
        let f = Fb::try_from(v).unwrap_or(Fb::ZERO);
        MpFloat(f.with_precision(prec.bits()).value())
    }
    fn sqrt(&self) -> Result<Self, EvalError> {
        if self.0.repr().sign() == Sign::Negative && !self.0.repr().significand().is_zero() {
            return Err(EvalError::NegativeSqrt);
        }
        if self.0.repr().significand().is_zero() {
            return Ok(self.clone());
        }
        let p = self.prec();
        Ok(MpFloat(self.0.clone().with_precision(p.bits()).value().sqrt()))
    }
}

/// Renders `v` as `d.ddddde±x` with `sig` significant digits; zero renders as "0".
pub fn format_sci(v: f64, sig: usize) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    format!("{:.*e}", sig.saturating_sub(1), v)
}

/// Complex numbers over any [`Real`] backend.
#[derive(Clone, Debug, PartialEq)]
pub struct Complex<S> {
    pub re: S,
    pub im: S,
}

impl<S: Real> Complex<S> {
    pub fn new(re: S, im: S) -> Self {
        Complex { re, im }
    }

    pub fn real(re: S, prec: Precision) -> Self {
        Complex { re, im: S::zero_at(prec) }
    }

    pub fn zero(prec: Precision) -> Self {
        Complex::real(S::zero_at(prec), prec)
    }

    pub fn one(prec: Precision) -> Self {
        Complex::real(S::one_at(prec), prec)
    }

    pub fn from_f64(re: f64, im: f64, prec: Precision) -> Self {
        Complex { re: S::from_f64(re, prec), im: S::from_f64(im, prec) }
    }

    pub fn norm_sqr(&self) -> S {
        self.re.clone() * self.re.clone() + self.im.clone() * self.im.clone()
    }

    pub fn abs(&self) -> S {
        // Scale to avoid overflow-free but precision-losing squares of tiny parts.
        let a = self.re.magnitude();
        let b = self.im.magnitude();
        let m = S::max_of(a, b);
        if m.vanishes() {
            return m;
        }
        let x = self.re.clone() / m.clone();
        let y = self.im.clone() / m.clone();
        m * (x.clone() * x + y.clone() * y).sqrt().expect("sum of squares is non-negative")
    }

    pub fn is_zero(&self) -> bool {
        self.re.vanishes() && self.im.vanishes()
    }

    pub fn conj(&self) -> Self {
        Complex { re: self.re.clone(), im: -self.im.clone() }
    }

    pub fn scale(&self, s: &S) -> Self {
        Complex { re: self.re.clone() * s.clone(), im: self.im.clone() * s.clone() }
    }

    pub fn inv(&self) -> Result<Self, EvalError> {
        let d = self.norm_sqr();
        if d.vanishes() {
            return Err(EvalError::DivisionByZero);
        }
        Ok(Complex { re: self.re.clone() / d.clone(), im: -self.im.clone() / d })
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self, EvalError> {
        Ok(self.clone() * rhs.inv()?)
    }

    /// Principal square root.
    pub fn sqrt(&self) -> Self {
        let prec = Precision::new(DEFAULT_DIGITS);
        let r = self.abs();
        if r.vanishes() {
            return self.clone();
        }
        let half = S::from_f64(0.5, prec);
        let re = ((r.clone() + self.re.clone()) * half.clone()).sqrt().unwrap_or_else(|_| S::zero_at(prec));
        let im_mag = ((r - self.re.clone()) * half).sqrt().unwrap_or_else(|_| S::zero_at(prec));
        let im = if self.im.partial_cmp(&S::zero_at(prec)) == Some(Ordering::Less) {
            -im_mag
        } else {
            im_mag
        };
        Complex { re, im }
    }

    /// Natural logarithm of the modulus.
    pub fn ln_abs(&self) -> Result<S, EvalError> {
        self.abs().ln()
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.re.as_f64(), self.im.as_f64())
    }
}

impl<S: Real> Add for Complex<S> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Complex { re: self.re + rhs.re, im: self.im + rhs.im }
    }
}

impl<S: Real> Sub for Complex<S> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Complex { re: self.re - rhs.re, im: self.im - rhs.im }
    }
}

impl<S: Real> Mul for Complex<S> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Complex {
            re: self.re.clone() * rhs.re.clone() - self.im.clone() * rhs.im.clone(),
            im: self.re * rhs.im + self.im * rhs.re,
        }
    }
}

impl<S: Real> Neg for Complex<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Complex { re: -self.re, im: -self.im }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn mp_rational_conversion_holds_many_digits() {
        let p = Precision::new(64);
        let third = MpFloat::from_rational(&q(1, 3), p);
        let three = MpFloat::from_i64(3, p);
        let err = (third * three - MpFloat::one_at(p)).magnitude().as_f64();
        assert!(err < 1e-60, "err = {err}");
    }

    #[test]
    fn mp_exp_ln_roundtrip() {
        let p = Precision::new(64);
        let x = MpFloat::from_rational(&q(7, 5), p);
        let back = x.exp().unwrap().ln().unwrap();
        assert!((back - x).magnitude().as_f64() < 1e-60);
    }

    #[test]
    fn exact_backend_refuses_transcendentals() {
        assert_eq!(Scalar::exp(&q(0, 1)).unwrap(), q(1, 1));
        assert_eq!(Scalar::exp(&q(1, 2)), Err(EvalError::Inexact));
        assert_eq!(Scalar::ln(&q(-1, 2)), Err(EvalError::LogOfNonPositive));
    }

    #[test]
    fn complex_sqrt_squares_back() {
        let p = Precision::new(64);
        let z = Complex::<MpFloat>::from_f64(-3.0, 4.0, p);
        let s = z.sqrt();
        let back = s.clone() * s;
        assert!((back - z).abs().as_f64() < 1e-55);
    }

    #[test]
    fn large_rationals_convert_to_f64() {
        let big = BigInt::from(10).pow(400u32);
        let v = BigRational::new(big.clone() * BigInt::from(3), big);
        assert!((rational_to_f64(&v) - 3.0).abs() < 1e-12);
    }
}
