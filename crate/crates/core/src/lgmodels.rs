//! Trigonometric-polynomial superpotentials
//! `F(x) = x^k + a_1 x^{k-1} + ... + a_k + ... + a_{k+m} x^{-m}` on `C*`.
//!
//! Critical values of `F` are canonical coordinates of the corresponding
//! Frobenius manifold point, so caustics and collision exponents can be
//! studied without constructing flat coordinates.

use num_rational::BigRational;
use thiserror::Error;

use crate::caustics::{self, CausticError, CollisionFit};
use crate::roots::{self, RootError};
use crate::sampling;
use crate::scalar::{Complex, MpFloat, Precision, Real, Scalar};

type C = Complex<MpFloat>;

#[derive(Debug, Error)]
pub enum LgError {
    #[error("leading coefficient a_{{k+m}} vanishes")]
    DegenerateLeadingCoefficient,
    #[error("k and m must be at least 1")]
    BadShape,
    #[error("expected {expected} coefficients, got {got}")]
    CoefficientCount { expected: usize, got: usize },
    #[error("no transversal caustic crossing exists for (k, m) = ({0}, {1}) with a_{{k+m}} != 0")]
    NoCausticPath(u32, u32),
    #[error(transparent)]
    Roots(#[from] RootError),
    #[error(transparent)]
    Caustic(#[from] CausticError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Superpotential {
    pub k: u32,
    pub m: u32,
    /// `a_1 .. a_{k+m}`.
    pub a: Vec<C>,
}

impl Superpotential {
    pub fn new(k: u32, m: u32, a: Vec<C>) -> Result<Self, LgError> {
        if k == 0 || m == 0 {
            return Err(LgError::BadShape);
        }
        let n = (k + m) as usize;
        if a.len() != n {
            return Err(LgError::CoefficientCount { expected: n, got: a.len() });
        }
        if a[n - 1].is_zero() {
            return Err(LgError::DegenerateLeadingCoefficient);
        }
        Ok(Superpotential { k, m, a })
    }

    pub fn from_rationals(k: u32, m: u32, a: &[BigRational], prec: Precision) -> Result<Self, LgError> {
        Self::new(k, m, a.iter().map(|q| C::real(MpFloat::from_rational(q, prec), prec)).collect())
    }

    fn n(&self) -> usize {
        (self.k + self.m) as usize
    }

    /// Coefficient of `x^{k-j}`, with `a_0 = 1`.
    fn coeff(&self, j: usize, prec: Precision) -> C {
        if j == 0 {
            C::one(prec)
        } else {
            self.a[j - 1].clone()
        }
    }

    /// Ascending coefficients of `x^{m+1} F'(x)`, degree `k+m`.
    pub fn critical_polynomial(&self, prec: Precision) -> Vec<C> {
        let n = self.n();
        let k = self.k as i64;
        let mut out = vec![C::zero(prec); n + 1];
        for j in 0..=n {
            let w = MpFloat::from_i64(k - j as i64, prec);
            out[n - j] = self.coeff(j, prec).scale(&w);
        }
        out
    }

    pub fn eval(&self, x: &C, prec: Precision) -> Result<C, LgError> {
        let xinv = x.inv().map_err(|_| LgError::DegenerateLeadingCoefficient)?;
        let mut pos = C::one(prec);
        for _ in 0..self.k {
            pos = pos * x.clone();
        }
        let mut acc = C::zero(prec);
        for j in 0..=self.n() {
            acc = acc + self.coeff(j, prec) * pos.clone();
            pos = pos * xinv.clone();
        }
        Ok(acc)
    }

    /// `F'(x)`.
    pub fn derivative(&self, x: &C, prec: Precision) -> Result<C, LgError> {
        let p = self.critical_polynomial(prec);
        let xm = x.clone();
        let mut denom = C::one(prec);
        for _ in 0..=self.m {
            denom = denom * xm.clone();
        }
        let v = roots::eval(&p, x, prec);
        v.checked_div(&denom).map_err(|_| LgError::DegenerateLeadingCoefficient)
    }
}

/// Critical points with multiplicity, all in `C*`.
pub fn critical_points(s: &Superpotential, prec: Precision) -> Result<Vec<C>, LgError> {
    if s.a[s.n() - 1].is_zero() {
        return Err(LgError::DegenerateLeadingCoefficient);
    }
    Ok(roots::roots(&s.critical_polynomial(prec), prec)?)
}

/// `F(x_i)`, in the order of the critical points.
pub fn critical_values(s: &Superpotential, prec: Precision) -> Result<Vec<C>, LgError> {
    critical_points(s, prec)?.iter().map(|x| s.eval(x, prec)).collect()
}

/// `prod_{i<j} (u_i - u_j)^2`; vanishes on the caustic.
pub fn lg_caustic_indicator(s: &Superpotential, prec: Precision) -> Result<C, LgError> {
    Ok(roots::root_discriminant(&critical_values(s, prec)?, prec))
}

/// Straight path `a(s) = base + s * dir` in coefficient space.
#[derive(Clone, Debug)]
pub struct LgPath {
    pub k: u32,
    pub m: u32,
    pub base: Vec<BigRational>,
    pub dir: Vec<BigRational>,
    /// Double critical point of the base superpotential, when constructed.
    pub double_point: Option<BigRational>,
}

impl LgPath {
    pub fn at(&self, s: f64, prec: Precision) -> Result<Superpotential, LgError> {
        let s = MpFloat::from_f64(s, prec);
        let a = self
            .base
            .iter()
            .zip(&self.dir)
            .map(|(b, d)| C::real(MpFloat::from_rational(b, prec) + s.clone() * MpFloat::from_rational(d, prec), prec))
            .collect();
        Superpotential::new(self.k, self.m, a)
    }
}

/// Solves `P(x0) = P'(x0) = 0` for `a_{k+m}` and one other coefficient,
/// keeping the rest of `a` fixed. `P = x^{m+1} F'`.
pub fn caustic_base(k: u32, m: u32, x0: &BigRational, a: &[BigRational]) -> Result<Vec<BigRational>, LgError> {
    use num_traits::{One, Zero};
    let n = (k + m) as usize;
    let ki = k as i64;
    let ni = n as i64;
    let pow = |e: i64| -> BigRational {
        let mut acc = BigRational::one();
        for _ in 0..e {
            acc *= x0;
        }
        acc
    };
    // Row contributions of a_j (a_0 = 1) to P(x0) and P'(x0).
    let p_row = |j: i64| BigRational::from_integer((ki - j).into()) * pow(ni - j);
    let dp_row = |j: i64| {
        if ni - j == 0 {
            BigRational::zero()
        } else {
            BigRational::from_integer(((ki - j) * (ni - j)).into()) * pow(ni - j - 1)
        }
    };
    for other in 1..n as i64 {
        if other == ki {
            continue;
        }
        let mut rp = p_row(0);
        let mut rdp = dp_row(0);
        for j in 1..=ni {
            if j == other || j == ni {
                continue;
            }
            rp += &a[j as usize - 1] * p_row(j);
            rdp += &a[j as usize - 1] * dp_row(j);
        }
        let (m11, m12, m21, m22) = (p_row(other), p_row(ni), dp_row(other), dp_row(ni));
        let det = &m11 * &m22 - &m12 * &m21;
        if det.is_zero() {
            continue;
        }
        // [m11 m12; m21 m22] [a_other; a_n] = -[rp; rdp]
        let x = (-&rp * &m22 + &rdp * &m12) / &det;
        let y = (-&rdp * &m11 + &rp * &m21) / &det;
        if y.is_zero() {
            continue;
        }
        let mut out = a.to_vec();
        out[other as usize - 1] = x;
        out[n - 1] = y;
        return Ok(out);
    }
    Err(LgError::NoCausticPath(k, m))
}

/// Smallest `|x0|` and smallest distance from `x0` to the other critical
/// points accepted for a crossing point; closer points sit near deeper strata.
pub const GENERIC_SEPARATION: f64 = 0.5;

/// `d/ds P(x0)` along `dir`: nonzero exactly when the double critical point
/// splits, i.e. the path is transversal to the caustic.
pub fn transversality(k: u32, m: u32, x0: &BigRational, dir: &[BigRational]) -> BigRational {
    let n = (k + m) as i64;
    let mut acc = BigRational::from_integer(0.into());
    for j in 1..=n {
        let mut term = BigRational::from_integer((k as i64 - j).into()) * &dir[j as usize - 1];
        for _ in 0..n - j {
            term *= x0;
        }
        acc += term;
    }
    acc
}

/// Seeded transversal path through a generic caustic point: a double
/// critical point `x0` away from the puncture and from the other critical
/// points, crossed with nonzero transversal speed.
pub fn transversal_path(k: u32, m: u32, seed: u64) -> Result<LgPath, LgError> {
    use num_traits::{Signed, Zero};
    if k == 0 || m == 0 {
        return Err(LgError::BadShape);
    }
    let n = (k + m) as usize;
    let prec = Precision::default();
    let half = BigRational::new(1.into(), 2.into());
    let mut rng = sampling::rng(seed);
    for _ in 0..256 {
        let x0 = sampling::rational_in(&mut rng, 2);
        let a: Vec<BigRational> = (0..n).map(|_| sampling::rational_in(&mut rng, 2)).collect();
        let dir: Vec<BigRational> = (0..n).map(|_| sampling::rational_in(&mut rng, 1)).collect();
        if x0.abs() < half {
            continue;
        }
        let base = caustic_base(k, m, &x0, &a)?;
        if transversality(k, m, &x0, &dir).is_zero() {
            continue;
        }
        let sp = Superpotential::from_rationals(k, m, &base, prec)?;
        let xc = C::real(MpFloat::from_rational(&x0, prec), prec);
        let pts = critical_points(&sp, prec)?;
        let dist = |x: &C| (x.clone() - xc.clone()).abs().as_f64();
        let far: Vec<f64> = pts.iter().map(dist).filter(|d| *d > 1e-20).collect();
        if far.len() + 2 != n || far.iter().any(|d| *d < GENERIC_SEPARATION) {
            continue;
        }
        return Ok(LgPath { k, m, base, dir, double_point: Some(x0) });
    }
    Err(LgError::NoCausticPath(k, m))
}

/// Fitted exponent `N` from critical-value collisions along the path.
pub fn lg_collision_exponent(path: &LgPath, prec: Precision) -> Result<CollisionFit, LgError> {
    let ss = caustics::fit_samples();
    let tracks = caustics::track(&ss, |s| {
        let sp = path.at(s, prec)?;
        critical_values(&sp, prec)
    })?;
    // A path lying inside the caustic shows a gap at the noise floor throughout.
    let floor = prec.epsilon().sqrt();
    let first = roots::min_gap(&tracks[0]);
    if first < floor {
        return Err(CausticError::NoCollision.into());
    }
    Ok(caustics::fit_collision(&ss, &tracks)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::rat;

    fn p() -> Precision {
        Precision::default()
    }

    #[test]
    fn k1_m1_critical_points_and_values() {
        let sp = Superpotential::from_rationals(1, 1, &[rat(1, 3), rat(4, 1)], p()).unwrap();
        let x = critical_points(&sp, p()).unwrap();
        assert!((x[0].re.as_f64() + 2.0).abs() < 1e-50 && (x[1].re.as_f64() - 2.0).abs() < 1e-50);
        let u = critical_values(&sp, p()).unwrap();
        assert!((u[0].re.as_f64() - (1.0 / 3.0 - 4.0)).abs() < 1e-14);
        let split = (u[1].clone() - u[0].clone()).re.as_f64();
        assert!((split - 4.0 * 2.0).abs() < 1e-14);
    }

    #[test]
    fn k1_m1_matches_cp1_canonical_coordinates() {
        let prec = p();
        let r = 2i64;
        let t = [rat(1, 3), rat(-1, 2)];
        // a_1 = t1, a_2 = r e^{r t2}
        let a2 = MpFloat::from_i64(r, prec) * (MpFloat::from_rational(&t[1], prec) * MpFloat::from_i64(r, prec)).exp().unwrap();
        let sp = Superpotential::new(1, 1, vec![C::real(MpFloat::from_rational(&t[0], prec), prec), C::real(a2, prec)]).unwrap();
        let lg = critical_values(&sp, prec).unwrap();
        let f = crate::expr::parse("1/2*t1^2*t2 + exp(2*t2)").unwrap();
        let cp1 = crate::frobenius::Prepotential::new(
            "cp1",
            2,
            f,
            0,
            crate::frobenius::EulerField::new(vec![rat(1, 1), rat(0, 1)], vec![rat(0, 1), rat(1, 1)]),
        )
        .unwrap();
        let u = caustics::canonical_values(&cp1, &caustics::point_at(&t, prec), prec).unwrap();
        for (a, b) in lg.iter().zip(&u) {
            assert!((a.clone() - b.clone()).abs().as_f64() < 1e-50);
        }
    }

    #[test]
    fn critical_points_are_polished() {
        let prec = p();
        let mut rng = sampling::rng(3);
        for _ in 0..10 {
            let a: Vec<BigRational> = (0..3).map(|_| sampling::rational_in(&mut rng, 3)).collect();
            if num_traits::Zero::is_zero(&a[2]) {
                continue;
            }
            let sp = Superpotential::from_rationals(1, 2, &a, prec).unwrap();
            let xs = critical_points(&sp, prec).unwrap();
            assert_eq!(xs.len(), 3);
            for x in &xs {
                assert!(!x.is_zero());
                assert!(sp.derivative(x, prec).unwrap().abs().as_f64() < 1e-12);
            }
        }
    }

    #[test]
    fn values_move_continuously() {
        let prec = p();
        let a = [rat(1, 2), rat(-1, 3), rat(2, 5)];
        let sp = Superpotential::from_rationals(2, 1, &a, prec).unwrap();
        let u = critical_values(&sp, prec).unwrap();
        assert_eq!(u.len(), 3);
        let mut b = sp.clone();
        b.a[1] = b.a[1].clone() + C::from_f64(1e-6, 0.0, prec);
        let v = roots::match_roots(&u, critical_values(&b, prec).unwrap());
        for (x, y) in u.iter().zip(&v) {
            assert!((x.clone() - y.clone()).abs().as_f64() < 1e-4);
        }
    }

    #[test]
    fn leading_coefficient_must_not_vanish() {
        let r = Superpotential::from_rationals(1, 2, &[rat(1, 1), rat(1, 1), rat(0, 1)], p());
        assert!(matches!(r, Err(LgError::DegenerateLeadingCoefficient)));
    }

    #[test]
    fn constructed_double_point_is_on_the_caustic() {
        let prec = p();
        let path = transversal_path(1, 2, 11).unwrap();
        let sp = path.at(0.0, prec).unwrap();
        assert!(lg_caustic_indicator(&sp, prec).unwrap().abs().as_f64() < 1e-40);
        let generic = Superpotential::from_rationals(1, 2, &[rat(1, 2), rat(1, 3), rat(1, 1)], prec).unwrap();
        assert!(lg_caustic_indicator(&generic, prec).unwrap().abs().as_f64() > 1e-6);
    }

    #[test]
    fn collision_exponent_is_three() {
        let prec = p();
        for (k, m) in [(1, 2), (2, 2)] {
            let fit = lg_collision_exponent(&transversal_path(k, m, 0).unwrap(), prec).unwrap();
            assert!((fit.exponent - 3.0).abs() < 0.02, "(k,m)=({k},{m}): {}", fit.exponent);
        }
    }

    #[test]
    fn seeded_sweep_stays_in_band() {
        let prec = p();
        for (k, m) in [(1, 2), (2, 1), (2, 2), (3, 2)] {
            for seed in 0..8 {
                let fit = lg_collision_exponent(&transversal_path(k, m, seed).unwrap(), prec).unwrap();
                assert!((2.9..=3.1).contains(&fit.exponent), "(k,m)=({k},{m}) seed {seed}: {}", fit.exponent);
            }
        }
    }

    #[test]
    fn transversality_detects_tangential_directions() {
        // Moving only the constant term a_k never splits the double point.
        let x0 = rat(1, 1);
        assert_eq!(transversality(2, 2, &x0, &[rat(0, 1), rat(1, 1), rat(0, 1), rat(0, 1)]), rat(0, 1));
        assert_ne!(transversality(2, 2, &x0, &[rat(1, 1), rat(0, 1), rat(0, 1), rat(0, 1)]), rat(0, 1));
    }

    #[test]
    fn k1_m1_has_no_caustic_crossing() {
        assert!(matches!(transversal_path(1, 1, 0), Err(LgError::NoCausticPath(1, 1))));
    }

    #[test]
    fn path_inside_the_caustic_is_rejected() {
        let prec = p();
        let mut path = transversal_path(1, 2, 5).unwrap();
        path.dir = vec![rat(0, 1); 3];
        assert!(lg_collision_exponent(&path, prec).is_err());
    }
}
