//! Getzler's genus-one equation, the Euler-power identities and the
//! scaling anomaly, for log-linear G candidates.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::expr::poly::TermEvaluator;
use crate::expr::{ExpPoly, ExprError, Expression};
use crate::frobenius::{EulerField, FrobeniusError, FrobeniusFrame, Prepotential, Tensor};
use crate::linalg::Matrix;
use crate::sampling;
use crate::scalar::{EvalError, MpFloat, Precision, Real, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GetzlerError {
    #[error("caustic order N = {0} is below 3")]
    BadCaustic(u32),
    #[error("not quasihomogeneous: {0}")]
    NotQuasihomogeneous(String),
    #[error("log argument is outside the exp-polynomial ring: {0}")]
    UnsupportedArgument(String),
    #[error("no evaluation points")]
    NoPoints,
    #[error("bo9 needs k >= 2, got {0}")]
    BadPower(usize),
    #[error(transparent)]
    Frobenius(#[from] FrobeniusError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl From<crate::linalg::LinearSystemError> for GetzlerError {
    fn from(e: crate::linalg::LinearSystemError) -> Self {
        GetzlerError::NotQuasihomogeneous(e.to_string())
    }
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogTerm {
    pub coeff: BigRational,
    pub arg: Expression,
}

/// `G = sum_a linear[a] t^a + sum_j coeff_j log(arg_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GCandidate {
    pub linear: Vec<BigRational>,
    pub logs: Vec<LogTerm>,
}

/// Caustic data: `kappa = 0` with germ type I2(N) A1^(n-2).
#[derive(Debug, Clone, PartialEq)]
pub struct CausticDatum {
    pub kappa: Expression,
    pub n: u32,
    pub n_log: Option<u32>,
}

struct PreparedLog {
    coeff: BigRational,
    kappa: ExpPoly,
    grad: Vec<ExpPoly>,
    hess: Vec<Vec<ExpPoly>>,
}

/// G with symbolic first and second derivatives of each log argument.
pub struct PreparedG {
    linear: Vec<BigRational>,
    logs: Vec<PreparedLog>,
}

/// Gradient and Hessian of G at one point.
pub struct GDerivatives<S> {
    pub grad: Vec<S>,
    pub hess: Matrix<S>,
}

impl GCandidate {
    pub fn zero(n: usize) -> Self {
        GCandidate { linear: vec![BigRational::zero(); n], logs: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.linear.len()
    }

    pub fn with_log(mut self, coeff: BigRational, arg: Expression) -> Self {
        if !coeff.is_zero() {
            self.logs.push(LogTerm { coeff, arg });
        }
        self
    }

    pub fn to_expression(&self) -> Expression {
        let mut items: Vec<Expression> = self
            .linear
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| Expression::var(i).scale(c))
            .collect();
        for l in &self.logs {
            items.push(Expression::log(l.arg.clone()).scale(&l.coeff));
        }
        Expression::sum(items)
    }

    /// Multiplies every log argument by `c`; G changes by a constant.
    pub fn rescale_args(&self, c: &BigRational) -> Self {
        GCandidate {
            linear: self.linear.clone(),
            logs: self
                .logs
                .iter()
                .map(|l| LogTerm { coeff: l.coeff.clone(), arg: l.arg.scale(c) })
                .collect(),
        }
    }

    pub fn prepare(&self) -> Result<PreparedG, GetzlerError> {
        let n = self.dim();
        let mut logs = Vec::with_capacity(self.logs.len());
        for l in &self.logs {
            let kappa = ExpPoly::from_expr(&l.arg).map_err(|_| GetzlerError::UnsupportedArgument(l.arg.to_string()))?;
            if kappa.is_zero() {
                return Err(GetzlerError::UnsupportedArgument("log of zero".into()));
            }
            if let Some(m) = kappa.max_var() {
                if m >= n {
                    return Err(FrobeniusError::VariableOutOfRange(m + 1, n).into());
                }
            }
            let grad: Vec<ExpPoly> = (0..n).map(|i| kappa.diff(i)).collect();
            let hess = (0..n).map(|i| (0..n).map(|j| grad[i].diff(j)).collect()).collect();
            logs.push(PreparedLog { coeff: l.coeff.clone(), kappa, grad, hess });
        }
        Ok(PreparedG { linear: self.linear.clone(), logs })
    }

    /// True when `d/dt^k G` vanishes identically.
    pub fn check_bo7(&self, identity: usize) -> Result<bool, GetzlerError> {
        let prep = self.prepare()?;
        let k = identity;
        let kappas: Vec<&ExpPoly> = prep.logs.iter().map(|l| &l.kappa).collect();
        let prod_except = |skip: Option<usize>| {
            kappas
                .iter()
                .enumerate()
                .filter(|(i, _)| Some(*i) != skip)
                .fold(ExpPoly::constant(BigRational::one()), |acc, (_, k)| acc.mul(k))
        };
        let mut num = prod_except(None).scale(&self.linear[k]);
        for (j, l) in prep.logs.iter().enumerate() {
            num = num.add(&l.grad[k].mul(&prod_except(Some(j))).scale(&l.coeff));
        }
        Ok(num.is_zero())
    }
}

impl PreparedG {
    /// No exponentials in any log argument.
    pub fn is_exact(&self) -> bool {
        self.logs.iter().all(|l| !l.kappa.has_exp())
    }

    /// Values of the log arguments.
    pub fn arguments<S: Scalar>(&self, ev: &TermEvaluator<'_, S>) -> Result<Vec<S>, EvalError> {
        self.logs.iter().map(|l| l.kappa.eval(ev)).collect()
    }

    pub fn derivatives<S: Scalar>(&self, ev: &TermEvaluator<'_, S>) -> Result<GDerivatives<S>, EvalError> {
        let prec = ev.precision();
        let n = self.linear.len();
        let mut grad: Vec<S> = self.linear.iter().map(|a| S::from_rational(a, prec)).collect();
        let mut hess: Matrix<S> = Matrix::zeros(n, n, prec);
        for l in &self.logs {
            let c = S::from_rational(&l.coeff, prec);
            let k = l.kappa.eval(ev)?;
            if k.vanishes() {
                return Err(EvalError::DivisionByZero);
            }
            let kinv = S::one_at(prec) / k;
            let g: Vec<S> = l.grad.iter().map(|p| p.eval(ev).map(|v| v * kinv.clone())).collect::<Result<_, _>>()?;
            for i in 0..n {
                grad[i] = grad[i].clone() + c.clone() * g[i].clone();
                for j in 0..n {
                    let kij = l.hess[i][j].eval(ev)? * kinv.clone();
                    let v = hess.get(i, j).clone() + c.clone() * (kij - g[i].clone() * g[j].clone());
                    hess.set(i, j, v);
                }
            }
        }
        Ok(GDerivatives { grad, hess })
    }
}

/// The seven-term tensor Delta_{a1 a2 a3 a4}; `fr` must have order 5.
pub fn delta_tensor<S: Scalar>(fr: &FrobeniusFrame<S>, g: &GDerivatives<S>) -> Tensor<S> {
    let n = fr.n;
    let prec = fr.prec;
    let c3u = &fr.c3_up;
    let c4u = fr.c4_up.as_ref().expect("frame of order 5 required");
    let c5u = fr.c5_up.as_ref().expect("frame of order 5 required");
    let zero = || S::zero_at(prec);
    // P[a,b,m] = c^v_{ab} G_{vm}
    let p = Tensor::from_fn(n, 3, |i| {
        (0..n).fold(zero(), |acc, v| acc + c3u.at(&[v, i[0], i[1]]).clone() * g.hess.get(v, i[2]).clone())
    });
    // Q[a,b,m] = c^v_{abm} G_v
    let qt = Tensor::from_fn(n, 3, |i| {
        (0..n).fold(zero(), |acc, v| acc + c4u.at(&[v, i[0], i[1], i[2]]).clone() * g.grad[v].clone())
    });
    // R[a,m] = c^v_{am} G_v
    let r = Tensor::from_fn(n, 2, |i| {
        (0..n).fold(zero(), |acc, v| acc + c3u.at(&[v, i[0], i[1]]).clone() * g.grad[v].clone())
    });
    // W[a,m] = c^v_{amv}
    let w = Tensor::from_fn(n, 2, |i| (0..n).fold(zero(), |acc, v| acc + c4u.at(&[v, i[0], i[1], v]).clone()));
    // V[m] = c^v_{mv}
    let vv: Vec<S> = (0..n).map(|m| (0..n).fold(zero(), |acc, v| acc + c3u.at(&[v, m, v]).clone())).collect();
    let three = S::from_i64(3, prec);
    let four = S::from_i64(4, prec);
    let two = S::from_i64(2, prec);
    let sixth = S::from_rational(&q(1, 6), prec);
    let t24 = S::from_rational(&q(1, 24), prec);
    let quarter = S::from_rational(&q(1, 4), prec);
    Tensor::from_fn(n, 4, |i| {
        let (a1, a2, a3, a4) = (i[0], i[1], i[2], i[3]);
        let mut acc = zero();
        for m in 0..n {
            let c12 = c3u.at(&[m, a1, a2]).clone();
            let c123 = c4u.at(&[m, a1, a2, a3]).clone();
            acc = acc + c12.clone() * (three.clone() * p.at(&[a3, a4, m]).clone() - four.clone() * p.at(&[a3, m, a4]).clone())
                - c12 * qt.at(&[a3, a4, m]).clone()
                + c123 * (two.clone() * r.at(&[a4, m]).clone() + sixth.clone() * w.at(&[a4, m]).clone())
                + t24.clone() * c5u.at(&[m, a1, a2, a3, a4]).clone() * vv[m].clone();
            for v in 0..n {
                acc = acc - quarter.clone() * c4u.at(&[m, a1, a2, v]).clone() * c4u.at(&[v, a3, a4, m]).clone();
            }
        }
        acc
    })
}

/// Sorted index multisets with their symmetrized Delta values.
pub fn symmetrize<S: Scalar>(delta: &Tensor<S>, prec: Precision) -> Vec<(Vec<usize>, S)> {
    let n = delta.n;
    let mut out = Vec::new();
    for a in 0..n {
        for b in a..n {
            for c in b..n {
                for d in c..n {
                    let key = [a, b, c, d];
                    let perms: BTreeSet<[usize; 4]> = permutations4(key).into_iter().collect();
                    let mut acc = S::zero_at(prec);
                    for p in &perms {
                        acc = acc + delta.at(p).clone();
                    }
                    out.push((key.to_vec(), acc / S::from_i64(perms.len() as i64, prec)));
                }
            }
        }
    }
    out
}

fn permutations4(k: [usize; 4]) -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    if a != b && a != c && a != d && b != c && b != d && c != d {
                        out.push([k[a], k[b], k[c], k[d]]);
                    }
                }
            }
        }
    }
    out
}

/// `sum z_a z_b z_c z_d Delta_{abcd}`.
pub fn z_contraction<S: Scalar>(delta: &Tensor<S>, z: &[S], prec: Precision) -> S {
    let n = delta.n;
    let mut acc = S::zero_at(prec);
    for a in 0..n {
        for b in 0..n {
            let zab = z[a].clone() * z[b].clone();
            for c in 0..n {
                let zabc = zab.clone() * z[c].clone();
                for d in 0..n {
                    acc = acc + zabc.clone() * z[d].clone() * delta.at(&[a, b, c, d]).clone();
                }
            }
        }
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualMode {
    Symmetrized,
    /// Random z vectors with entries in [-1, 1].
    ZContraction { samples: usize, seed: u64 },
}

/// Largest residual over a batch. `exact` is true when every value was
/// computed in rational arithmetic, in which case `max == 0.0` means the
/// residual vanished identically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub max: f64,
    pub exact: bool,
    pub points: usize,
}

fn getzler_at<S: Real>(
    p: &Prepotential,
    g: &PreparedG,
    point: &[S],
    prec: Precision,
    mode: ResidualMode,
    point_index: usize,
) -> Result<f64, GetzlerError> {
    let fr = p.frame(point, prec, 5)?;
    let ev = TermEvaluator::new(point, prec);
    let dg = g.derivatives(&ev)?;
    let delta = delta_tensor(&fr, &dg);
    let worst = match mode {
        ResidualMode::Symmetrized => symmetrize(&delta, prec)
            .into_iter()
            .fold(S::zero_at(prec), |acc, (_, v)| S::max_of(acc, v.magnitude())),
        ResidualMode::ZContraction { samples, seed } => {
            let mut rng = sampling::rng(seed ^ (point_index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let mut worst = S::zero_at(prec);
            for _ in 0..samples {
                let z: Vec<S> = (0..p.dim).map(|_| S::from_rational(&sampling::rational_in(&mut rng, 1), prec)).collect();
                worst = S::max_of(worst, z_contraction(&delta, &z, prec).magnitude());
            }
            worst
        }
    };
    Ok(worst.as_f64())
}

fn to_mp(point: &[BigRational], prec: Precision) -> Vec<MpFloat> {
    point.iter().map(|x| MpFloat::from_rational(x, prec)).collect()
}

/// Exact rational evaluation is used when neither F's higher derivatives
/// nor G's log arguments involve exponentials.
pub fn uses_exact_backend(p: &Prepotential, g: &PreparedG) -> bool {
    p.exact_evaluable() && g.is_exact()
}

pub fn getzler_residual(
    p: &Prepotential,
    g: &GCandidate,
    points: &[Vec<BigRational>],
    prec: Precision,
    mode: ResidualMode,
) -> Result<Residual, GetzlerError> {
    if points.is_empty() {
        return Err(GetzlerError::NoPoints);
    }
    let prep = g.prepare()?;
    let exact = uses_exact_backend(p, &prep);
    let values: Vec<f64> = points
        .par_iter()
        .enumerate()
        .map(|(i, pt)| {
            if exact {
                getzler_at::<BigRational>(p, &prep, pt, prec, mode, i)
            } else {
                getzler_at::<MpFloat>(p, &prep, &to_mp(pt, prec), prec, mode, i)
            }
        })
        .collect::<Result<_, _>>()?;
    Ok(Residual { max: values.into_iter().fold(0.0, f64::max), exact, points: points.len() })
}

/// `gamma = -1/4 sum mu_a^2 + n d / 48`.
pub fn gamma_theorem1(p: &Prepotential) -> BigRational {
    let mu2: BigRational = p.mu().iter().map(|m| m * m).sum();
    -mu2 / q(4, 1) + BigRational::from_integer(BigInt::from(p.dim)) * &p.d / q(48, 1)
}

/// Weight w with `L_E kappa = w kappa`, if kappa is quasihomogeneous.
pub fn euler_weight(euler: &EulerField, kappa: &ExpPoly) -> Option<BigRational> {
    let ek = euler.apply_exp(kappa);
    let (key, c) = kappa.terms().next()?;
    let w = ek.terms().find(|(k, _)| *k == key).map(|(_, v)| v / c).unwrap_or_else(BigRational::zero);
    if ek == kappa.scale(&w) {
        Some(w)
    } else {
        None
    }
}

/// `L_E G` as an exact constant, when it is one identically.
pub fn euler_derivative_exact(p: &Prepotential, g: &GCandidate) -> Result<BigRational, GetzlerError> {
    let mut total = BigRational::zero();
    for (a, c) in g.linear.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        if !p.euler.weights[a].is_zero() {
            return Err(GetzlerError::NotQuasihomogeneous(format!("E(t{}) is not constant", a + 1)));
        }
        total += c * &p.euler.shifts[a];
    }
    for l in &g.logs {
        let kappa = ExpPoly::from_expr(&l.arg).map_err(|_| GetzlerError::UnsupportedArgument(l.arg.to_string()))?;
        let w = euler_weight(&p.euler, &kappa)
            .ok_or_else(|| GetzlerError::NotQuasihomogeneous(format!("log argument {}", l.arg)))?;
        total += &l.coeff * w;
    }
    Ok(total)
}

/// Both sides of an identity at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    /// Exact sides, when evaluated in rational arithmetic.
    pub exact: Option<(BigRational, BigRational)>,
}

impl Comparison {
    pub fn matches(&self, tol: f64) -> bool {
        match &self.exact {
            Some((a, b)) => a == b,
            None => self.residual <= tol,
        }
    }
}

fn bo8_sides<S: Real>(p: &Prepotential, g: &PreparedG, point: &[S], prec: Precision) -> Result<(S, S), GetzlerError> {
    let ev = TermEvaluator::new(point, prec);
    let dg = g.derivatives(&ev)?;
    let e = p.euler.at(point, prec);
    let lhs = e.iter().zip(&dg.grad).fold(S::zero_at(prec), |acc, (a, b)| acc + a.clone() * b.clone());
    let rhs = S::from_rational(&gamma_theorem1(p), prec);
    Ok((lhs, rhs))
}

fn bo9_sides<S: Real>(
    p: &Prepotential,
    g: &PreparedG,
    k: usize,
    point: &[S],
    prec: Precision,
) -> Result<(S, S), GetzlerError> {
    let fr = p.frame(point, prec, 3)?;
    let ev = TermEvaluator::new(point, prec);
    let dg = g.derivatives(&ev)?;
    Ok(bo9_from_frame(&fr, &dg.grad, k))
}

/// (lhs, rhs) of the bo9 identity for the k-th Euler power.
pub fn bo9_from_frame<S: Real>(fr: &FrobeniusFrame<S>, grad: &[S], k: usize) -> (S, S) {
    let n = fr.n;
    let prec = fr.prec;
    let mut pows = vec![Matrix::identity(n, prec)];
    for j in 1..k {
        let next = pows[j - 1].mul(&fr.u, prec);
        pows.push(next);
    }
    let m = Matrix::diagonal(&fr.mu, prec);
    let ek = pows[k - 1].mul_vec(&fr.euler, prec);
    let lhs = grad.iter().zip(&ek).fold(S::zero_at(prec), |acc, (a, b)| acc + a.clone() * b.clone());
    let mut s1 = Matrix::zeros(n, n, prec);
    for j in 0..k {
        s1 = s1.add(&pows[j].mul(&m, prec).mul(&pows[k - 1 - j], prec));
    }
    let t1 = -(m.mul(&s1, prec).trace(prec) / S::from_i64(4, prec));
    let mut s2 = Matrix::zeros(n, n, prec);
    for j in 0..k - 1 {
        s2 = s2.add(&pows[j].mul(&m, prec).mul(&pows[k - 2 - j], prec));
    }
    let half_d = fr.d.clone() / S::from_i64(2, prec);
    let v: Vec<S> = s2
        .mul_vec(&fr.euler, prec)
        .into_iter()
        .zip(pows[k - 2].mul_vec(&fr.euler, prec))
        .map(|(a, b)| a - half_d.clone() * b)
        .collect();
    let t2 = -(fr.pairing(&v, &fr.h) / S::from_i64(24, prec));
    (lhs, t1 + t2)
}

fn compare<S: Real>(sides: (S, S)) -> Comparison {
    let (l, r) = sides;
    let residual = (l.clone() - r.clone()).magnitude().as_f64();
    Comparison { lhs: l.as_f64(), rhs: r.as_f64(), residual, exact: None }
}

fn compare_exact(sides: (BigRational, BigRational)) -> Comparison {
    let mut c = compare(sides.clone());
    c.exact = Some(sides);
    c
}

/// bo8 at a point: `lhs = E(G)`, `rhs = n d / 48 - tr(mu^2) / 4`.
pub fn check_bo8(p: &Prepotential, g: &GCandidate, point: &[BigRational], prec: Precision) -> Result<Comparison, GetzlerError> {
    let prep = g.prepare()?;
    if prep.is_exact() {
        if let Ok(sides) = bo8_sides::<BigRational>(p, &prep, point, prec) {
            return Ok(compare_exact(sides));
        }
    }
    Ok(compare(bo8_sides::<MpFloat>(p, &prep, &to_mp(point, prec), prec)?))
}

/// bo9 at a point for the k-th Euler power, k >= 2.
pub fn check_bo9(
    p: &Prepotential,
    g: &GCandidate,
    k: usize,
    point: &[BigRational],
    prec: Precision,
) -> Result<Comparison, GetzlerError> {
    if k < 2 {
        return Err(GetzlerError::BadPower(k));
    }
    let prep = g.prepare()?;
    if uses_exact_backend(p, &prep) {
        return Ok(compare_exact(bo9_sides::<BigRational>(p, &prep, k, point, prec)?));
    }
    Ok(compare(bo9_sides::<MpFloat>(p, &prep, k, &to_mp(point, prec), prec)?))
}

fn coxeter_coeff(n: u32) -> Result<BigRational, GetzlerError> {
    if n < 3 {
        return Err(GetzlerError::BadCaustic(n));
    }
    let n = n as i64;
    Ok(-q((n - 2) * (n - 3), 24 * n))
}

/// `G = -1/24 sum (N_i - 2)(N_i - 3)/N_i log kappa_i`.
pub fn build_g_coxeter(data: &[CausticDatum], dim: usize) -> Result<GCandidate, GetzlerError> {
    let mut g = GCandidate::zero(dim);
    for c in data {
        g = g.with_log(coxeter_coeff(c.n)?, c.kappa.clone());
    }
    Ok(g)
}

/// `G = -(N_log/24) t^n - 1/24 sum (N_i - 2)(N_i - 3)/N_i log kappa_i`.
pub fn build_g_eaw(data: &[CausticDatum], n_log: u32, dim: usize) -> Result<GCandidate, GetzlerError> {
    let mut g = build_g_coxeter(data, dim)?;
    g.linear[dim - 1] = -q(n_log as i64, 24);
    Ok(g)
}

/// Anomaly from caustic orders and E-weights:
/// `gamma = -1/24 sum (N_i - 2)(N_i - 3)/N_i w_i - (N_log/24) E(t^n)`.
pub fn gamma_from_caustic_weights(
    data: &[(u32, BigRational)],
    n_log: u32,
    e_n: &BigRational,
) -> Result<BigRational, GetzlerError> {
    let mut g = -q(n_log as i64, 24) * e_n;
    for (n, w) in data {
        g += coxeter_coeff(*n)? * w;
    }
    Ok(g)
}

pub fn gamma_from_caustics(data: &[CausticDatum], n_log: u32, euler: &EulerField) -> Result<BigRational, GetzlerError> {
    let dim = euler.dim();
    let mut weighted = Vec::with_capacity(data.len());
    for c in data {
        let kappa = ExpPoly::from_expr(&c.kappa).map_err(|_| GetzlerError::UnsupportedArgument(c.kappa.to_string()))?;
        let w = euler_weight(euler, &kappa)
            .ok_or_else(|| GetzlerError::NotQuasihomogeneous(format!("caustic {}", c.kappa)))?;
        weighted.push((c.n, w));
    }
    let e_n = if n_log == 0 {
        BigRational::zero()
    } else {
        if !euler.weights[dim - 1].is_zero() {
            return Err(GetzlerError::NotQuasihomogeneous("E(t^n) is not constant".into()));
        }
        euler.shifts[dim - 1].clone()
    };
    gamma_from_caustic_weights(&weighted, n_log, &e_n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, rat};
    use crate::frobenius::EulerField;

    fn eaw_a2() -> Prepotential {
        let f = parse("1/2*t1^2*t3 + 1/2*t1*t2^2 - 1/24*t2^4 + t2*exp(t3)").unwrap();
        Prepotential::new(
            "eaw_a2",
            3,
            f,
            0,
            EulerField::new(vec![rat(1, 1), rat(1, 2), rat(0, 1)], vec![rat(0, 1), rat(0, 1), rat(3, 2)]),
        )
        .unwrap()
    }

    fn i2(h: i64) -> Prepotential {
        let f = parse(&format!("1/2*t1^2*t2 + t2^{}", h + 1)).unwrap();
        Prepotential::new("i2", 2, f, 0, EulerField::linear(vec![rat(1, 1), rat(2, h)])).unwrap()
    }

    fn pts(dim: usize) -> Vec<Vec<BigRational>> {
        sampling::rational_points(3, 4, dim, 2, |p| p[dim - 1] > rat(1, 4))
    }

    #[test]
    fn eaw_universal_g_and_its_failure_at_zero() {
        let p = eaw_a2();
        let g = build_g_eaw(&[], 1, 3).unwrap();
        let prec = Precision::new(40);
        let r = getzler_residual(&p, &g, &pts(3), prec, ResidualMode::Symmetrized).unwrap();
        assert!(!r.exact);
        assert!(r.max < 1e-30, "{}", r.max);
        let r0 = getzler_residual(&p, &GCandidate::zero(3), &pts(3), prec, ResidualMode::Symmetrized).unwrap();
        assert!(r0.max > 1e-2);
    }

    #[test]
    fn i2_is_exact_zero_and_modes_agree() {
        let h = 5;
        let p = i2(h);
        let g = build_g_coxeter(&[CausticDatum { kappa: parse("t2").unwrap(), n: h as u32, n_log: None }], 2).unwrap();
        let prec = Precision::default();
        let r = getzler_residual(&p, &g, &pts(2), prec, ResidualMode::Symmetrized).unwrap();
        assert!(r.exact);
        assert_eq!(r.max, 0.0);
        let z = getzler_residual(&p, &g, &pts(2), prec, ResidualMode::ZContraction { samples: 5, seed: 1 }).unwrap();
        assert_eq!(z.max, 0.0);
        let wrong = g.rescale_args(&rat(3, 1)).with_log(rat(1, 100), parse("t2").unwrap());
        assert!(getzler_residual(&p, &wrong, &pts(2), prec, ResidualMode::Symmetrized).unwrap().max > 0.0);
    }

    #[test]
    fn anomaly_values() {
        assert_eq!(gamma_theorem1(&eaw_a2()), rat(-1, 16));
        assert_eq!(gamma_theorem1(&i2(5)), rat(-1, 50));
        let g = build_g_eaw(&[], 1, 3).unwrap();
        assert_eq!(euler_derivative_exact(&eaw_a2(), &g).unwrap(), rat(-1, 16));
        let c = check_bo8(&eaw_a2(), &g, &[rat(1, 2), rat(1, 3), rat(1, 5)], Precision::default()).unwrap();
        assert_eq!(c.exact, Some((rat(-1, 16), rat(-1, 16))));
        let bn = gamma_from_caustic_weights(&[(4, rat(4, 5)), (3, rat(1, 1))], 0, &rat(0, 1)).unwrap();
        assert_eq!(bn, rat(-4, 240));
        assert_eq!(gamma_from_caustic_weights(&[(3, rat(7, 3))], 0, &rat(0, 1)).unwrap(), rat(0, 1));
    }

    #[test]
    fn builders() {
        let k = parse("t2 - t3^3").unwrap();
        let g = build_g_coxeter(
            &[CausticDatum { kappa: k.clone(), n: 5, n_log: None }, CausticDatum { kappa: parse("t3").unwrap(), n: 3, n_log: None }],
            3,
        )
        .unwrap();
        assert_eq!(g.logs, vec![LogTerm { coeff: rat(-1, 20), arg: k }]);
        let g = build_g_coxeter(&[CausticDatum { kappa: parse("t2").unwrap(), n: 4, n_log: None }], 3).unwrap();
        assert_eq!(g.logs[0].coeff, rat(-1, 48));
        assert!(build_g_coxeter(&[CausticDatum { kappa: parse("t2").unwrap(), n: 2, n_log: None }], 3).is_err());
        let g = build_g_eaw(&[], 2, 2).unwrap();
        assert_eq!(g.linear, vec![rat(0, 1), rat(-1, 12)]);
    }

    #[test]
    fn bo7_cases() {
        assert!(build_g_eaw(&[], 1, 3).unwrap().check_bo7(0).unwrap());
        assert!(GCandidate::zero(3).check_bo7(0).unwrap());
        let hat = GCandidate::zero(3).with_log(rat(-1, 12), parse("t1").unwrap());
        assert!(!hat.check_bo7(0).unwrap());
        assert!(hat.check_bo7(1).unwrap());
    }

    #[test]
    fn bo9_matches_for_eaw() {
        let p = eaw_a2();
        let g = build_g_eaw(&[], 1, 3).unwrap();
        for k in 2..=3 {
            let c = check_bo9(&p, &g, k, &[rat(1, 3), rat(-1, 2), rat(2, 7)], Precision::new(40)).unwrap();
            assert!(c.residual < 1e-30, "k={k}: {c:?}");
        }
    }
}
