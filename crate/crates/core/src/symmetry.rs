//! Legendre-type symmetries `S_kappa` and the inversion, acting on
//! prepotentials, G-functions and the scaling anomaly.
//!
//! `S_kappa` maps `t` to `t̂^a = eta^{ab} d_b d_kappa F`, and `F̂` is the
//! function with the same second derivatives in the new coordinates. `F̂` is
//! defined only up to quadratic terms, so second derivatives are compared
//! modulo a constant matrix and third derivatives exactly.

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use thiserror::Error;

use crate::expr::Expression;
use crate::frobenius::{EulerField, FrobeniusError, Prepotential};
use crate::getzler::{GCandidate, GetzlerError};
use crate::linalg::Matrix;
use crate::scalar::{EvalError, MpFloat, Precision, Scalar};

/// Smallest `|det(dt̂/dt)|` accepted.
pub const SINGULAR_DET: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum SymmetryError {
    #[error("singular transform: |det| = {0:e}")]
    SingularTransform(f64),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("index {0} outside 1..={1}")]
    BadIndex(usize, usize),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error(transparent)]
    Frobenius(#[from] FrobeniusError),
    #[error(transparent)]
    Getzler(#[from] GetzlerError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Second-derivative expressions of F, shared across points.
pub struct Hessian {
    n: usize,
    entries: Vec<Expression>,
}

impl Hessian {
    pub fn new(p: &Prepotential) -> Self {
        let n = p.dim;
        let first: Vec<Expression> = (0..n).map(|a| p.f.diff(a)).collect();
        let entries = (0..n * n).map(|k| first[k / n].diff(k % n)).collect();
        Hessian { n, entries }
    }

    pub fn at(&self, point: &[MpFloat], prec: Precision) -> Result<Matrix<MpFloat>, EvalError> {
        let vals: Vec<MpFloat> = self.entries.iter().map(|e| e.eval_with(point, prec)).collect::<Result<_, _>>()?;
        Ok(Matrix::from_fn(self.n, self.n, |i, j| vals[i * self.n + j].clone()))
    }
}

fn check_index(kappa: usize, n: usize) -> Result<(), SymmetryError> {
    if kappa >= n {
        return Err(SymmetryError::BadIndex(kappa + 1, n));
    }
    Ok(())
}

/// `t̂(t)` and the Jacobian `J^a_g = dt̂^a/dt^g` at `point`; `kappa` is 0-based.
pub fn legendre_map(
    p: &Prepotential,
    hess: &Hessian,
    kappa: usize,
    point: &[MpFloat],
    prec: Precision,
) -> Result<(Vec<MpFloat>, Matrix<MpFloat>), SymmetryError> {
    check_index(kappa, p.dim)?;
    let fr = p.frame::<MpFloat>(point, prec, 3)?;
    let h = hess.at(point, prec)?;
    let t_hat = fr.eta_inv.mul_vec(&h.column(kappa), prec);
    let ck = Matrix::from_fn(p.dim, p.dim, |b, g| fr.c3.at(&[b, kappa, g]).clone());
    let jac = fr.eta_inv.mul(&ck, prec);
    let det = jac.det(prec).magnitude().as_f64();
    if det < SINGULAR_DET {
        return Err(SymmetryError::SingularTransform(det));
    }
    Ok((t_hat, jac))
}

/// Comparison of `F` and `F̂` at one point.
#[derive(Clone, Debug)]
pub struct LegendrePoint {
    pub t_hat: Vec<f64>,
    /// `d̂d̂F̂(t̂) - ddF(t)`; constant when the pair is related by `S_kappa`.
    pub offset: Vec<Vec<f64>>,
    /// `max |d̂d̂d̂F̂(t̂) - c_{abd} (J^{-1})^d_g|`.
    pub third: f64,
}

impl LegendrePoint {
    pub fn second(&self) -> f64 {
        self.offset.iter().flatten().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// `F` and `F̂` with cached second derivatives.
pub struct LegendrePair<'a> {
    pub f: &'a Prepotential,
    pub f_hat: &'a Prepotential,
    pub kappa: usize,
    hess: Hessian,
    hess_hat: Hessian,
}

impl<'a> LegendrePair<'a> {
    pub fn new(f: &'a Prepotential, f_hat: &'a Prepotential, kappa: usize) -> Result<Self, SymmetryError> {
        if f.dim != f_hat.dim {
            return Err(SymmetryError::DimensionMismatch(f.dim, f_hat.dim));
        }
        check_index(kappa, f.dim)?;
        Ok(LegendrePair { f, f_hat, kappa, hess: Hessian::new(f), hess_hat: Hessian::new(f_hat) })
    }

    pub fn map(&self, point: &[MpFloat], prec: Precision) -> Result<(Vec<MpFloat>, Matrix<MpFloat>), SymmetryError> {
        legendre_map(self.f, &self.hess, self.kappa, point, prec)
    }

    pub fn check(&self, point: &[MpFloat], prec: Precision) -> Result<LegendrePoint, SymmetryError> {
        let n = self.f.dim;
        let (t_hat, jac) = self.map(point, prec)?;
        let jinv = jac.inverse(prec)?;
        let h = self.hess.at(point, prec)?;
        let h_hat = self.hess_hat.at(&t_hat, prec)?;
        let offset = (0..n)
            .map(|a| (0..n).map(|b| (h_hat.get(a, b).clone() - h.get(a, b).clone()).as_f64()).collect())
            .collect();
        let fr = self.f.frame::<MpFloat>(point, prec, 3)?;
        let fr_hat = self.f_hat.frame::<MpFloat>(&t_hat, prec, 3)?;
        let mut third = 0.0f64;
        for a in 0..n {
            for b in a..n {
                for g in 0..n {
                    let mut pulled = MpFloat::zero_at(prec);
                    for d in 0..n {
                        pulled = pulled + fr.c3.at(&[a, b, d]).clone() * jinv.get(d, g).clone();
                    }
                    let diff = (fr_hat.c3.at(&[a, b, g]).clone() - pulled).magnitude().as_f64();
                    third = third.max(diff);
                }
            }
        }
        Ok(LegendrePoint { t_hat: t_hat.iter().map(|x| x.as_f64()).collect(), offset, third })
    }
}

/// Residual of a Legendre pair over a batch of points.
#[derive(Clone, Debug)]
pub struct LegendreSummary {
    pub points: usize,
    /// Largest third-derivative mismatch.
    pub third: f64,
    /// Largest deviation of the second-derivative offset from its value
    /// at the first point.
    pub offset_variation: f64,
    /// Offset matrix at the first point.
    pub offset: Vec<Vec<f64>>,
    /// Largest raw second-derivative difference, offset included.
    pub raw_second: f64,
}

impl LegendreSummary {
    /// Mismatch of second derivatives modulo constants.
    pub fn residual(&self) -> f64 {
        self.third.max(self.offset_variation)
    }
}

/// Single-point check; see [`LegendrePair::check`].
pub fn legendre_check(
    f: &Prepotential,
    f_hat: &Prepotential,
    kappa: usize,
    point: &[MpFloat],
    prec: Precision,
) -> Result<LegendrePoint, SymmetryError> {
    LegendrePair::new(f, f_hat, kappa)?.check(point, prec)
}

pub fn legendre_check_points(
    f: &Prepotential,
    f_hat: &Prepotential,
    kappa: usize,
    points: &[Vec<MpFloat>],
    prec: Precision,
) -> Result<LegendreSummary, SymmetryError> {
    let pair = LegendrePair::new(f, f_hat, kappa)?;
    let per: Vec<LegendrePoint> = points.par_iter().map(|p| pair.check(p, prec)).collect::<Result<_, _>>()?;
    let first = per.first().map(|p| p.offset.clone()).unwrap_or_default();
    let mut s = LegendreSummary { points: per.len(), third: 0.0, offset_variation: 0.0, offset: first.clone(), raw_second: 0.0 };
    for p in &per {
        s.third = s.third.max(p.third);
        s.raw_second = s.raw_second.max(p.second());
        for (row, row0) in p.offset.iter().zip(&first) {
            for (x, x0) in row.iter().zip(row0) {
                s.offset_variation = s.offset_variation.max((x - x0).abs());
            }
        }
    }
    Ok(s)
}

/// Determinant of a square matrix of expressions by cofactor expansion.
fn det_expr(m: &[Vec<Expression>]) -> Expression {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut terms = Vec::with_capacity(n);
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Expression>> =
            m[1..].iter().map(|row| row.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, e)| e.clone()).collect()).collect();
        let t = m[0][j].mul(&det_expr(&minor));
        terms.push(if j % 2 == 0 { t } else { t.neg() });
    }
    Expression::sum(terms)
}

/// Ĝ as a function of the original coordinates.
#[derive(Clone, Debug)]
pub struct TransformedG {
    /// `G - (1/24) log det(dt̂/dt)`, pulled back to `t`.
    pub expr: Expression,
    pub jacobian_det: Expression,
    pub tau_rule: &'static str,
}

/// `Ĝ = G - (1/24) log det(dt̂/dt)` under `S_kappa`.
pub fn transform_g_legendre(g: &GCandidate, p: &Prepotential, kappa: usize) -> Result<TransformedG, SymmetryError> {
    check_index(kappa, p.dim)?;
    if g.dim() != p.dim {
        return Err(SymmetryError::DimensionMismatch(g.dim(), p.dim));
    }
    let n = p.dim;
    let fk = p.f.diff(kappa);
    let ck: Vec<Vec<Expression>> = (0..n).map(|b| (0..n).map(|c| fk.diff(b).diff(c)).collect()).collect();
    let eta_inv_det = p.eta_inv().det(Precision::default());
    let det = det_expr(&ck).scale(&eta_inv_det);
    let det = crate::expr::normalize(&det).unwrap_or(det);
    if det.is_zero() {
        return Err(SymmetryError::SingularTransform(0.0));
    }
    let expr = g.to_expression().sub(&Expression::log(det.clone()).scale(&q(1, 24)));
    Ok(TransformedG { expr, jacobian_det: det, tau_rule: "tau_hat = tau" })
}

/// Largest mismatch between the hatted gradients of a transformed G and a
/// candidate `g_hat` on the hatted manifold. Additive constants are invisible.
pub fn compare_hatted_gradients(
    t: &TransformedG,
    f: &Prepotential,
    kappa: usize,
    g_hat: &GCandidate,
    points: &[Vec<MpFloat>],
    prec: Precision,
) -> Result<f64, SymmetryError> {
    let n = f.dim;
    let hess = Hessian::new(f);
    let grad: Vec<Expression> = (0..n).map(|i| t.expr.diff(i)).collect();
    let gh = g_hat.to_expression();
    let grad_hat: Vec<Expression> = (0..n).map(|i| gh.diff(i)).collect();
    let vals: Vec<f64> = points
        .par_iter()
        .map(|pt| -> Result<f64, SymmetryError> {
            let (t_hat, jac) = legendre_map(f, &hess, kappa, pt, prec)?;
            let jinv = jac.inverse(prec)?;
            let dg: Vec<MpFloat> = grad.iter().map(|e| e.eval_with(pt, prec)).collect::<Result<_, _>>()?;
            let mut worst = 0.0f64;
            for (gi, e) in grad_hat.iter().enumerate() {
                let mut pulled = MpFloat::zero_at(prec);
                for d in 0..n {
                    pulled = pulled + dg[d].clone() * jinv.get(d, gi).clone();
                }
                let want = e.eval_with(&t_hat, prec)?;
                worst = worst.max((want - pulled).magnitude().as_f64());
            }
            Ok(worst)
        })
        .collect::<Result<_, _>>()?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

/// `γ̂ = γ - n q_kappa / 24`.
pub fn transform_gamma_legendre(gamma: &BigRational, n: usize, q_kappa: &BigRational) -> BigRational {
    gamma - BigRational::from_integer(BigInt::from(n)) * q_kappa / q(24, 1)
}

/// Result of the inversion on G and γ.
#[derive(Clone, Debug, PartialEq)]
pub struct Inversion {
    /// Ĝ with G's terms read in the inverted coordinates.
    pub g_hat: GCandidate,
    /// `n/24 - 1/2`.
    pub log_coeff: BigRational,
    /// `γ̂ - γ = (n/24 - 1/2)(1 - d)`.
    pub gamma_shift: BigRational,
    pub tau_rule: &'static str,
}

/// `Ĝ = G + (n/24 - 1/2) log t^n`. Needs a linear Euler field and `d != 1`.
pub fn transform_g_inversion(g: &GCandidate, euler: &EulerField, d: &BigRational) -> Result<Inversion, SymmetryError> {
    if !euler.is_linear() {
        return Err(SymmetryError::PreconditionViolated("Euler field has constant shifts".into()));
    }
    if *d == q(1, 1) {
        return Err(SymmetryError::PreconditionViolated("d = 1".into()));
    }
    let n = g.dim();
    if euler.dim() != n {
        return Err(SymmetryError::DimensionMismatch(euler.dim(), n));
    }
    let c = q(n as i64, 24) - q(1, 2);
    let g_hat = g.clone().with_log(c.clone(), Expression::var(n - 1));
    let gamma_shift = &c * (q(1, 1) - d);
    Ok(Inversion { g_hat, log_coeff: c, gamma_shift, tau_rule: "tau_hat = tau / sqrt(t^n)" })
}

/// Mean of `Ê(Ĝ)` over points of the hatted manifold and its spread; a
/// constant value confirms the anomaly independently of the charges.
pub fn euler_on_g(p: &Prepotential, g: &GCandidate, points: &[Vec<MpFloat>], prec: Precision) -> Result<(f64, f64), SymmetryError> {
    let ge = g.to_expression();
    let grad: Vec<Expression> = (0..p.dim).map(|i| ge.diff(i)).collect();
    let vals: Vec<f64> = points
        .iter()
        .map(|pt| -> Result<f64, SymmetryError> {
            let e = p.euler.at(pt, prec);
            let mut s = MpFloat::zero_at(prec);
            for (ei, gi) in e.iter().zip(&grad) {
                s = s + ei.clone() * gi.eval_with(pt, prec)?;
            }
            Ok(s.as_f64())
        })
        .collect::<Result<_, _>>()?;
    let mean = vals.iter().sum::<f64>() / vals.len().max(1) as f64;
    let spread = vals.iter().fold(0.0f64, |m, v| m.max((v - mean).abs()));
    Ok((mean, spread))
}

/// Seeded points of `F`'s manifold whose images under `S_kappa` lie where
/// every log of `F̂` and `Ĝ` is defined.
pub fn legendre_points(
    pair: &LegendrePair<'_>,
    g_hat: &GCandidate,
    seed: u64,
    count: usize,
    prec: Precision,
) -> Vec<Vec<MpFloat>> {
    let mut args = Vec::new();
    crate::catalog::log_arguments(&pair.f_hat.f, &mut args);
    args.extend(g_hat.logs.iter().map(|l| l.arg.clone()));
    let accept = |p: &[BigRational]| -> bool {
        let x = crate::caustics::point_at(p, prec);
        let Ok((t_hat, _)) = pair.map(&x, prec) else { return false };
        args.iter().all(|a| a.eval_with(&t_hat, prec).is_ok_and(|v| v.as_f64() >= crate::catalog::MIN_LOG_ARGUMENT))
    };
    crate::sampling::rational_points(seed, count, pair.f.dim, 2, accept)
        .iter()
        .map(|p| crate::caustics::point_at(p, prec))
        .collect()
}
