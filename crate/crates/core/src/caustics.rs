//! Canonical coordinates, caustic detection and logarithmic residues.
//!
//! Canonical coordinates are the eigenvalues of `U = E o`, computed as the
//! roots of `det(g - lambda eta^{-1})`. Idempotents are the spectral
//! projections of the unit field. Caustic behaviour is probed along rays:
//! collision exponents by a log-log fit of the closing gap, residues by
//! Richardson extrapolation of `eps * omega`.

use num_rational::BigRational;
use thiserror::Error;

use crate::expr::Expression;
use crate::frobenius::{FrobeniusError, FrobeniusFrame, Prepotential};
use crate::getzler::GCandidate;
use crate::linalg::Matrix;
use crate::roots::{self, RootError};
use crate::scalar::{Complex, EvalError, MpFloat, Precision, Real, Scalar};

type C = Complex<MpFloat>;

/// Minimum separation of canonical coordinates for a semisimple point.
pub const SEMISIMPLE_GAP: f64 = 1e-8;

/// Residue bookkeeping note attached to reports: the residues of
/// `d log tau_I` and `d log J` are taken as `-N/16` and `-N/2`, the only
/// assignment compatible with `G = log tau_I - (1/24) log J`.
pub const RESIDUE_LABEL_NOTE: &str = "lemma4-labels-swapped";

#[derive(Debug, Error)]
pub enum CausticError {
    #[error("multiplication is not semisimple here (min gap {0:e})")]
    NotSemisimple(f64),
    #[error("canonical coordinates do not collide along the path")]
    NoCollision,
    #[error("ray limit diverges; the form is not logarithmic here")]
    NotLogarithmic,
    #[error("operation requires a 2-dimensional model")]
    Not2D,
    #[error("canonical coordinates are not real at this point")]
    ComplexCanonical,
    #[error(transparent)]
    Frobenius(#[from] FrobeniusError),
    #[error(transparent)]
    Roots(#[from] RootError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Point in flat coordinates at working precision.
pub fn point_at(q: &[BigRational], prec: Precision) -> Vec<MpFloat> {
    q.iter().map(|x| MpFloat::from_rational(x, prec)).collect()
}

fn frame(p: &Prepotential, point: &[MpFloat], prec: Precision) -> Result<FrobeniusFrame<MpFloat>, CausticError> {
    Ok(p.frame(point, prec, 3)?)
}

/// Ascending coefficients of `sum_k c_k x^k` interpolating `(xs[k], ys[k])`.
fn interpolate<S: Scalar>(xs: &[S], ys: &[S], prec: Precision) -> Vec<S> {
    let n = xs.len();
    let mut dd = ys.to_vec();
    for level in 1..n {
        for i in (level..n).rev() {
            dd[i] = (dd[i].clone() - dd[i - 1].clone()) / (xs[i].clone() - xs[i - level].clone());
        }
    }
    let mut coeffs = vec![dd[n - 1].clone()];
    for i in (0..n - 1).rev() {
        // coeffs * (x - xs[i]) + dd[i]
        let mut next = vec![S::zero_at(prec); coeffs.len() + 1];
        for (k, c) in coeffs.iter().enumerate() {
            next[k + 1] = next[k + 1].clone() + c.clone();
            next[k] = next[k].clone() - c.clone() * xs[i].clone();
        }
        next[0] = next[0].clone() + dd[i].clone();
        coeffs = next;
    }
    coeffs
}

/// Ascending coefficients of `det(g - lambda eta^{-1})` from a frame.
pub fn poly_lambda_frame<S: Scalar>(fr: &FrobeniusFrame<S>) -> Vec<S> {
    let n = fr.n;
    let prec = fr.prec;
    let g = fr.intersection_form();
    let xs: Vec<S> = (0..=n).map(|k| S::from_i64(k as i64, prec)).collect();
    let ys: Vec<S> = xs.iter().map(|l| g.sub(&fr.eta_inv.scale(l)).det(prec)).collect();
    interpolate(&xs, &ys, prec)
}

/// Characteristic polynomial of the canonical coordinates at `point`.
pub fn poly_lambda<S: Scalar>(p: &Prepotential, point: &[S], prec: Precision) -> Result<Vec<S>, CausticError> {
    Ok(poly_lambda_frame(&p.frame(point, prec, 3)?))
}

/// Discriminant of `poly_lambda`; vanishes exactly on the caustic.
pub fn discriminant<S: Scalar>(p: &Prepotential, point: &[S], prec: Precision) -> Result<S, CausticError> {
    Ok(roots::discriminant(&poly_lambda(p, point, prec)?, prec))
}

/// Canonical coordinates, unsorted multiplicities included, sorted by real part.
pub fn canonical_values(p: &Prepotential, point: &[MpFloat], prec: Precision) -> Result<Vec<C>, CausticError> {
    let coeffs: Vec<C> = poly_lambda(p, point, prec)?.into_iter().map(|c| C::real(c, prec)).collect();
    Ok(roots::roots(&coeffs, prec)?)
}

/// Canonical data at a semisimple point.
#[derive(Clone, Debug)]
pub struct CanonicalFrame {
    pub point: Vec<MpFloat>,
    pub u: Vec<C>,
    /// Column `i` is the idempotent `d/du_i` in the flat frame.
    pub idempotents: Vec<Vec<C>>,
    /// `det(dt^a/du_i)`.
    pub jacobian: C,
    pub semisimple: bool,
    pub min_gap: f64,
}

impl CanonicalFrame {
    /// Component `alpha` of idempotent `i`.
    pub fn idempotent(&self, i: usize) -> &[C] {
        &self.idempotents[i]
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.u.iter().all(|z| z.im.as_f64().abs() <= tol * (1.0 + z.re.as_f64().abs()))
            && self.idempotents.iter().flatten().all(|z| z.im.as_f64().abs() <= tol * (1.0 + z.re.as_f64().abs()))
    }

    /// Coordinates `du_i(v)` of a flat-frame vector in the idempotent basis.
    pub fn du(&self, v: &[MpFloat], prec: Precision) -> Result<Vec<C>, CausticError> {
        let n = self.u.len();
        let mut m: Vec<Vec<C>> = (0..n).map(|a| (0..n).map(|i| self.idempotents[i][a].clone()).collect()).collect();
        let mut rhs: Vec<C> = v.iter().map(|x| C::real(x.clone(), prec)).collect();
        solve_complex(&mut m, &mut rhs, prec)?;
        Ok(rhs)
    }
}

fn complex_mat_vec(m: &Matrix<MpFloat>, v: &[C], prec: Precision) -> Vec<C> {
    (0..m.rows())
        .map(|i| {
            let mut acc = C::zero(prec);
            for (j, x) in v.iter().enumerate() {
                acc = acc + x.scale(m.get(i, j));
            }
            acc
        })
        .collect()
}

/// Flat-frame product of complex vectors.
pub fn multiply_complex(fr: &FrobeniusFrame<MpFloat>, x: &[C], y: &[C]) -> Vec<C> {
    let n = fr.n;
    (0..n)
        .map(|a| {
            let mut acc = C::zero(fr.prec);
            for b in 0..n {
                for c in 0..n {
                    acc = acc + (x[b].clone() * y[c].clone()).scale(fr.c3_up.at(&[a, b, c]));
                }
            }
            acc
        })
        .collect()
}

/// Gaussian elimination in place; `rhs` receives the solution.
fn solve_complex(m: &mut [Vec<C>], rhs: &mut [C], prec: Precision) -> Result<C, EvalError> {
    let n = rhs.len();
    let mut det = C::one(prec);
    for c in 0..n {
        let p = (c..n)
            .max_by(|&a, &b| m[a][c].abs().as_f64().partial_cmp(&m[b][c].abs().as_f64()).unwrap_or(std::cmp::Ordering::Equal))
            .expect("non-empty range");
        if m[p][c].is_zero() {
            return Err(EvalError::DivisionByZero);
        }
        if p != c {
            m.swap(p, c);
            rhs.swap(p, c);
            det = -det;
        }
        let piv = m[c][c].clone();
        det = det * piv.clone();
        for r in 0..n {
            if r == c {
                continue;
            }
            let f = m[r][c].checked_div(&piv)?;
            for j in c..n {
                let v = m[r][j].clone() - f.clone() * m[c][j].clone();
                m[r][j] = v;
            }
            rhs[r] = rhs[r].clone() - f * rhs[c].clone();
        }
    }
    for c in 0..n {
        rhs[c] = rhs[c].checked_div(&m[c][c])?;
    }
    Ok(det)
}

/// Determinant of a complex matrix given by columns.
pub fn complex_det(cols: &[Vec<C>], prec: Precision) -> C {
    let n = cols.len();
    let mut m: Vec<Vec<C>> = (0..n).map(|a| (0..n).map(|i| cols[i][a].clone()).collect()).collect();
    let mut rhs = vec![C::zero(prec); n];
    solve_complex(&mut m, &mut rhs, prec).unwrap_or_else(|_| C::zero(prec))
}

/// Canonical coordinates, idempotents and Jacobian at a semisimple point.
pub fn canonical_frame(p: &Prepotential, point: &[MpFloat], prec: Precision) -> Result<CanonicalFrame, CausticError> {
    let fr = frame(p, point, prec)?;
    canonical_from_frame(p, &fr, SEMISIMPLE_GAP)
}

/// Gap threshold for probes close to a caustic: half the working digits.
pub fn probe_gap(prec: Precision) -> f64 {
    prec.epsilon().sqrt()
}

fn probe_frame(p: &Prepotential, point: &[MpFloat], prec: Precision) -> Result<CanonicalFrame, CausticError> {
    let fr = frame(p, point, prec)?;
    canonical_from_frame(p, &fr, probe_gap(prec))
}

/// Canonical frame with an explicit relative gap threshold.
pub fn canonical_from_frame(
    p: &Prepotential,
    fr: &FrobeniusFrame<MpFloat>,
    gap_tol: f64,
) -> Result<CanonicalFrame, CausticError> {
    let prec = fr.prec;
    let n = fr.n;
    let coeffs: Vec<C> = poly_lambda_frame(fr).into_iter().map(|c| C::real(c, prec)).collect();
    let u = roots::roots(&coeffs, prec)?;
    let gap = roots::min_gap(&u);
    let scale = u.iter().map(|z| z.abs().as_f64()).fold(1.0, f64::max);
    if gap < gap_tol * scale {
        return Err(CausticError::NotSemisimple(gap));
    }
    let unit: Vec<C> = (0..n).map(|a| if a == p.identity { C::one(prec) } else { C::zero(prec) }).collect();
    let mut idempotents = Vec::with_capacity(n);
    for i in 0..n {
        let mut v = unit.clone();
        for j in 0..n {
            if j == i {
                continue;
            }
            // (U - u_j) v / (u_i - u_j)
            let uv = complex_mat_vec(&fr.u, &v, prec);
            let denom = u[i].clone() - u[j].clone();
            v = uv
                .into_iter()
                .zip(&v)
                .map(|(a, b)| (a - u[j].clone() * b.clone()).checked_div(&denom))
                .collect::<Result<_, _>>()?;
        }
        idempotents.push(v);
    }
    let jacobian = complex_det(&idempotents, prec);
    Ok(CanonicalFrame { point: fr.point.clone(), u, idempotents, jacobian, semisimple: true, min_gap: gap })
}

/// `max |e_i o e_j - delta_ij e_i|` over idempotent pairs.
pub fn idempotency_residual(p: &Prepotential, cf: &CanonicalFrame, prec: Precision) -> Result<f64, CausticError> {
    let fr = frame(p, &cf.point, prec)?;
    let n = fr.n;
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            let prod = multiply_complex(&fr, &cf.idempotents[i], &cf.idempotents[j]);
            for a in 0..n {
                let want = if i == j { cf.idempotents[i][a].clone() } else { C::zero(prec) };
                worst = worst.max((prod[a].clone() - want).abs().as_f64());
            }
        }
    }
    Ok(worst)
}

/// Largest distance between sorted roots of `poly_lambda` and the
/// double-precision eigenvalues of `U`.
pub fn spectral_mismatch(p: &Prepotential, point: &[MpFloat], prec: Precision) -> Result<f64, CausticError> {
    let fr = frame(p, point, prec)?;
    let coeffs: Vec<C> = poly_lambda_frame(&fr).into_iter().map(|c| C::real(c, prec)).collect();
    let u = roots::roots(&coeffs, prec)?;
    let m: Vec<Vec<f64>> = (0..fr.n).map(|i| (0..fr.n).map(|j| fr.u.get(i, j).as_f64()).collect()).collect();
    let mut ev: Vec<C> = roots::eigenvalues_f64(&m).into_iter().map(|(a, b)| C::from_f64(a, b, prec)).collect();
    roots::sort_roots(&mut ev);
    let ev = roots::match_roots(&u, ev);
    Ok(u.iter().zip(&ev).map(|(a, b)| (a.clone() - b.clone()).abs().as_f64()).fold(0.0, f64::max))
}

/// A curve hitting a caustic at `s = 0`.
#[derive(Clone, Debug)]
pub enum Ray {
    /// `t(s) = base + s * dir`.
    Linear { base: Vec<BigRational>, dir: Vec<BigRational> },
    /// `t(s) = base` except `t_index = ln s`; the caustic sits at `exp(t_index) = 0`.
    Log { base: Vec<BigRational>, index: usize },
}

impl Ray {
    pub fn point(&self, s: &MpFloat, prec: Precision) -> Result<Vec<MpFloat>, EvalError> {
        match self {
            Ray::Linear { base, dir } => Ok(base
                .iter()
                .zip(dir)
                .map(|(b, d)| MpFloat::from_rational(b, prec) + s.clone() * MpFloat::from_rational(d, prec))
                .collect()),
            Ray::Log { base, index } => {
                let mut p = point_at(base, prec);
                p[*index] = s.ln()?;
                Ok(p)
            }
        }
    }

    /// Tangent `dt/d(log-coordinate)`: the ray direction, or `d/dt_index`.
    pub fn direction(&self, prec: Precision) -> Vec<MpFloat> {
        match self {
            Ray::Linear { dir, .. } => point_at(dir, prec),
            Ray::Log { base, index } => {
                (0..base.len()).map(|a| if a == *index { MpFloat::one_at(prec) } else { MpFloat::zero_at(prec) }).collect()
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Ray::Linear { base, .. } | Ray::Log { base, .. } => base.len(),
        }
    }
}

/// Log-spaced samples `s in [1e-4, 1e-2]`, largest first.
pub fn fit_samples() -> Vec<f64> {
    (0..=8).map(|k| 10f64.powf(-2.0 - k as f64 / 4.0)).collect()
}

/// Result of a log-log fit of the closing gap.
#[derive(Clone, Debug)]
pub struct CollisionFit {
    /// `2 * slope`.
    pub exponent: f64,
    pub slope: f64,
    /// Indices of the colliding pair in the ordering at the largest `s`.
    pub pair: (usize, usize),
    pub samples: Vec<(f64, f64)>,
    /// Largest deviation of a sample from the fitted line, in log space.
    pub fit_residual: f64,
}

/// Least-squares fit of `log |u_i - u_j|` against `log s` for the pair of
/// tracked root sequences that closes.
pub fn fit_collision(ss: &[f64], tracks: &[Vec<C>]) -> Result<CollisionFit, CausticError> {
    let n = tracks[0].len();
    let last = tracks.last().expect("at least one sample");
    let mut pair = None;
    let mut best = f64::INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            let g = (last[i].clone() - last[j].clone()).abs().as_f64();
            if g < best {
                best = g;
                pair = Some((i, j));
            }
        }
    }
    let (i, j) = pair.ok_or(CausticError::NoCollision)?;
    let samples: Vec<(f64, f64)> = ss
        .iter()
        .zip(tracks)
        .map(|(s, u)| (f64::ln(*s), (u[i].clone() - u[j].clone()).abs().ln().map(|v| v.as_f64()).unwrap_or(f64::NEG_INFINITY)))
        .collect();
    if samples.iter().any(|(_, y)| !y.is_finite()) {
        return Err(CausticError::NoCollision);
    }
    let first_gap = samples[0].1;
    let last_gap = samples.last().unwrap().1;
    if last_gap >= first_gap {
        return Err(CausticError::NoCollision);
    }
    let (slope, resid) = least_squares(&samples);
    if slope <= 0.05 {
        return Err(CausticError::NoCollision);
    }
    Ok(CollisionFit { exponent: 2.0 * slope, slope, pair: (i, j), samples, fit_residual: resid })
}

/// Slope and worst residual of a least-squares line.
pub fn least_squares(xy: &[(f64, f64)]) -> (f64, f64) {
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let resid = xy.iter().map(|p| (p.1 - icpt - slope * p.0).abs()).fold(0.0, f64::max);
    (slope, resid)
}

/// Root sequences along `ss` with nearest-neighbour labels.
pub fn track<E>(ss: &[f64], mut at: impl FnMut(f64) -> Result<Vec<C>, E>) -> Result<Vec<Vec<C>>, E> {
    let mut out: Vec<Vec<C>> = Vec::with_capacity(ss.len());
    for &s in ss {
        let u = at(s)?;
        let u = match out.last() {
            Some(prev) => roots::match_roots(prev, u),
            None => u,
        };
        out.push(u);
    }
    Ok(out)
}

/// Fitted collision exponent `N` along a ray (`|u_i - u_j| ~ s^{N/2}`).
pub fn collision_exponent(p: &Prepotential, ray: &Ray, prec: Precision) -> Result<CollisionFit, CausticError> {
    let ss = fit_samples();
    let tracks = track(&ss, |s| {
        let pt = ray.point(&MpFloat::from_f64(s, prec), prec)?;
        canonical_values(p, &pt, prec)
    })?;
    fit_collision(&ss, &tracks)
}

/// Egoroff metric rotation coefficients `eta_i = e_i^a eta_{ka}` at a frame.
fn egoroff_first(p: &Prepotential, cf: &CanonicalFrame, prec: Precision) -> Vec<C> {
    let k = p.identity;
    let eta: Vec<MpFloat> = (0..p.dim).map(|a| MpFloat::from_rational(p.eta().get(k, a), prec)).collect();
    cf.idempotents
        .iter()
        .map(|e| e.iter().zip(&eta).fold(C::zero(prec), |acc, (x, w)| acc + x.scale(w)))
        .collect()
}

fn shifted(point: &[MpFloat], dir: &[C], h: &MpFloat) -> Vec<MpFloat> {
    point.iter().zip(dir).map(|(t, d)| t.clone() + d.re.clone() * h.clone()).collect()
}

/// Relative finite-difference step for `prec`.
fn fd_step(prec: Precision) -> MpFloat {
    MpFloat::from_f64(10f64.powi(-(prec.digits as i32) / 4), prec)
}

/// Coefficient of `d log tau_I = (1/8)(u1-u2) eta_12^2/(eta_1 eta_2) d(u1-u2)`
/// evaluated on the flat-frame vector `v`.
pub fn tau2d_form(p: &Prepotential, point: &[MpFloat], v: &[MpFloat], prec: Precision) -> Result<MpFloat, CausticError> {
    if p.dim != 2 {
        return Err(CausticError::Not2D);
    }
    let cf = probe_frame(p, point, prec)?;
    if !cf.is_real(1e-20) {
        return Err(CausticError::ComplexCanonical);
    }
    let eta = egoroff_first(p, &cf, prec);
    // eta_12 = e_1(eta_2) by central difference along e_1.
    let h = MpFloat::from_f64(cf.min_gap, prec) * fd_step(prec);
    let e1 = cf.idempotent(0).to_vec();
    let eta2_at = |pt: Vec<MpFloat>| -> Result<C, CausticError> {
        let c = probe_frame(p, &pt, prec)?;
        let mut picked = egoroff_first(p, &c, prec);
        // Keep the labelling of the base point.
        let d0 = (c.u[1].clone() - cf.u[1].clone()).abs().as_f64();
        let d1 = (c.u[0].clone() - cf.u[1].clone()).abs().as_f64();
        Ok(if d1 < d0 { picked.swap_remove(0) } else { picked.swap_remove(1) })
    };
    let plus = eta2_at(shifted(point, &e1, &h))?;
    let minus = eta2_at(shifted(point, &e1, &-h.clone()))?;
    let two_h = C::real(h.clone() + h, prec);
    let eta12 = (plus - minus).checked_div(&two_h)?;
    let x = cf.du(v, prec)?;
    let du = cf.u[0].clone() - cf.u[1].clone();
    let dx = x[0].clone() - x[1].clone();
    let eighth = C::real(MpFloat::from_f64(0.125, prec), prec);
    let num = eighth * du * eta12.clone() * eta12 * dx;
    let val = num.checked_div(&(eta[0].clone() * eta[1].clone()))?;
    Ok(val.re)
}

/// `d log |J|` on `v`, by central differences with a step tied to the local gap.
pub fn dlog_jacobian(p: &Prepotential, point: &[MpFloat], v: &[MpFloat], prec: Precision) -> Result<MpFloat, CausticError> {
    let cf = probe_frame(p, point, prec)?;
    let vnorm = v.iter().map(|x| x.as_f64().abs()).fold(0.0, f64::max).max(1e-300);
    let scale = cf.min_gap.min(1.0) / vnorm;
    let h = MpFloat::from_f64(scale, prec) * fd_step(prec);
    let at = |sign: &MpFloat| -> Result<MpFloat, CausticError> {
        let pt: Vec<MpFloat> = point.iter().zip(v).map(|(t, d)| t.clone() + sign.clone() * h.clone() * d.clone()).collect();
        Ok(probe_frame(p, &pt, prec)?.jacobian.ln_abs()?)
    };
    let one = MpFloat::one_at(prec);
    let up = at(&one)?;
    let down = at(&-one)?;
    Ok((up - down) / (h.clone() + h))
}

/// `dG(v)` for a candidate written in the expression language.
pub fn dg_form(g: &GCandidate) -> impl Fn(&[MpFloat], &[MpFloat], Precision) -> Result<MpFloat, CausticError> {
    let expr: Expression = g.to_expression();
    let grads: Vec<Expression> = (0..g.dim()).map(|i| expr.diff(i)).collect();
    move |pt, v, prec| {
        let mut acc = MpFloat::zero_at(prec);
        for (gi, vi) in grads.iter().zip(v) {
            if vi.vanishes() {
                continue;
            }
            acc = acc + gi.eval_with(pt, prec)? * vi.clone();
        }
        Ok(acc)
    }
}

/// Extrapolated residue with its error estimate.
#[derive(Clone, Debug)]
pub struct ResidueEstimate {
    pub value: f64,
    pub error: f64,
    /// Raw `R(eps)` samples, largest `eps` first.
    pub samples: Vec<(f64, f64)>,
}

/// Starting ray parameter for residue probes.
pub const PROBE_EPS: f64 = 1e-3;

/// Residue of a logarithmic 1-form along the caustic `kappa = 0` crossed by
/// `ray`. For linear rays `R(eps) = omega(v) kappa / dkappa(v)`; for log rays
/// the coefficient of `d t_index` itself. The limit `eps -> 0` is taken by
/// Richardson extrapolation at ratio 2 over three levels.
pub fn residue_probe(
    form: impl Fn(&[MpFloat], &[MpFloat], Precision) -> Result<MpFloat, CausticError>,
    kappa: &Expression,
    ray: &Ray,
    prec: Precision,
) -> Result<ResidueEstimate, CausticError> {
    let v = ray.direction(prec);
    let kgrad: Vec<Expression> = (0..ray.dim()).map(|i| kappa.diff(i)).collect();
    let mut samples = Vec::new();
    for lvl in 0..4 {
        let eps = PROBE_EPS / f64::powi(2.0, lvl);
        let s = MpFloat::from_f64(eps, prec);
        let pt = ray.point(&s, prec)?;
        let w = form(&pt, &v, prec)?;
        let r = match ray {
            Ray::Log { .. } => w,
            Ray::Linear { .. } => {
                let k = kappa.eval_with(&pt, prec)?;
                let mut dk = MpFloat::zero_at(prec);
                for (g, vi) in kgrad.iter().zip(&v) {
                    dk = dk + g.eval_with(&pt, prec)? * vi.clone();
                }
                w * k.checked_div(dk)?
            }
        };
        samples.push((eps, r.as_f64()));
    }
    let r: Vec<f64> = samples.iter().map(|x| x.1).collect();
    if r.iter().any(|x| !x.is_finite()) {
        return Err(CausticError::NotLogarithmic);
    }
    let d2 = (r[2] - r[1]).abs();
    let d3 = (r[3] - r[2]).abs();
    if d3 > 1e-9 * (1.0 + r[3].abs()) && d3 >= 0.9 * d2 {
        return Err(CausticError::NotLogarithmic);
    }
    let rich = |a: f64, b: f64, c: f64| {
        let ab = 2.0 * b - a;
        let bc = 2.0 * c - b;
        (4.0 * bc - ab) / 3.0
    };
    let value = rich(r[1], r[2], r[3]);
    let error = (value - rich(r[0], r[1], r[2])).abs();
    Ok(ResidueEstimate { value, error, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, rat};
    use crate::frobenius::EulerField;

    fn prec() -> Precision {
        Precision::default()
    }

    fn cp1(r: i64) -> Prepotential {
        let f = parse(&format!("1/2*t1^2*t2 + exp({r}*t2)")).unwrap();
        Prepotential::new("cp1", 2, f, 0, EulerField::new(vec![rat(1, 1), rat(0, 1)], vec![rat(0, 1), rat(2, r)])).unwrap()
    }

    /// Germ normalization with `u = t1 +- (2/h) t2^{h/2}`.
    fn germ(h: i64) -> Prepotential {
        let c = (h + 1) * h * (h - 1);
        let f = parse(&format!("1/2*t1^2*t2 + 1/{c}*t2^{}", h + 1)).unwrap();
        Prepotential::new("i2", 2, f, 0, EulerField::linear(vec![rat(1, 1), rat(2, h)])).unwrap()
    }

    fn a3() -> Prepotential {
        let f = parse("1/2*t1^2*t3 + 1/2*t1*t2^2 - t2^2*t3^2 + 4/15*t3^5").unwrap();
        Prepotential::new("a3", 3, f, 0, EulerField::linear(vec![rat(1, 1), rat(3, 4), rat(1, 2)])).unwrap()
    }

    fn eaw() -> Prepotential {
        let f = parse("1/2*t1^2*t3 + 1/2*t1*t2^2 - 1/24*t2^4 + t2*exp(t3)").unwrap();
        Prepotential::new(
            "eaw",
            3,
            f,
            0,
            EulerField::new(vec![rat(1, 1), rat(1, 2), rat(0, 1)], vec![rat(0, 1), rat(0, 1), rat(3, 2)]),
        )
        .unwrap()
    }

    #[test]
    fn interpolation_recovers_coefficients() {
        let p = prec();
        let xs: Vec<BigRational> = (0..4).map(|k| rat(k, 1)).collect();
        let ys: Vec<BigRational> = xs.iter().map(|x| rat(2, 1) - x * rat(3, 1) + x * x * x * rat(5, 1)).collect();
        assert_eq!(interpolate(&xs, &ys, p), vec![rat(2, 1), rat(-3, 1), rat(0, 1), rat(5, 1)]);
    }

    #[test]
    fn cp1_canonical_coordinates_and_discriminant() {
        let p = prec();
        for r in 1..=3 {
            let m = cp1(r);
            let pt = point_at(&[rat(1, 3), rat(-1, 2)], p);
            let u = canonical_values(&m, &pt, p).unwrap();
            let split = 2.0 * (r as f64).sqrt() * (r as f64 * -0.25).exp();
            assert!((u[0].re.as_f64() - (1.0 / 3.0 - split)).abs() < 1e-14);
            assert!((u[1].re.as_f64() - (1.0 / 3.0 + split)).abs() < 1e-14);
            let disc = discriminant(&m, &pt, p).unwrap().as_f64();
            assert!((disc - 16.0 * r as f64 * (r as f64 * -0.5).exp()).abs() < 1e-13);
        }
    }

    #[test]
    fn germ_roots_and_caustic() {
        let p = prec();
        for h in 3..=6 {
            let m = germ(h);
            let pt = point_at(&[rat(1, 5), rat(1, 2)], p);
            let u = canonical_values(&m, &pt, p).unwrap();
            let split = 2.0 / h as f64 * 0.5f64.powf(h as f64 / 2.0);
            assert!((u[1].re.as_f64() - 0.2 - split).abs() < 1e-14);
            let at_zero = discriminant::<BigRational>(&m, &[rat(1, 5), rat(0, 1)], p).unwrap();
            assert_eq!(at_zero, rat(0, 1));
        }
    }

    #[test]
    fn eaw_roots_match_eigenvalues_and_close_at_minus_infinity() {
        let p = prec();
        let m = eaw();
        let pt = point_at(&[rat(1, 2), rat(-1, 3), rat(1, 4)], p);
        assert!(spectral_mismatch(&m, &pt, p).unwrap() < 1e-9);
        let far = point_at(&[rat(1, 2), rat(-1, 3), rat(-40, 1)], p);
        let near = discriminant(&m, &far, p).unwrap().as_f64().abs();
        let base = discriminant(&m, &pt, p).unwrap().as_f64().abs();
        assert!(near < 1e-10 * base, "{near} vs {base}");
    }

    #[test]
    fn idempotents_multiply_correctly() {
        let p = prec();
        for (m, q) in [
            (cp1(2), vec![rat(1, 3), rat(-1, 2)]),
            (germ(5), vec![rat(1, 7), rat(2, 3)]),
            (a3(), vec![rat(1, 2), rat(1, 3), rat(-2, 5)]),
            (eaw(), vec![rat(1, 2), rat(-1, 3), rat(1, 4)]),
        ] {
            let cf = canonical_frame(&m, &point_at(&q, p), p).unwrap();
            assert!(idempotency_residual(&m, &cf, p).unwrap() < 1e-40);
            for a in 0..m.dim {
                let s = cf.idempotents.iter().fold(C::zero(p), |acc, e| acc + e[a].clone());
                let want = if a == m.identity { 1.0 } else { 0.0 };
                assert!((s.re.as_f64() - want).abs() < 1e-40 && s.im.as_f64().abs() < 1e-40);
            }
        }
    }

    #[test]
    fn cp1_idempotents_have_the_closed_form() {
        let p = prec();
        let r = 2.0f64;
        let t2 = -0.5f64;
        let cf = canonical_frame(&cp1(2), &point_at(&[rat(1, 3), rat(-1, 2)], p), p).unwrap();
        let c = 0.5 * r.powf(-1.5) * (-r * t2 / 2.0).exp();
        assert!((cf.idempotents[1][1].re.as_f64() - c).abs() < 1e-14);
        assert!((cf.idempotents[0][1].re.as_f64() + c).abs() < 1e-14);
    }

    #[test]
    fn coinciding_coordinates_are_not_semisimple() {
        let p = prec();
        let err = canonical_frame(&germ(4), &point_at(&[rat(1, 2), rat(0, 1)], p), p).unwrap_err();
        assert!(matches!(err, CausticError::NotSemisimple(_)));
    }

    #[test]
    fn germ_and_a3_collision_exponents() {
        let p = prec();
        let ray = Ray::Linear { base: vec![rat(1, 3), rat(0, 1)], dir: vec![rat(0, 1), rat(1, 1)] };
        let fit = collision_exponent(&germ(5), &ray, p).unwrap();
        assert!((fit.exponent - 5.0).abs() < 0.02, "{}", fit.exponent);
        let fit = collision_exponent(&germ(4), &ray, p).unwrap();
        assert!((fit.exponent - 4.0).abs() < 0.02, "{}", fit.exponent);
        let ray = Ray::Linear { base: vec![rat(1, 5), rat(4, 1), rat(-3, 2)], dir: vec![rat(0, 1), rat(1, 1), rat(1, 3)] };
        let fit = collision_exponent(&a3(), &ray, p).unwrap();
        assert!((fit.exponent - 3.0).abs() < 0.05, "{}", fit.exponent);
    }

    #[test]
    fn path_away_from_caustic_has_no_collision() {
        let p = prec();
        let ray = Ray::Linear { base: vec![rat(1, 3), rat(1, 1)], dir: vec![rat(1, 1), rat(0, 1)] };
        assert!(matches!(collision_exponent(&germ(5), &ray, p), Err(CausticError::NoCollision)));
    }

    #[test]
    fn cp1_residues() {
        let p = prec();
        for r in 1..=3 {
            let m = cp1(r);
            let ray = Ray::Log { base: vec![rat(1, 3), rat(0, 1)], index: 1 };
            let kappa = Expression::exp_var(1, rat(1, 1));
            let g = GCandidate { linear: vec![rat(0, 1), rat(-r, 24)], logs: vec![] };
            let rg = residue_probe(dg_form(&g), &kappa, &ray, p).unwrap();
            assert!((rg.value + r as f64 / 24.0).abs() < 1e-10);
            let rt = residue_probe(|pt, v, pr| tau2d_form(&m, pt, v, pr), &kappa, &ray, p).unwrap();
            assert!((rt.value + r as f64 / 16.0).abs() < 1e-10, "{}", rt.value);
            let rj = residue_probe(|pt, v, pr| dlog_jacobian(&m, pt, v, pr), &kappa, &ray, p).unwrap();
            assert!((rj.value + r as f64 / 2.0).abs() < 1e-10, "{}", rj.value);
        }
    }

    #[test]
    fn germ_residues_obey_the_laws() {
        let p = prec();
        for h in 4..=6 {
            let m = germ(h);
            let hf = h as f64;
            let ray = Ray::Linear { base: vec![rat(1, 3), rat(0, 1)], dir: vec![rat(0, 1), rat(1, 1)] };
            let kappa = Expression::var(1);
            let rt = residue_probe(|pt, v, pr| tau2d_form(&m, pt, v, pr), &kappa, &ray, p).unwrap();
            assert!((rt.value + (hf - 2.0).powi(2) / (16.0 * hf)).abs() < 1e-6, "h={h}: {}", rt.value);
            let rj = residue_probe(|pt, v, pr| dlog_jacobian(&m, pt, v, pr), &kappa, &ray, p).unwrap();
            assert!((rj.value + (hf - 2.0) / 2.0).abs() < 1e-6, "h={h}: {}", rj.value);
        }
    }

    #[test]
    fn trivial_model_tau_form_vanishes_along_unit() {
        let p = prec();
        let m = germ(4);
        let v = point_at(&[rat(1, 1), rat(0, 1)], p);
        let w = tau2d_form(&m, &point_at(&[rat(1, 3), rat(1, 2)], p), &v, p).unwrap();
        assert!(w.as_f64().abs() < 1e-30);
    }

    #[test]
    fn divergent_form_is_not_logarithmic() {
        let p = prec();
        let ray = Ray::Linear { base: vec![rat(0, 1)], dir: vec![rat(1, 1)] };
        let kappa = Expression::var(0);
        // omega = dt / t^2
        let form = |pt: &[MpFloat], v: &[MpFloat], pr: Precision| -> Result<MpFloat, CausticError> {
            Ok(v[0].clone() / (pt[0].clone() * pt[0].clone()).checked_div(MpFloat::one_at(pr))?)
        };
        assert!(matches!(residue_probe(form, &kappa, &ray, p), Err(CausticError::NotLogarithmic)));
    }
}
