//! Polynomial roots in the complex plane.
//!
//! Initial approximations come from the eigenvalues of the f64 companion
//! matrix; they are then refined simultaneously by Aberth iteration at the
//! working precision, which handles clustered roots near caustics.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::scalar::{Complex, MpFloat, Precision, Real, Scalar};

type C = Complex<MpFloat>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RootError {
    #[error("leading coefficient vanishes")]
    DegenerateLeadingCoefficient,
    #[error("root iteration did not converge")]
    NoConvergence,
}

/// Horner evaluation of `sum coeffs[i] z^i` and its derivative.
pub fn eval_with_derivative<S: Real>(coeffs: &[Complex<S>], z: &Complex<S>, prec: Precision) -> (Complex<S>, Complex<S>) {
    let mut p = Complex::zero(prec);
    let mut dp = Complex::zero(prec);
    for c in coeffs.iter().rev() {
        dp = dp * z.clone() + p.clone();
        p = p * z.clone() + c.clone();
    }
    (p, dp)
}

pub fn eval<S: Real>(coeffs: &[Complex<S>], z: &Complex<S>, prec: Precision) -> Complex<S> {
    eval_with_derivative(coeffs, z, prec).0
}

/// Drops trailing zero coefficients.
fn trim<S: Real>(coeffs: &[Complex<S>]) -> &[Complex<S>] {
    let mut n = coeffs.len();
    while n > 0 && coeffs[n - 1].is_zero() {
        n -= 1;
    }
    &coeffs[..n]
}

/// Eigenvalues of the companion matrix in double precision.
pub fn companion_roots_f64(coeffs: &[(f64, f64)]) -> Option<Vec<(f64, f64)>> {
    let deg = coeffs.len().checked_sub(1)?;
    if deg == 0 {
        return Some(Vec::new());
    }
    let lead = nalgebra::Complex::new(coeffs[deg].0, coeffs[deg].1);
    if lead.norm() == 0.0 {
        return None;
    }
    let mut m = DMatrix::<nalgebra::Complex<f64>>::zeros(deg, deg);
    for i in 1..deg {
        m[(i, i - 1)] = nalgebra::Complex::new(1.0, 0.0);
    }
    for i in 0..deg {
        m[(i, deg - 1)] = -nalgebra::Complex::new(coeffs[i].0, coeffs[i].1) / lead;
    }
    let ev = m.eigenvalues()?;
    let out: Vec<(f64, f64)> = ev.iter().map(|z| (z.re, z.im)).collect();
    if out.iter().all(|(a, b)| a.is_finite() && b.is_finite()) {
        Some(out)
    } else {
        None
    }
}

/// Complex eigenvalues of a real f64 matrix.
pub fn eigenvalues_f64(m: &[Vec<f64>]) -> Vec<(f64, f64)> {
    let n = m.len();
    let dm = DMatrix::from_fn(n, n, |i, j| m[i][j]);
    dm.complex_eigenvalues().iter().map(|z| (z.re, z.im)).collect()
}

/// All roots with multiplicity, sorted by real part then imaginary part.
pub fn roots(coeffs: &[C], prec: Precision) -> Result<Vec<C>, RootError> {
    let coeffs = trim(coeffs);
    if coeffs.is_empty() {
        return Err(RootError::DegenerateLeadingCoefficient);
    }
    let deg = coeffs.len() - 1;
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[deg].clone();
    let monic: Vec<C> = coeffs.iter().map(|c| c.checked_div(&lead).expect("nonzero leading coefficient")).collect();
    let approx: Vec<(f64, f64)> = monic.iter().map(|c| c.to_f64_pair()).collect();
    let mut z: Vec<C> = match companion_roots_f64(&approx) {
        Some(r) => r.into_iter().map(|(a, b)| C::from_f64(a, b, prec)).collect(),
        None => circle_guesses(&approx, prec),
    };
    aberth(&monic, &mut z, prec)?;
    sort_roots(&mut z);
    Ok(z)
}

fn circle_guesses(monic: &[(f64, f64)], prec: Precision) -> Vec<C> {
    let deg = monic.len() - 1;
    let radius = 1.0 + monic[..deg].iter().map(|(a, b)| a.hypot(*b)).fold(0.0, f64::max);
    (0..deg)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / deg as f64;
            C::from_f64(radius * th.cos(), radius * th.sin(), prec)
        })
        .collect()
}

fn aberth(monic: &[C], z: &mut [C], prec: Precision) -> Result<(), RootError> {
    let n = z.len();
    let tol = 2f64.powi(-(prec.bits() as i32) + 24);
    let one = C::one(prec);
    for _ in 0..600 {
        let mut worst = 0.0f64;
        for i in 0..n {
            let (p, dp) = eval_with_derivative(monic, &z[i], prec);
            if p.is_zero() {
                continue;
            }
            let Ok(w) = p.checked_div(&dp) else {
                // Stationary point: nudge off it.
                let nudge = C::from_f64(tol.sqrt(), tol.sqrt(), prec);
                z[i] = z[i].clone() + nudge;
                worst = f64::INFINITY;
                continue;
            };
            let mut s = C::zero(prec);
            for j in 0..n {
                if j != i {
                    if let Ok(t) = one.checked_div(&(z[i].clone() - z[j].clone())) {
                        s = s + t;
                    }
                }
            }
            let denom = one.clone() - w.clone() * s;
            let step = w.checked_div(&denom).unwrap_or(w);
            let scale = 1.0f64.max(z[i].abs().as_f64());
            worst = worst.max(step.abs().as_f64() / scale);
            z[i] = z[i].clone() - step;
        }
        if worst <= tol {
            return Ok(());
        }
    }
    // Exactly repeated roots converge only linearly; accept if residuals are
    // at the noise floor.
    let ok = z.iter().all(|r| eval(monic, r, prec).abs().as_f64() <= tol.sqrt());
    if ok {
        Ok(())
    } else {
        Err(RootError::NoConvergence)
    }
}

pub fn sort_roots<S: Real>(z: &mut [Complex<S>]) {
    z.sort_by(|a, b| {
        let (ar, ai) = (a.re.as_f64(), a.im.as_f64());
        let (br, bi) = (b.re.as_f64(), b.im.as_f64());
        ar.partial_cmp(&br).unwrap_or(std::cmp::Ordering::Equal).then(ai.partial_cmp(&bi).unwrap_or(std::cmp::Ordering::Equal))
    });
}

/// Multiplicities by clustering roots closer than `tol`.
pub fn cluster(z: &[C], tol: f64) -> Vec<(C, usize)> {
    let mut out: Vec<(C, usize)> = Vec::new();
    for r in z {
        match out.iter_mut().find(|(c, _)| (c.clone() - r.clone()).abs().as_f64() < tol) {
            Some((_, m)) => *m += 1,
            None => out.push((r.clone(), 1)),
        }
    }
    out
}

/// Smallest pairwise distance.
pub fn min_gap(z: &[C]) -> f64 {
    let mut g = f64::INFINITY;
    for i in 0..z.len() {
        for j in i + 1..z.len() {
            g = g.min((z[i].clone() - z[j].clone()).abs().as_f64());
        }
    }
    g
}

/// Reorders `next` so that `next[i]` is the nearest unused root to `prev[i]`.
pub fn match_roots(prev: &[C], next: Vec<C>) -> Vec<C> {
    let mut pool: Vec<Option<C>> = next.into_iter().map(Some).collect();
    let mut out = Vec::with_capacity(prev.len());
    for p in prev {
        let mut best: Option<(usize, f64)> = None;
        for (j, c) in pool.iter().enumerate() {
            if let Some(c) = c {
                let d = (c.clone() - p.clone()).abs().as_f64();
                if best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((j, d));
                }
            }
        }
        let (j, _) = best.expect("as many roots as before");
        out.push(pool[j].take().unwrap());
    }
    out
}

/// Discriminant `prod_{i<j} (z_i - z_j)^2` of a root list.
pub fn root_discriminant(z: &[C], prec: Precision) -> C {
    let mut acc = C::one(prec);
    for i in 0..z.len() {
        for j in i + 1..z.len() {
            let d = z[i].clone() - z[j].clone();
            acc = acc * d.clone() * d;
        }
    }
    acc
}

/// Sylvester resultant of two polynomials (ascending coefficients).
pub fn resultant<S: Scalar>(p: &[S], q: &[S], prec: Precision) -> S {
    let m = p.len() - 1;
    let n = q.len() - 1;
    let size = m + n;
    if size == 0 {
        return S::one_at(prec);
    }
    let syl = crate::linalg::Matrix::from_fn(size, size, |i, j| {
        if i < n {
            // Row i holds p shifted by i, highest degree first.
            let k = j as isize - i as isize;
            if k >= 0 && (k as usize) <= m {
                p[m - k as usize].clone()
            } else {
                S::zero_at(prec)
            }
        } else {
            let r = i - n;
            let k = j as isize - r as isize;
            if k >= 0 && (k as usize) <= n {
                q[n - k as usize].clone()
            } else {
                S::zero_at(prec)
            }
        }
    });
    syl.det(prec)
}

/// Discriminant of `sum c_i x^i` with its actual leading coefficient:
/// `(-1)^{n(n-1)/2} Res(p, p') / a_n`.
pub fn discriminant<S: Scalar>(p: &[S], prec: Precision) -> S {
    let n = p.len() - 1;
    let dp: Vec<S> = (1..=n).map(|i| p[i].clone() * S::from_i64(i as i64, prec)).collect();
    let res = resultant(p, &dp, prec);
    let sign = if (n * (n.saturating_sub(1)) / 2) % 2 == 1 { -S::one_at(prec) } else { S::one_at(prec) };
    sign * res / p[n].clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::rat;
    use num_rational::BigRational;

    fn c(re: f64, im: f64, p: Precision) -> C {
        C::from_f64(re, im, p)
    }

    #[test]
    fn quadratic_and_cubic_roots() {
        let p = Precision::default();
        // x^2 + 1
        let r = roots(&[c(1.0, 0.0, p), c(0.0, 0.0, p), c(1.0, 0.0, p)], p).unwrap();
        assert!((r[0].im.as_f64() + 1.0).abs() < 1e-60 && (r[1].im.as_f64() - 1.0).abs() < 1e-60);
        // (x-1)(x-2)(x-3)
        let r = roots(&[c(-6.0, 0.0, p), c(11.0, 0.0, p), c(-6.0, 0.0, p), c(1.0, 0.0, p)], p).unwrap();
        for (k, z) in r.iter().enumerate() {
            assert!((z.re.as_f64() - (k + 1) as f64).abs() < 1e-50);
        }
    }

    #[test]
    fn clustered_roots_resolve_at_high_precision() {
        let p = Precision::default();
        // (x - 1)(x - 1 - 10^-12), coefficients built exactly.
        let e = rat(1, 1_000_000_000_000);
        let q = |v: BigRational| C::real(MpFloat::from_rational(&v, p), p);
        let coeffs = [q(rat(1, 1) + &e), q(-rat(2, 1) - &e), q(rat(1, 1))];
        let r = roots(&coeffs, p).unwrap();
        let gap = (r[1].clone() - r[0].clone()).abs().as_f64();
        assert!((gap - 1e-12).abs() < 1e-24, "gap {gap}");
    }

    #[test]
    fn double_root_is_accepted() {
        let p = Precision::default();
        let r = roots(&[c(1.0, 0.0, p), c(-2.0, 0.0, p), c(1.0, 0.0, p)], p).unwrap();
        assert_eq!(cluster(&r, 1e-7).len(), 1);
    }

    #[test]
    fn exact_discriminants() {
        let p = Precision::default();
        // a x^2 + b x + c: b^2 - 4ac
        let q = [rat(3, 1), rat(5, 1), rat(-2, 1)];
        assert_eq!(discriminant::<BigRational>(&q, p), rat(25 + 24, 1));
        // x^3 + x + 1: -4 - 27
        let q = [rat(1, 1), rat(1, 1), rat(0, 1), rat(1, 1)];
        assert_eq!(discriminant::<BigRational>(&q, p), rat(-31, 1));
    }

    #[test]
    fn matching_follows_nearest_neighbour() {
        let p = Precision::default();
        let prev = vec![c(0.0, 0.0, p), c(1.0, 0.0, p)];
        let next = vec![c(1.1, 0.0, p), c(0.1, 0.0, p)];
        let m = match_roots(&prev, next);
        assert!((m[0].re.as_f64() - 0.1).abs() < 1e-15);
    }
}
