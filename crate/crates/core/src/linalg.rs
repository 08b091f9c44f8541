//! Small dense matrices over any [`Scalar`] backend (n is at most 6 here).

use num_rational::BigRational;
use num_traits::Zero;

use crate::scalar::{EvalError, Precision, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize, prec: Precision) -> Self {
        Self::from_fn(rows, cols, |_, _| S::zero_at(prec))
    }

    pub fn identity(n: usize, prec: Precision) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { S::one_at(prec) } else { S::zero_at(prec) })
    }

    pub fn diagonal(d: &[S], prec: Precision) -> Self {
        Self::from_fn(d.len(), d.len(), |i, j| if i == j { d[i].clone() } else { S::zero_at(prec) })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<S> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Matrix<T> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn mul(&self, rhs: &Matrix<S>, prec: Precision) -> Self {
        assert_eq!(self.cols, rhs.rows, "matrix shapes do not compose");
        Self::from_fn(self.rows, rhs.cols, |i, j| {
            let mut acc = S::zero_at(prec);
            for k in 0..self.cols {
                acc = acc + self.get(i, k).clone() * rhs.get(k, j).clone();
            }
            acc
        })
    }

    pub fn mul_vec(&self, v: &[S], prec: Precision) -> Vec<S> {
        assert_eq!(self.cols, v.len(), "vector length mismatch");
        (0..self.rows)
            .map(|i| {
                let mut acc = S::zero_at(prec);
                for (k, x) in v.iter().enumerate() {
                    acc = acc + self.get(i, k).clone() * x.clone();
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, rhs: &Matrix<S>) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a.clone() + b.clone()).collect(),
        }
    }

    pub fn sub(&self, rhs: &Matrix<S>) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a.clone() - b.clone()).collect(),
        }
    }

    pub fn scale(&self, s: &S) -> Self {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a.clone() * s.clone()).collect() }
    }

    pub fn trace(&self, prec: Precision) -> S {
        let mut acc = S::zero_at(prec);
        for i in 0..self.rows.min(self.cols) {
            acc = acc + self.get(i, i).clone();
        }
        acc
    }

    /// Largest entry magnitude, as f64.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.magnitude().as_f64()).fold(0.0, f64::max)
    }

    // Row index in `col` at or below `from` with the largest nonzero entry.
    fn pivot(&self, col: usize, from: usize) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for r in from..self.rows {
            let v = self.get(r, col);
            if v.vanishes() {
                continue;
            }
            let m = v.magnitude().as_f64();
            if best.is_none_or(|(_, bm)| m > bm) {
                best = Some((r, m));
            }
        }
        best.map(|(r, _)| r)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn det(&self, prec: Precision) -> S {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        let mut m = self.clone();
        let mut det = S::one_at(prec);
        for c in 0..n {
            let Some(p) = m.pivot(c, c) else {
                return S::zero_at(prec);
            };
            if p != c {
                m.swap_rows(p, c);
                det = -det;
            }
            let piv = m.get(c, c).clone();
            det = det * piv.clone();
            for r in c + 1..n {
                let f = m.get(r, c).clone() / piv.clone();
                if f.vanishes() {
                    continue;
                }
                for j in c..n {
                    let v = m.get(r, j).clone() - f.clone() * m.get(c, j).clone();
                    m.set(r, j, v);
                }
            }
        }
        det
    }

    pub fn inverse(&self, prec: Precision) -> Result<Self, EvalError> {
        assert_eq!(self.rows, self.cols, "inverse of a non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n, prec);
        for c in 0..n {
            let p = a.pivot(c, c).ok_or(EvalError::DivisionByZero)?;
            a.swap_rows(p, c);
            inv.swap_rows(p, c);
            let piv = a.get(c, c).clone();
            for j in 0..n {
                a.set(c, j, a.get(c, j).clone() / piv.clone());
                inv.set(c, j, inv.get(c, j).clone() / piv.clone());
            }
            for r in 0..n {
                if r == c {
                    continue;
                }
                let f = a.get(r, c).clone();
                if f.vanishes() {
                    continue;
                }
                for j in 0..n {
                    a.set(r, j, a.get(r, j).clone() - f.clone() * a.get(c, j).clone());
                    inv.set(r, j, inv.get(r, j).clone() - f.clone() * inv.get(c, j).clone());
                }
            }
        }
        Ok(inv)
    }

    /// Solves `self * x = b` for square nonsingular `self`.
    pub fn solve(&self, b: &[S], prec: Precision) -> Result<Vec<S>, EvalError> {
        Ok(self.inverse(prec)?.mul_vec(b, prec))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LinearSystemError {
    #[error("system is inconsistent")]
    Inconsistent,
    #[error("system has a {0}-dimensional solution space")]
    Underdetermined(usize),
}

/// Unique solution of an overdetermined exact system `rows * x = rhs`.
pub fn solve_exact(mut rows: Vec<Vec<BigRational>>, mut rhs: Vec<BigRational>) -> Result<Vec<BigRational>, LinearSystemError> {
    let m = rows.first().map_or(0, |r| r.len());
    let mut pivot_row = 0;
    let mut pivots = Vec::new();
    for c in 0..m {
        let Some(p) = (pivot_row..rows.len()).find(|&r| !rows[r][c].is_zero()) else {
            continue;
        };
        rows.swap(p, pivot_row);
        rhs.swap(p, pivot_row);
        let inv = rows[pivot_row][c].recip();
        for x in rows[pivot_row].iter_mut() {
            *x *= &inv;
        }
        rhs[pivot_row] *= &inv;
        for r in 0..rows.len() {
            if r == pivot_row || rows[r][c].is_zero() {
                continue;
            }
            let f = rows[r][c].clone();
            for j in 0..m {
                let v = &rows[pivot_row][j] * &f;
                rows[r][j] -= v;
            }
            let v = &rhs[pivot_row] * &f;
            rhs[r] -= v;
        }
        pivots.push(c);
        pivot_row += 1;
    }
    if rhs[pivot_row..].iter().any(|v| !v.is_zero()) {
        return Err(LinearSystemError::Inconsistent);
    }
    if pivots.len() < m {
        return Err(LinearSystemError::Underdetermined(m - pivots.len()));
    }
    let mut x = vec![BigRational::zero(); m];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = rhs[r].clone();
    }
    Ok(x)
}
