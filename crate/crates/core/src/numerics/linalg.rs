//! Small dense linear algebra: row-major matrices, Cholesky, log-determinants.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::numerics::summation::pairwise_sum;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length does not match shape");
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                let src = other.row(k);
                let dst = out.row_mut(i);
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).fold(T::zero(), |acc, (&a, &b)| acc + a * b))
            .collect()
    }

    pub fn trace(&self) -> T {
        let d: Vec<T> = (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect();
        pairwise_sum(&d)
    }

    /// `I - self`.
    pub fn identity_minus(&self) -> Self {
        assert!(self.is_square());
        let mut out = self.clone();
        for v in out.data.iter_mut() {
            *v = -*v;
        }
        for i in 0..self.rows {
            out[(i, i)] += T::one();
        }
        out
    }

    pub fn max_asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.rows {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Copies the block starting at `(r0, c0)` with the given shape.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }
}

impl<T> Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for DenseMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Lower-triangular Cholesky factor `A = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    l: DenseMatrix<T>,
    /// `ln L_jj`, kept separately so that pivots near one keep their accuracy.
    log_diag: Vec<T>,
}

impl<T: Real> Cholesky<T> {
    /// Factors a symmetric matrix; only the lower triangle is read.
    pub fn factor(a: &DenseMatrix<T>) -> Result<Self> {
        Self::factor_shifted(a, false)
    }

    /// Factors `I - G` for symmetric `G`, with pivots formed as `1 - e_j`
    /// and logarithms taken by `ln_1p(-e_j)`. Accurate when `G` is small.
    pub fn factor_identity_minus(g: &DenseMatrix<T>) -> Result<Self> {
        Self::factor_shifted(g, true)
    }

    fn factor_shifted(a: &DenseMatrix<T>, identity_minus: bool) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Parameter(format!("Cholesky of a {}x{} matrix", a.rows, a.cols)));
        }
        let n = a.rows;
        let sign = if identity_minus { -T::one() } else { T::one() };
        let mut l = DenseMatrix::zeros(n, n);
        let mut log_diag = Vec::with_capacity(n);
        for j in 0..n {
            let mut s = a[(j, j)];
            for k in 0..j {
                s -= sign * l[(j, k)] * l[(j, k)];
            }
            // Pivot is s, or 1 - s for the shifted form.
            let (d, log_d) = if identity_minus {
                let d = T::one() - s;
                (d, (-s).ln_1p())
            } else {
                (s, s.ln())
            };
            if !(d > T::zero()) {
                return Err(Error::NotPositiveDefinite { index: j, pivot: d.as_f64() });
            }
            let d = d.sqrt();
            l[(j, j)] = d;
            log_diag.push(T::lit(0.5) * log_d);
            for i in (j + 1)..n {
                let mut s = sign * a[(i, j)];
                let (ri, rj) = (i * n, j * n);
                for k in 0..j {
                    s -= l.data[ri + k] * l.data[rj + k];
                }
                l[(i, j)] = s / d;
            }
        }
        Ok(Self { l, log_diag })
    }

    pub fn factor_matrix(&self) -> &DenseMatrix<T> {
        &self.l
    }

    pub fn logdet(&self) -> T {
        T::lit(2.0) * pairwise_sum(&self.log_diag)
    }

    /// Solves `L X = B` in place of a copy of `B`.
    pub fn solve_lower(&self, b: &DenseMatrix<T>) -> DenseMatrix<T> {
        let n = self.l.rows;
        assert_eq!(b.rows, n);
        let mut x = b.clone();
        for c in 0..b.cols {
            for i in 0..n {
                let mut s = x[(i, c)];
                for k in 0..i {
                    s -= self.l[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = s / self.l[(i, i)];
            }
        }
        x
    }

    /// Solves `A X = B`.
    pub fn solve(&self, b: &DenseMatrix<T>) -> DenseMatrix<T> {
        let n = self.l.rows;
        let mut x = self.solve_lower(b);
        for c in 0..b.cols {
            for i in (0..n).rev() {
                let mut s = x[(i, c)];
                for k in (i + 1)..n {
                    s -= self.l[(k, i)] * x[(k, c)];
                }
                x[(i, c)] = s / self.l[(i, i)];
            }
        }
        x
    }
}

/// Log-determinant of a symmetric positive definite matrix.
pub fn logdet_spd<T: Real>(a: &DenseMatrix<T>) -> Result<T> {
    Ok(Cholesky::factor(a)?.logdet())
}

/// Spectral radius of a symmetric matrix by power iteration.
///
/// `‖M v‖` converges to the spectral radius even when `±ρ` are both
/// eigenvalues, since any combination of their eigenvectors has that norm.
pub fn spectral_radius_symmetric<T: Real>(m: &DenseMatrix<T>, rel_tol: T, max_iter: usize) -> T {
    let n = m.rows;
    if n == 0 || m.max_abs() == T::zero() {
        return T::zero();
    }
    // Deterministic, generic start vector with no special symmetry.
    let mut v: Vec<T> = (0..n)
        .map(|i| T::one() + T::lit(0.5) * T::from_usize_lossy((i * 7919) % 101) / T::lit(101.0))
        .collect();
    let norm = |x: &[T]| x.iter().fold(T::zero(), |a, &b| a + b * b).sqrt();
    let nv = norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);

    let mut lambda = T::zero();
    for _ in 0..max_iter {
        let w = m.matvec(&v);
        let nw = norm(&w);
        if nw == T::zero() {
            return T::zero();
        }
        let converged = (nw - lambda).abs() <= rel_tol * nw;
        lambda = nw;
        v = w.into_iter().map(|x| x / nw).collect();
        if converged {
            break;
        }
    }
    lambda
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn symmetric_eigenvalues<T: Real>(a: &DenseMatrix<T>) -> Vec<T> {
    let n = a.rows;
    let mut m = a.clone();
    for _sweep in 0..100 {
        let mut off = T::zero();
        for i in 0..n {
            for j in 0..i {
                off += m[(i, j)] * m[(i, j)];
            }
        }
        if off.sqrt() <= T::epsilon() * m.max_abs() * T::lit(1e-2) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<T> = (0..n).map(|i| m[(i, i)]).collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    ev
}
