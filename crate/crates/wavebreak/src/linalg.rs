//! Minimal dense linear algebra for small symmetric systems (the covariance
//! matrices here are at most a handful of rows).

use crate::error::{Error, Result};
use crate::scalar::{real, Real};

/// Dense symmetric matrix, row-major full storage.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMat<T> {
    pub dim: usize,
    pub data: Vec<T>,
}

impl<T: Real> SymMat<T> {
    pub fn from_rows(dim: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), dim * dim);
        Self { dim, data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![T::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = T::one();
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.dim + j] = v;
    }

    pub fn is_symmetric(&self, tol: T) -> bool {
        for i in 0..self.dim {
            for j in 0..i {
                if (self.get(i, j) - self.get(j, i)).abs() > tol {
                    return false;
                }
            }
        }
        true
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a - b)
                .collect(),
        }
    }

    /// Lower Cholesky factor. Fails if the matrix is not positive definite.
    pub fn cholesky(&self) -> Result<Cholesky<T>> {
        let n = self.dim;
        let mut l = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut sum = self.get(i, j);
                for k in 0..j {
                    sum -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if sum <= T::zero() || !sum.is_finite() {
                        return Err(Error::NotPositiveDefinite(format!(
                            "pivot {sum} at row {i}"
                        )));
                    }
                    l[i * n + i] = sum.sqrt();
                } else {
                    l[i * n + j] = sum / l[j * n + j];
                }
            }
        }
        Ok(Cholesky { dim: n, l })
    }

    /// Eigenvalues by cyclic Jacobi rotations (symmetric input assumed).
    pub fn eigenvalues(&self) -> Vec<T> {
        let n = self.dim;
        let mut a = self.data.clone();
        let tol = T::epsilon() * real::<T>(16.0) * self.frobenius_norm().max(T::one());
        for _sweep in 0..64 {
            let mut off = T::zero();
            for p in 0..n {
                for q in (p + 1)..n {
                    off += a[p * n + q].abs();
                }
            }
            if off < tol {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[p * n + q];
                    if apq.abs() <= tol / real::<T>((n * n) as f64) {
                        continue;
                    }
                    let app = a[p * n + p];
                    let aqq = a[q * n + q];
                    let theta = (aqq - app) / (real::<T>(2.0) * apq);
                    let t = {
                        let sign = if theta >= T::zero() {
                            T::one()
                        } else {
                            -T::one()
                        };
                        sign / (theta.abs() + (theta * theta + T::one()).sqrt())
                    };
                    let c = (t * t + T::one()).sqrt().recip();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = c * akp - s * akq;
                        a[k * n + q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p * n + k];
                        let aqk = a[q * n + k];
                        a[p * n + k] = c * apk - s * aqk;
                        a[q * n + k] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut eigs: Vec<T> = (0..n).map(|i| a[i * n + i]).collect();
        eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
        eigs
    }

    /// 2-norm condition number estimate from the eigenvalues.
    pub fn condition_number(&self) -> T {
        let eigs = self.eigenvalues();
        let min = eigs.first().copied().unwrap_or(T::zero()).abs();
        let max = eigs.last().copied().unwrap_or(T::zero()).abs();
        if min == T::zero() {
            T::infinity()
        } else {
            max / min
        }
    }
}

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    dim: usize,
    l: Vec<T>,
}

impl<T: Real> Cholesky<T> {
    /// Solves A x = b.
    #[allow(clippy::needless_range_loop)]
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.dim;
        assert_eq!(b.len(), n);
        let mut y = vec![T::zero(); n];
        for i in 0..n {
            let mut sum = b[i];
            for k in 0..i {
                sum -= self.l[i * n + k] * y[k];
            }
            y[i] = sum / self.l[i * n + i];
        }
        let mut x = vec![T::zero(); n];
        for i in (0..n).rev() {
            let mut sum = y[i];
            for k in (i + 1)..n {
                sum -= self.l[k * n + i] * x[k];
            }
            x[i] = sum / self.l[i * n + i];
        }
        x
    }

    /// Quadratic form x' A^{-1} x.
    #[allow(clippy::needless_range_loop)]
    pub fn inv_quad_form(&self, x: &[T]) -> T {
        let n = self.dim;
        let mut y = vec![T::zero(); n];
        for i in 0..n {
            let mut sum = x[i];
            for k in 0..i {
                sum -= self.l[i * n + k] * y[k];
            }
            y[i] = sum / self.l[i * n + i];
        }
        y.iter().map(|&v| v * v).sum()
    }
}

/// Inverse of a 2x2 matrix given as rows.
pub fn mat2_inv<T: Real>(m: [[T; 2]; 2]) -> Result<[[T; 2]; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det.abs() < T::epsilon() * real::<T>(64.0) || !det.is_finite() {
        return Err(Error::SingularDesign(format!("2x2 determinant {det}")));
    }
    let inv_det = det.recip();
    Ok([
        [m[1][1] * inv_det, -m[0][1] * inv_det],
        [-m[1][0] * inv_det, m[0][0] * inv_det],
    ])
}

/// Eigenvalues of a symmetric 2x2 matrix, ascending.
pub fn sym2_eigenvalues<T: Real>(m: [[T; 2]; 2]) -> (T, T) {
    let half = real::<T>(0.5);
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = (tr * tr * half * half - det).max(T::zero()).sqrt();
    (tr * half - disc, tr * half + disc)
}
