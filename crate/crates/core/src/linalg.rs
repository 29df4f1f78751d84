//! Small dense matrices and LU factorization with partial pivoting.
//!
//! Networks handled here have at most a few hundred nodes, and the per-node
//! coupling systems are tiny, so a row-major `Vec` is all the storage needed.

use std::ops::{Index, IndexMut};

use num_complex::Complex;
use num_traits::{NumAssign, Zero};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Matrix entry type: a real scalar or a complex number over one.
pub trait Entry: Copy + NumAssign + std::fmt::Debug + Send + Sync {
    type Real: Scalar;

    /// Modulus used for pivot selection and singularity checks.
    fn modulus(self) -> Self::Real;
}

impl<T: Scalar> Entry for T {
    type Real = T;

    fn modulus(self) -> T {
        self.abs()
    }
}

impl<T: Scalar> Entry for Complex<T> {
    type Real = T;

    fn modulus(self) -> T {
        self.norm()
    }
}

/// Relative pivot threshold below which a factorization is reported singular.
pub const SINGULAR_PIVOT_RATIO: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: Entry> DenseMatrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![F::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = F::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_diagonal(diag: &[F]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
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

    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn mul_vec(&self, x: &[F]) -> Vec<F> {
        assert_eq!(x.len(), self.cols, "dimension mismatch in mul_vec");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(F::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    pub fn mul_mat(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch in mul_mat");
        Self::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).fold(F::zero(), |acc, k| acc + self[(i, k)] * other[(k, j)])
        })
    }

    /// Largest entry modulus.
    pub fn max_modulus(&self) -> F::Real {
        self.data.iter().fold(F::Real::zero(), |acc, v| {
            num_traits::Float::max(acc, v.modulus())
        })
    }

    /// Extracts the submatrix with the given row and column index sets.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])])
    }

    pub fn lu(&self) -> Result<Lu<F>> {
        Lu::factor(self.clone())
    }
}

impl<F> Index<(usize, usize)> for DenseMatrix<F> {
    type Output = F;

    fn index(&self, (i, j): (usize, usize)) -> &F {
        &self.data[i * self.cols + j]
    }
}

impl<F> IndexMut<(usize, usize)> for DenseMatrix<F> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut F {
        &mut self.data[i * self.cols + j]
    }
}

/// `P A = L U` with unit lower-triangular `L` stored below the diagonal.
#[derive(Debug, Clone)]
pub struct Lu<F> {
    factors: DenseMatrix<F>,
    perm: Vec<usize>,
    swaps: usize,
}

impl<F: Entry> Lu<F> {
    /// Factors `a`, failing if any pivot falls below
    /// [`SINGULAR_PIVOT_RATIO`] times the largest entry of `a`.
    pub fn factor(mut a: DenseMatrix<F>) -> Result<Self> {
        assert!(a.is_square(), "LU needs a square matrix");
        let n = a.rows;
        let threshold = a.max_modulus() * F::Real::lit(SINGULAR_PIVOT_RATIO);
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0;

        for k in 0..n {
            let (p, pivot_mod) = (k..n).map(|i| (i, a[(i, k)].modulus())).fold(
                (k, F::Real::lit(-1.0)),
                |best, cur| {
                    if cur.1 > best.1 {
                        cur
                    } else {
                        best
                    }
                },
            );
            if !(pivot_mod > threshold) {
                return Err(Error::SingularMatrix {
                    column: k,
                    pivot: pivot_mod.to_f64_lossy(),
                    threshold: threshold.to_f64_lossy(),
                });
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                swaps += 1;
            }
            let pivot = a[(k, k)];
            for i in (k + 1)..n {
                let factor = a[(i, k)] / pivot;
                a[(i, k)] = factor;
                if factor.is_zero() {
                    continue;
                }
                for j in (k + 1)..n {
                    let upd = factor * a[(k, j)];
                    a[(i, j)] -= upd;
                }
            }
        }

        Ok(Self {
            factors: a,
            perm,
            swaps,
        })
    }

    pub fn dim(&self) -> usize {
        self.factors.rows
    }

    pub fn solve(&self, b: &[F]) -> Vec<F> {
        let n = self.dim();
        assert_eq!(b.len(), n, "dimension mismatch in LU solve");
        let mut x: Vec<F> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let l = self.factors[(i, j)];
                let xj = x[j];
                x[i] -= l * xj;
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                let u = self.factors[(i, j)];
                let xj = x[j];
                x[i] -= u * xj;
            }
            x[i] /= self.factors[(i, i)];
        }
        x
    }

    pub fn determinant(&self) -> F {
        let prod = (0..self.dim()).fold(F::one(), |acc, i| acc * self.factors[(i, i)]);
        if self.swaps.is_multiple_of(2) {
            prod
        } else {
            F::zero() - prod
        }
    }

    pub fn inverse(&self) -> DenseMatrix<F> {
        let n = self.dim();
        let mut inv = DenseMatrix::zeros(n, n);
        let mut e = vec![F::zero(); n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = F::zero());
            e[j] = F::one();
            let col = self.solve(&e);
            for (i, v) in col.into_iter().enumerate() {
                inv[(i, j)] = v;
            }
        }
        inv
    }
}
