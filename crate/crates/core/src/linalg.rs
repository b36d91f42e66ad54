//! Small dense row-major matrices and Gaussian elimination.

use std::ops::{Index, IndexMut};

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
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

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let n = rows.len();
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return invalid("ragged matrix rows");
        }
        Ok(Self { rows: n, cols, data: rows.into_iter().flatten().collect() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Leading `n x n` block.
    pub fn leading_block(&self, n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = self[(i, j)].clone();
            }
        }
        m
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out[(i, j)].clone() + a.clone() * other[(k, j)].clone();
                    out[(i, j)] = v;
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "dimension mismatch");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.clone() - b.clone()).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Solves `A X = B` by elimination with partial pivoting. `B` may hold several
/// right-hand sides as columns.
pub fn solve<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    let n = a.rows;
    if a.cols != n || b.rows != n {
        return invalid(format!("cannot solve {}x{} system with {} rhs rows", a.rows, a.cols, b.rows));
    }
    let m = b.cols;
    let mut a = a.clone();
    let mut x = b.clone();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                a[(i, col)].abs().partial_cmp(&a[(j, col)].abs()).unwrap_or(std::cmp::Ordering::Equal)
            })
            .expect("non-empty pivot range");
        if a[(pivot, col)].is_zero() {
            return Err(Error::Singular(format!("zero pivot in column {col}")));
        }
        if pivot != col {
            for j in 0..n {
                a.data.swap(pivot * n + j, col * n + j);
            }
            for j in 0..m {
                x.data.swap(pivot * m + j, col * m + j);
            }
        }
        let p = a[(col, col)].clone();
        for r in col + 1..n {
            let factor = a[(r, col)].clone() / p.clone();
            if factor.is_zero() {
                continue;
            }
            for j in col..n {
                let v = a[(r, j)].clone() - factor.clone() * a[(col, j)].clone();
                a[(r, j)] = v;
            }
            for j in 0..m {
                let v = x[(r, j)].clone() - factor.clone() * x[(col, j)].clone();
                x[(r, j)] = v;
            }
        }
    }
    for col in (0..n).rev() {
        for j in 0..m {
            let mut acc = x[(col, j)].clone();
            for k in col + 1..n {
                acc = acc - a[(col, k)].clone() * x[(k, j)].clone();
            }
            x[(col, j)] = acc / a[(col, col)].clone();
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn solves_with_row_swap() {
        // First pivot is zero, forcing a swap.
        let a: Matrix<f64> = Matrix::from_rows(vec![vec![0.0, 2.0], vec![3.0, 1.0]]).unwrap();
        let b = Matrix::from_rows(vec![vec![4.0], vec![5.0]]).unwrap();
        let x = solve(&a, &b).unwrap();
        assert!((x[(0, 0)] - 1.0).abs() < 1e-15);
        assert!((x[(1, 0)] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn exact_inverse() {
        let a = Matrix::from_rows(vec![vec![q(2, 1), q(1, 1)], vec![q(1, 1), q(1, 1)]]).unwrap();
        let inv = solve(&a, &Matrix::identity(2)).unwrap();
        assert_eq!(inv, Matrix::from_rows(vec![vec![q(1, 1), q(-1, 1)], vec![q(-1, 1), q(2, 1)]]).unwrap());
        assert_eq!(a.mul(&inv), Matrix::identity(2));
    }

    #[test]
    fn singular_is_reported() {
        let a: Matrix<f64> = Matrix::from_rows(vec![vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        let b = Matrix::from_rows(vec![vec![1.0], vec![1.0]]).unwrap();
        assert!(matches!(solve(&a, &b), Err(Error::Singular(_))));
    }
}
