//! Dense small-matrix linear algebra for the controller stack.
//!
//! Everything here is sized for flight-control work: plants of a handful of
//! states, transition matrices, gain computations. The exact matrix
//! exponential goes through an eigendecomposition ([`expm_eigen`]); a
//! truncated-Taylor exponential with scaling and squaring ([`expm_series`])
//! serves both as the conventional-MPC transition matrix and as a
//! cross-validation oracle for the eigendecomposition path.

mod complex;
mod eig;
mod expm;

pub use complex::CMatrix;
pub use eig::{eig, eigenvalues, EigenDecomposition};
pub use expm::{expm_eigen, expm_series, expm_with_integral};

use thiserror::Error;

/// Reciprocal-condition estimate below this is treated as singular.
pub const RCOND_SINGULAR: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MatError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("matrix is singular to working precision (rcond < {RCOND_SINGULAR:e})")]
    Singular,
    #[error("matrix is numerically non-diagonalizable (eigenvector basis singular)")]
    NonDiagonalizable,
    #[error("QR iteration failed to converge")]
    ConvergenceFailure,
    #[error("imaginary residual {residual:e} after eigendecomposition exponential exceeds tolerance")]
    ImaginaryResidualTooLarge { residual: f64 },
}

/// Dense real matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix dimensions must be >= 1");
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        assert!(r >= 1);
        let c = rows[0].len();
        let mut m = Matrix::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, v) in row.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Matrix { rows, cols, data }
    }

    pub fn from_diag(d: &[f64]) -> Self {
        let mut m = Matrix::zeros(d.len(), d.len());
        for (i, v) in d.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    /// Column vector from a slice.
    pub fn col_vec(v: &[f64]) -> Self {
        Matrix::from_vec(v.len(), 1, v.to_vec())
    }

    /// Row vector from a slice.
    pub fn row_vec(v: &[f64]) -> Self {
        Matrix::from_vec(1, v.len(), v.to_vec())
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

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in matmul");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Induced infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)].abs()).sum())
            .fold(0.0, f64::max)
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        self.sub(other).max_abs()
    }

    /// LU factorization with partial pivoting. Returns packed LU and the
    /// row permutation, or `Singular` when a pivot falls below threshold.
    fn lu(&self) -> Result<(Matrix, Vec<usize>), MatError> {
        if !self.is_square() {
            return Err(MatError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        if !self.is_finite() {
            return Err(MatError::NonFinite);
        }
        let n = self.rows;
        let mut lu = self.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = self.norm_inf().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let mut p = k;
            let mut pmax = lu[(k, k)].abs();
            for i in (k + 1)..n {
                let v = lu[(i, k)].abs();
                if v > pmax {
                    pmax = v;
                    p = i;
                }
            }
            if pmax <= scale * 1e-14 {
                return Err(MatError::Singular);
            }
            if p != k {
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = t;
                }
                perm.swap(k, p);
            }
            for i in (k + 1)..n {
                let m = lu[(i, k)] / lu[(k, k)];
                lu[(i, k)] = m;
                for j in (k + 1)..n {
                    lu[(i, j)] -= m * lu[(k, j)];
                }
            }
        }
        Ok((lu, perm))
    }

    fn lu_solve_vec(lu: &Matrix, perm: &[usize], b: &[f64]) -> Vec<f64> {
        let n = lu.rows;
        let mut x: Vec<f64> = perm.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            for j in 0..i {
                x[i] -= lu[(i, j)] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                x[i] -= lu[(i, j)] * x[j];
            }
            x[i] /= lu[(i, i)];
        }
        x
    }

    /// Solve `self * x = b` for a single right-hand side.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, MatError> {
        let (lu, perm) = self.lu()?;
        Ok(Self::lu_solve_vec(&lu, &perm, b))
    }

    /// Reciprocal condition estimate `1 / (‖A‖∞ ‖A⁻¹‖∞)`.
    /// Returns 0 when the matrix does not factor.
    pub fn rcond(&self) -> f64 {
        match self.inverse() {
            Ok(inv) => {
                let d = self.norm_inf() * inv.norm_inf();
                if d > 0.0 {
                    1.0 / d
                } else {
                    0.0
                }
            }
            Err(_) => 0.0,
        }
    }
}

/// Matrix inverse via LU with partial pivoting.
///
/// Errors with `Singular` when a pivot is negligible or the reciprocal
/// condition estimate falls below [`RCOND_SINGULAR`].
pub fn inverse(a: &Matrix) -> Result<Matrix, MatError> {
    let (lu, perm) = a.lu()?;
    let n = a.rows;
    let mut inv = Matrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let col = Matrix::lu_solve_vec(&lu, &perm, &e);
        for i in 0..n {
            inv[(i, j)] = col[i];
        }
        e[j] = 0.0;
    }
    let d = a.norm_inf() * inv.norm_inf();
    if d > 0.0 && 1.0 / d < RCOND_SINGULAR {
        return Err(MatError::Singular);
    }
    Ok(inv)
}

impl Matrix {
    pub fn inverse(&self) -> Result<Matrix, MatError> {
        inverse(self)
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl std::fmt::Display for Matrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in 0..self.rows {
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{:+.6e}", self[(i, j)])?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_identity() {
        let i = Matrix::identity(3);
        assert_eq!(inverse(&i).unwrap(), i);
    }

    #[test]
    fn inverse_diagonal() {
        let a = Matrix::from_diag(&[2.0, 4.0]);
        let inv = inverse(&a).unwrap();
        assert!((inv[(0, 0)] - 0.5).abs() < 1e-15);
        assert!((inv[(1, 1)] - 0.25).abs() < 1e-15);
        assert!(inv[(0, 1)].abs() < 1e-15);
    }

    #[test]
    fn inverse_multiply_back() {
        // well-conditioned 3x3
        let a = Matrix::from_rows(&[&[4.0, 1.0, -2.0], &[0.5, 3.0, 1.0], &[-1.0, 0.2, 5.0]]);
        let inv = inverse(&a).unwrap();
        let prod = a.matmul(&inv);
        assert!(prod.max_abs_diff(&Matrix::identity(3)) < 1e-10);
    }

    #[test]
    fn inverse_singular_is_error() {
        let a = Matrix::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(matches!(inverse(&a), Err(MatError::Singular)));
    }

    #[test]
    fn solve_matches_inverse() {
        let a = Matrix::from_rows(&[&[2.0, 1.0], &[1.0, 3.0]]);
        let x = a.solve(&[5.0, 10.0]).unwrap();
        let back = a.mul_vec(&x);
        assert!((back[0] - 5.0).abs() < 1e-12);
        assert!((back[1] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn norms() {
        let a = Matrix::from_rows(&[&[1.0, -2.0], &[3.0, 0.5]]);
        assert_eq!(a.max_abs(), 3.0);
        assert_eq!(a.norm_inf(), 3.5);
    }
}
