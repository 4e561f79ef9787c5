//! Complex dense matrix support for the eigendecomposition path.

use num_complex::Complex64;

use super::{MatError, Matrix};

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1);
        CMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_real(a: &Matrix) -> Self {
        let mut m = CMatrix::zeros(a.rows(), a.cols());
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                m[(i, j)] = Complex64::new(a[(i, j)], 0.0);
            }
        }
        m
    }

    pub fn from_diag(d: &[Complex64]) -> Self {
        let mut m = CMatrix::zeros(d.len(), d.len());
        for (i, v) in d.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn matmul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// Real part projected into a real matrix.
    pub fn real(&self) -> Matrix {
        let mut m = Matrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(i, j)] = self[(i, j)].re;
            }
        }
        m
    }

    /// Largest absolute imaginary component.
    pub fn max_abs_imag(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.im.abs()))
    }

    /// Largest absolute real component.
    pub fn max_abs_real(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.re.abs()))
    }

    /// Induced infinity norm.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)].norm()).sum())
            .fold(0.0, f64::max)
    }

    fn lu(&self) -> Result<(CMatrix, Vec<usize>), MatError> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut lu = self.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = self.norm_inf().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let mut p = k;
            let mut pmax = lu[(k, k)].norm();
            for i in (k + 1)..n {
                let v = lu[(i, k)].norm();
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
                    let s = m * lu[(k, j)];
                    lu[(i, j)] -= s;
                }
            }
        }
        Ok((lu, perm))
    }

    fn lu_solve_vec(lu: &CMatrix, perm: &[usize], b: &[Complex64]) -> Vec<Complex64> {
        let n = lu.rows;
        let mut x: Vec<Complex64> = perm.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            for j in 0..i {
                let s = lu[(i, j)] * x[j];
                x[i] -= s;
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                let s = lu[(i, j)] * x[j];
                x[i] -= s;
            }
            x[i] /= lu[(i, i)];
        }
        x
    }

    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>, MatError> {
        let (lu, perm) = self.lu()?;
        Ok(Self::lu_solve_vec(&lu, &perm, b))
    }

    pub fn inverse(&self) -> Result<CMatrix, MatError> {
        let (lu, perm) = self.lu()?;
        let n = self.rows;
        let mut inv = CMatrix::zeros(n, n);
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            e[j] = Complex64::new(1.0, 0.0);
            let col = Self::lu_solve_vec(&lu, &perm, &e);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
            e[j] = Complex64::new(0.0, 0.0);
        }
        Ok(inv)
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}
