//! Matrix exponentials: exact (eigendecomposition) and truncated Taylor
//! series with scaling and squaring.

use num_complex::Complex64;

use super::{eig, CMatrix, MatError, Matrix};

/// Absolute floor on the acceptable imaginary residual after projecting the
/// reconstructed exponential back to the reals.
const IMAG_RESIDUAL_TOL: f64 = 1e-9;

/// Exact matrix exponential `e^{A·dt}` through the eigendecomposition
/// `S diag(e^{λᵢ dt}) S⁻¹`.
///
/// There is no truncation error in this route; accuracy is limited only by
/// the conditioning of the eigenvector basis. Complex-conjugate eigenvalue
/// pairs (the generic case for stable short-period dynamics) are handled in
/// complex arithmetic and the result is projected to the reals; the
/// imaginary residual is checked against `1e-9` before projection.
pub fn expm_eigen(a: &Matrix, dt: f64) -> Result<Matrix, MatError> {
    assert!(dt.is_finite());
    let d = eig(a)?;
    let exp_vals: Vec<Complex64> = d.values.iter().map(|l| (l * dt).exp()).collect();
    let rec = d
        .vectors
        .matmul(&CMatrix::from_diag(&exp_vals))
        .matmul(&d.inverse_vectors);
    let residual = rec.max_abs_imag();
    if residual > IMAG_RESIDUAL_TOL * rec.max_abs_real().max(1.0) {
        return Err(MatError::ImaginaryResidualTooLarge { residual });
    }
    Ok(rec.real())
}

/// Truncated Taylor-series matrix exponential of order `order`, with scaling
/// and squaring so the truncation error stays controlled for large `‖A·dt‖`.
///
/// At low order this is the conventional-MPC transition matrix; at high order
/// it serves as an independent oracle for [`expm_eigen`].
pub fn expm_series(a: &Matrix, dt: f64, order: usize) -> Matrix {
    assert!(a.is_square(), "expm_series requires a square matrix");
    assert!(order >= 1, "series order must be >= 1");
    assert!(dt.is_finite());
    let b = a.scale(dt);
    let (scaled, squarings) = scale_down(&b);
    let mut sum = Matrix::identity(a.rows());
    let mut term = Matrix::identity(a.rows());
    for k in 1..=order {
        term = term.matmul(&scaled).scale(1.0 / k as f64);
        sum = sum.add(&term);
    }
    for _ in 0..squarings {
        sum = sum.matmul(&sum);
    }
    sum
}

/// `e^{A·dt}` together with its integral `∫₀^dt e^{Aτ} dτ`, via the Taylor
/// series of the augmented matrix `[[A, I], [0, 0]]`. Valid for singular `A`,
/// where the `A⁻¹(e^{A dt} − I)` form breaks down.
pub fn expm_with_integral(a: &Matrix, dt: f64, order: usize) -> (Matrix, Matrix) {
    let n = a.rows();
    assert!(a.is_square());
    let mut aug = Matrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            aug[(i, j)] = a[(i, j)];
        }
        aug[(i, n + i)] = 1.0;
    }
    let e = expm_series(&aug, dt, order);
    let mut phi = Matrix::zeros(n, n);
    let mut integral = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            phi[(i, j)] = e[(i, j)];
            integral[(i, j)] = e[(i, n + j)];
        }
    }
    (phi, integral)
}

fn scale_down(b: &Matrix) -> (Matrix, u32) {
    let norm = b.norm_inf();
    if norm <= 0.5 {
        (b.clone(), 0)
    } else {
        let s = (norm / 0.5).log2().ceil() as u32;
        (b.scale(0.5f64.powi(s as i32)), s)
    }
}
