//! Small dense box-constrained QP solver (primal-dual interior point).
//!
//! Solves `min ½ uᵀHu + fᵀu` subject to `lo ≤ uᵢ ≤ hi`. The unconstrained
//! case reduces to a single linear solve. Sized for MPC horizons of a few
//! tens of variables, not a production solver.

use thiserror::Error;

use crate::matlib::Matrix;

#[derive(Debug, Error)]
pub enum QpError {
    #[error("H is not symmetric positive definite")]
    NotPositiveDefinite,
    #[error("interior point did not converge in {0} iterations")]
    MaxIterations(usize),
    #[error("inconsistent bounds: lo >= hi")]
    BadBounds,
}

const MAX_ITERS: usize = 50;
const KKT_TOL: f64 = 1e-9;
const COMP_TOL: f64 = 1e-10;
const FRACTION_TO_BOUNDARY: f64 = 0.995;
const CENTERING: f64 = 0.1;

/// Cholesky factorization; fails when H is not SPD.
fn cholesky(h: &Matrix) -> Result<Matrix, QpError> {
    let n = h.rows();
    if !h.is_square() {
        return Err(QpError::NotPositiveDefinite);
    }
    for i in 0..n {
        for j in 0..n {
            if (h[(i, j)] - h[(j, i)]).abs() > 1e-9 * h.norm_inf().max(1.0) {
                return Err(QpError::NotPositiveDefinite);
            }
        }
    }
    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = h[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            if i == j {
                if s <= 0.0 {
                    return Err(QpError::NotPositiveDefinite);
                }
                l[(i, i)] = s.sqrt();
            } else {
                l[(i, j)] = s / l[(j, j)];
            }
        }
    }
    Ok(l)
}

fn cholesky_solve(l: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = l.rows();
    let mut y = b.to_vec();
    for i in 0..n {
        for j in 0..i {
            y[i] -= l[(i, j)] * y[j];
        }
        y[i] /= l[(i, i)];
    }
    for i in (0..n).rev() {
        for j in (i + 1)..n {
            y[i] -= l[(j, i)] * y[j];
        }
        y[i] /= l[(i, i)];
    }
    y
}

/// Solve the QP. `bounds = None` is the unconstrained case.
pub fn solve_qp(h: &Matrix, f: &[f64], bounds: Option<(f64, f64)>) -> Result<Vec<f64>, QpError> {
    let n = f.len();
    assert_eq!(h.rows(), n);
    let l = cholesky(h)?;
    let neg_f: Vec<f64> = f.iter().map(|v| -v).collect();
    let u_free = cholesky_solve(&l, &neg_f);

    let (lo, hi) = match bounds {
        None => return Ok(u_free),
        Some(b) => b,
    };
    if lo >= hi {
        return Err(QpError::BadBounds);
    }
    if u_free.iter().all(|&v| v > lo && v < hi) {
        return Ok(u_free); // interior optimum; bounds inactive
    }

    // primal-dual interior point on the box constraints
    let margin = 0.01 * (hi - lo);
    let mut u: Vec<f64> = u_free
        .iter()
        .map(|&v| v.clamp(lo + margin, hi - margin))
        .collect();
    let mut z1 = vec![1.0; n];
    let mut z2 = vec![1.0; n];

    for _ in 0..MAX_ITERS {
        let s1: Vec<f64> = u.iter().map(|&v| v - lo).collect();
        let s2: Vec<f64> = u.iter().map(|&v| hi - v).collect();
        let hu = h.mul_vec(&u);
        let r_d: Vec<f64> = (0..n).map(|i| hu[i] + f[i] - z1[i] + z2[i]).collect();
        let gap: f64 = (0..n).map(|i| s1[i] * z1[i] + s2[i] * z2[i]).sum::<f64>() / (2 * n) as f64;
        let r_d_norm = r_d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if r_d_norm < KKT_TOL && gap < COMP_TOL {
            return Ok(u);
        }
        let mu = CENTERING * gap;
        // reduced Newton system (H + Z1/S1 + Z2/S2) Δu = −r_d + μ/s1 − z1 − μ/s2 + z2
        let mut h_aug = h.clone();
        let mut rhs = vec![0.0; n];
        for i in 0..n {
            h_aug[(i, i)] += z1[i] / s1[i] + z2[i] / s2[i];
            rhs[i] = -r_d[i] + mu / s1[i] - z1[i] - mu / s2[i] + z2[i];
        }
        let du = h_aug
            .solve(&rhs)
            .map_err(|_| QpError::NotPositiveDefinite)?;
        let dz1: Vec<f64> = (0..n)
            .map(|i| (mu - z1[i] * s1[i] - z1[i] * du[i]) / s1[i])
            .collect();
        let dz2: Vec<f64> = (0..n)
            .map(|i| (mu - z2[i] * s2[i] + z2[i] * du[i]) / s2[i])
            .collect();
        // fraction-to-boundary step
        let mut alpha: f64 = 1.0;
        for i in 0..n {
            if du[i] < 0.0 {
                alpha = alpha.min(-FRACTION_TO_BOUNDARY * s1[i] / du[i]);
            }
            if du[i] > 0.0 {
                alpha = alpha.min(FRACTION_TO_BOUNDARY * s2[i] / du[i]);
            }
            if dz1[i] < 0.0 {
                alpha = alpha.min(-FRACTION_TO_BOUNDARY * z1[i] / dz1[i]);
            }
            if dz2[i] < 0.0 {
                alpha = alpha.min(-FRACTION_TO_BOUNDARY * z2[i] / dz2[i]);
            }
        }
        for i in 0..n {
            u[i] += alpha * du[i];
            z1[i] = (z1[i] + alpha * dz1[i]).max(1e-16);
            z2[i] = (z2[i] + alpha * dz2[i]).max(1e-16);
        }
    }
    Err(QpError::MaxIterations(MAX_ITERS))
}
