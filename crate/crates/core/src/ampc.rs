//! Single-prediction-point algebraic MPC.
//!
//! Per control update, from the current linearization (A, B_m, C):
//!
//! ```text
//! Φ = e^{A δt}                    exact transition over the horizon
//! F = C Φ                        free response
//! G = C A⁻¹ (Φ − I) B_m          forced response
//! K = (Gᵀ Q G + R)⁻¹ Gᵀ Q        optimal gain
//! u_opt = K (y_r − F x)
//! ```
//!
//! The closed-loop matrix `A_m = A − B_m K F` is exposed for the adaptive
//! augmentation. Gains are recomputed at every update for time-varying
//! plants.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matlib::{eigenvalues, expm_eigen, expm_series, expm_with_integral, MatError, Matrix};

/// Taylor order used when the eigendecomposition route is unavailable
/// (defective transition matrix) or A is too ill-conditioned for the
/// `A⁻¹(Φ − I)` forced-response form. High enough that, with scaling and
/// squaring, the result is still accurate to machine precision.
const FALLBACK_SERIES_ORDER: usize = 16;

const RCOND_FALLBACK: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum AmpcError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(transparent)]
    Mat(#[from] MatError),
}

/// Design weights and prediction horizon (Q and R are scalars for the SISO
/// plant; the update keeps matrix form internally).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct AmpcConfig {
    pub q_weight: f64,
    pub r_weight: f64,
    pub dt_pred_s: f64,
}

impl Default for AmpcConfig {
    fn default() -> Self {
        AmpcConfig {
            q_weight: 0.99,
            r_weight: 0.001,
            dt_pred_s: 0.5,
        }
    }
}

impl AmpcConfig {
    pub fn validate(&self) -> Result<(), AmpcError> {
        if !(self.q_weight >= 0.0 && self.r_weight > 0.0 && self.dt_pred_s > 0.0) {
            return Err(AmpcError::Dimension(
                "require Q >= 0, R > 0, dt_pred > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Products of one AMPC update.
#[derive(Debug, Clone)]
pub struct AmpcState {
    pub phi: Matrix,
    /// Free-response row F = CΦ (1×n).
    pub f_row: Matrix,
    /// Forced response (scalar for SISO).
    pub g: f64,
    /// Optimal gain (scalar for SISO).
    pub k: f64,
    /// Desired closed-loop dynamics A_m = A − B_m K F.
    pub a_m: Matrix,
    /// Largest real part among the eigenvalues of A_m.
    pub am_max_re: f64,
    /// False when A_m is not Hurwitz with the given weights. Warning-level:
    /// the controller still runs, the analysis layer records the violation.
    pub hurwitz: bool,
}

/// One AMPC update from the latest linearization.
pub fn ampc_update(
    a: &Matrix,
    b_m: &Matrix,
    c: &Matrix,
    cfg: &AmpcConfig,
) -> Result<AmpcState, AmpcError> {
    cfg.validate()?;
    let n = a.rows();
    if !a.is_square() {
        return Err(AmpcError::Dimension("A must be square".into()));
    }
    if b_m.rows() != n || b_m.cols() != 1 || c.rows() != 1 || c.cols() != n {
        return Err(AmpcError::Dimension(
            "expected B_m n×1 and C 1×n (SISO plant)".into(),
        ));
    }

    // Exact transition matrix; defective A falls back to the high-order
    // series, which is equally accurate after scaling and squaring.
    let phi = match expm_eigen(a, cfg.dt_pred_s) {
        Ok(m) => m,
        Err(MatError::NonDiagonalizable)
        | Err(MatError::ImaginaryResidualTooLarge { .. })
        | Err(MatError::ConvergenceFailure) => {
            expm_series(a, cfg.dt_pred_s, FALLBACK_SERIES_ORDER)
        }
        Err(e) => return Err(e.into()),
    };

    let f_row = c.matmul(&phi);

    // G = C A⁻¹ (Φ − I) B_m, with a quadrature-free integral fallback
    // G = C (∫Φ) B_m when A is near-singular (the default trajectory crosses
    // det(A) = 0 where the static stability changes sign).
    let g_mat = if a.rcond() > RCOND_FALLBACK {
        let a_inv = a.inverse()?;
        c.matmul(&a_inv)
            .matmul(&phi.sub(&Matrix::identity(n)))
            .matmul(b_m)
    } else {
        let (_, integral) = expm_with_integral(a, cfg.dt_pred_s, FALLBACK_SERIES_ORDER);
        c.matmul(&integral).matmul(b_m)
    };
    let g = g_mat[(0, 0)];

    // K = (GᵀQG + R)⁻¹ GᵀQ in matrix form (1×1 blocks for SISO).
    let q = Matrix::from_vec(1, 1, vec![cfg.q_weight]);
    let r = Matrix::from_vec(1, 1, vec![cfg.r_weight]);
    let gtqg_r = g_mat.transpose().matmul(&q).matmul(&g_mat).add(&r);
    let k_mat = gtqg_r
        .inverse()
        .map_err(|_| AmpcError::Dimension("GᵀQG + R not invertible".into()))?
        .matmul(&g_mat.transpose())
        .matmul(&q);
    let k = k_mat[(0, 0)];

    let a_m = a.sub(&b_m.matmul(&k_mat).matmul(&f_row));
    let am_max_re = eigenvalues(&a_m)?
        .iter()
        .map(|l| l.re)
        .fold(f64::NEG_INFINITY, f64::max);

    Ok(AmpcState {
        phi,
        f_row,
        g,
        k,
        a_m,
        am_max_re,
        hurwitz: am_max_re < 0.0,
    })
}

/// u_opt = K (y_r − F x).
pub fn ampc_control(state: &AmpcState, x: &[f64], y_r: f64) -> f64 {
    let fx: f64 = state
        .f_row
        .data()
        .iter()
        .zip(x)
        .map(|(f, xi)| f * xi)
        .sum();
    state.k * (y_r - fx)
}
