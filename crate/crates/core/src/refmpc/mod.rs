//! Conventional multi-point MPC baseline.
//!
//! Lifted prediction over `n_pred` points with a truncated-Taylor transition
//! matrix per step and a box-constrained QP solve. Exists for the
//! computational-load comparison against single-point AMPC; it applies the
//! same Q/R semantics at each prediction point with step spacing
//! `dt_step = δt / n_pred`.

mod qp;

pub use qp::{solve_qp, QpError};

use serde::{Deserialize, Serialize};

use crate::matlib::{expm_series, expm_with_integral, Matrix};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct RefMpcConfig {
    pub n_pred: usize,
    pub dt_step_s: f64,
    pub q_weight: f64,
    pub r_weight: f64,
    pub taylor_order: usize,
    /// Optional symmetric deflection limits applied by the QP.
    pub bounds: Option<(f64, f64)>,
}

impl Default for RefMpcConfig {
    fn default() -> Self {
        RefMpcConfig {
            n_pred: 10,
            dt_step_s: 0.05,
            q_weight: 0.99,
            r_weight: 0.001,
            taylor_order: 5,
            bounds: Some((-30.0, 30.0)),
        }
    }
}

impl RefMpcConfig {
    /// Same horizon as an AMPC design, split across `n_pred` points.
    pub fn matched_to_horizon(n_pred: usize, dt_pred_s: f64) -> Self {
        RefMpcConfig {
            n_pred,
            dt_step_s: dt_pred_s / n_pred as f64,
            ..RefMpcConfig::default()
        }
    }
}

/// Stacked free and forced response over the prediction points.
pub struct PredictionMatrices {
    /// n_pred × n: row i is C·Φ^{i+1}.
    pub f_stack: Matrix,
    /// n_pred × n_pred lower-triangular block Toeplitz forced response.
    pub g_stack: Matrix,
}

/// Lifted prediction matrices with a Taylor-series transition per step.
pub fn build_prediction_matrices(
    a: &Matrix,
    b_m: &Matrix,
    c: &Matrix,
    cfg: &RefMpcConfig,
) -> PredictionMatrices {
    assert!(cfg.n_pred >= 1 && cfg.taylor_order >= 1);
    let n = a.rows();
    let phi = expm_series(a, cfg.dt_step_s, cfg.taylor_order);
    // one-step forced response (zero-order hold over dt_step)
    let gamma = if a.rcond() > 1e-8 {
        a.inverse()
            .expect("rcond checked")
            .matmul(&phi.sub(&Matrix::identity(n)))
            .matmul(b_m)
    } else {
        let (_, integral) = expm_with_integral(a, cfg.dt_step_s, cfg.taylor_order.max(8));
        integral.matmul(b_m)
    };

    // powers of Φ up to n_pred
    let mut powers = Vec::with_capacity(cfg.n_pred + 1);
    powers.push(Matrix::identity(n));
    for i in 0..cfg.n_pred {
        let next = powers[i].matmul(&phi);
        powers.push(next);
    }

    let mut f_stack = Matrix::zeros(cfg.n_pred, n);
    for i in 0..cfg.n_pred {
        let row = c.matmul(&powers[i + 1]);
        for j in 0..n {
            f_stack[(i, j)] = row[(0, j)];
        }
    }
    let mut g_stack = Matrix::zeros(cfg.n_pred, cfg.n_pred);
    for i in 0..cfg.n_pred {
        for j in 0..=i {
            let blk = c.matmul(&powers[i - j]).matmul(&gamma);
            g_stack[(i, j)] = blk[(0, 0)];
        }
    }
    PredictionMatrices { f_stack, g_stack }
}

/// One control update: predict, form the QP, solve, apply the first move.
/// `y_r_seq` holds the reference at each prediction point.
pub fn refmpc_control(
    a: &Matrix,
    b_m: &Matrix,
    c: &Matrix,
    cfg: &RefMpcConfig,
    x: &[f64],
    y_r_seq: &[f64],
) -> Result<f64, QpError> {
    assert_eq!(y_r_seq.len(), cfg.n_pred);
    let pm = build_prediction_matrices(a, b_m, c, cfg);
    let free = pm.f_stack.mul_vec(x);
    let err: Vec<f64> = y_r_seq.iter().zip(&free).map(|(r, fx)| r - fx).collect();
    // H = ḠᵀQḠ + R·I, f = −ḠᵀQ·err
    let gt = pm.g_stack.transpose();
    let mut h = gt.matmul(&pm.g_stack).scale(cfg.q_weight);
    for i in 0..cfg.n_pred {
        h[(i, i)] += cfg.r_weight;
    }
    let gte = gt.mul_vec(&err);
    let f: Vec<f64> = gte.iter().map(|v| -cfg.q_weight * v).collect();
    let u = solve_qp(&h, &f, cfg.bounds)?;
    Ok(u[0])
}
