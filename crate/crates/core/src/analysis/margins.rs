//! Gain and phase margins of the frozen (LTI) AMPC loop.
//!
//! The loop is broken at the plant input: L(s) = K·F·(sI − A)⁻¹·B_m. A
//! log-spaced frequency sweep locates the crossovers; margins are infinite by
//! convention when the corresponding crossover does not exist in the sweep.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ampc::AmpcState;
use crate::matlib::{CMatrix, Matrix};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct MarginSweep {
    pub w_min_rad_s: f64,
    pub w_max_rad_s: f64,
    pub points: usize,
}

impl Default for MarginSweep {
    fn default() -> Self {
        MarginSweep {
            w_min_rad_s: 1e-3,
            w_max_rad_s: 1e3,
            points: 2000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarginReport {
    /// Phase margin in degrees; infinite when |L| never crosses unity.
    pub phase_margin_deg: f64,
    /// Gain margin as a ratio (> 1 means gain can increase); infinite when
    /// the phase never crosses −180° with sub-unity gain.
    pub gain_margin: f64,
    /// Unity-gain crossover frequencies found in the sweep.
    pub gain_crossovers_rad_s: Vec<f64>,
    /// −180° crossover frequencies found in the sweep.
    pub phase_crossovers_rad_s: Vec<f64>,
}

/// Loop transfer L(jω) = K·F·(jωI − A)⁻¹·B_m.
pub fn loop_transfer(a: &Matrix, b_m: &Matrix, state: &AmpcState, w: f64) -> Complex64 {
    let n = a.rows();
    let mut m = CMatrix::from_real(&a.scale(-1.0));
    for i in 0..n {
        m[(i, i)] += Complex64::new(0.0, w);
    }
    let b: Vec<Complex64> = (0..n).map(|i| Complex64::new(b_m[(i, 0)], 0.0)).collect();
    let v = m
        .solve(&b)
        .expect("jωI − A is nonsingular on the imaginary axis");
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, vi) in v.iter().enumerate() {
        acc += Complex64::new(state.f_row[(0, i)], 0.0) * vi;
    }
    acc * state.k
}

/// Margins by frequency sweep of the broken-at-plant-input loop.
pub fn lti_margins(
    a: &Matrix,
    b_m: &Matrix,
    state: &AmpcState,
    sweep: &MarginSweep,
) -> MarginReport {
    let n = sweep.points.max(8);
    let lw0 = sweep.w_min_rad_s.ln();
    let lw1 = sweep.w_max_rad_s.ln();
    let ws: Vec<f64> = (0..n)
        .map(|i| (lw0 + (lw1 - lw0) * i as f64 / (n - 1) as f64).exp())
        .collect();
    let ls: Vec<Complex64> = ws.iter().map(|&w| loop_transfer(a, b_m, state, w)).collect();
    let mags: Vec<f64> = ls.iter().map(|l| l.norm()).collect();
    // unwrapped phase in degrees
    let mut phases: Vec<f64> = Vec::with_capacity(n);
    let mut prev = ls[0].arg();
    let mut offset = 0.0;
    for l in &ls {
        let mut p = l.arg();
        let mut d = p - prev;
        while d > std::f64::consts::PI {
            offset -= 2.0 * std::f64::consts::PI;
            d -= 2.0 * std::f64::consts::PI;
        }
        while d < -std::f64::consts::PI {
            offset += 2.0 * std::f64::consts::PI;
            d += 2.0 * std::f64::consts::PI;
        }
        prev = p;
        p += offset;
        phases.push(p.to_degrees());
    }

    // gain crossovers: |L| = 1
    let mut pm = f64::INFINITY;
    let mut gain_crossovers = Vec::new();
    for i in 0..(n - 1) {
        let (m0, m1) = (mags[i], mags[i + 1]);
        if (m0 - 1.0) * (m1 - 1.0) < 0.0 {
            let f = (1.0 - m0) / (m1 - m0);
            let w = ws[i] * (ws[i + 1] / ws[i]).powf(f);
            gain_crossovers.push(w);
            let phase = phases[i] + f * (phases[i + 1] - phases[i]);
            // distance above −180° modulo 360, mapped to (−180, 180]
            let mut margin = (phase + 180.0) % 360.0;
            if margin > 180.0 {
                margin -= 360.0;
            }
            if margin <= -180.0 {
                margin += 360.0;
            }
            if margin.abs() < pm.abs() || pm.is_infinite() {
                pm = margin;
            }
        }
    }

    // phase crossovers: unwrapped phase hits −180° + k·360°
    let mut gm = f64::INFINITY;
    let mut phase_crossovers = Vec::new();
    let pmin = phases.iter().cloned().fold(f64::INFINITY, f64::min);
    let pmax = phases.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let k_lo = ((pmin + 180.0) / 360.0).floor() as i64;
    let k_hi = ((pmax + 180.0) / 360.0).ceil() as i64;
    for k in k_lo..=k_hi {
        let target = -180.0 + 360.0 * k as f64;
        for i in 0..(n - 1) {
            if (phases[i] - target) * (phases[i + 1] - target) < 0.0 {
                let f = (target - phases[i]) / (phases[i + 1] - phases[i]);
                let w = ws[i] * (ws[i + 1] / ws[i]).powf(f);
                phase_crossovers.push(w);
                let mag = mags[i] + f * (mags[i + 1] - mags[i]);
                if mag < 1.0 && mag > 0.0 {
                    gm = gm.min(1.0 / mag);
                }
            }
        }
    }
    phase_crossovers.sort_by(|a, b| a.partial_cmp(b).unwrap());

    MarginReport {
        phase_margin_deg: pm.abs(),
        gain_margin: gm,
        gain_crossovers_rad_s: gain_crossovers,
        phase_crossovers_rad_s: phase_crossovers,
    }
}
