//! Metrics and studies on top of the simulation engine: tracking-error norm,
//! Monte Carlo campaign, time-delay-margin search, LTI gain/phase margins,
//! and the controller timing benchmark.

mod margins;
mod montecarlo;
mod tdm;
mod timing;

pub use margins::{loop_transfer, lti_margins, MarginReport, MarginSweep};
pub use montecarlo::{monte_carlo, McRun, McStats, McSummary, MonteCarloSpec};
pub use tdm::{delay_is_unstable, time_delay_margin, TdmConfig, TdmResult};
pub use timing::{timing_benchmark, TimingRow};

use thiserror::Error;

use crate::simkit::{RunLog, SimError};
use crate::vehicle::VehicleError;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("closed loop unstable at zero delay")]
    UnstableAtZeroDelay,
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Vehicle(#[from] VehicleError),
}

/// Tracking error 2-norm `sqrt(∫ |y_r − α|² dt)` by trapezoidal quadrature
/// over the run log.
pub fn tracking_error_norm(log: &RunLog) -> f64 {
    if log.rows.len() < 2 {
        return 0.0;
    }
    let mut acc = 0.0;
    for w in log.rows.windows(2) {
        let e0 = w[0].y_r_deg - w[0].alpha_deg;
        let e1 = w[1].y_r_deg - w[1].alpha_deg;
        acc += 0.5 * (e0 * e0 + e1 * e1) * (w[1].t - w[0].t);
    }
    acc.sqrt()
}

/// Mean |y_r − α| over the final `window_s` seconds of the log.
pub fn steady_state_error(log: &RunLog, window_s: f64) -> f64 {
    let Some(last) = log.rows.last() else {
        return 0.0;
    };
    let t0 = last.t - window_s;
    let vals: Vec<f64> = log
        .rows
        .iter()
        .filter(|r| r.t >= t0)
        .map(|r| (r.y_r_deg - r.alpha_deg).abs())
        .collect();
    if vals.is_empty() {
        0.0
    } else {
        vals.iter().sum::<f64>() / vals.len() as f64
    }
}

/// Half peak-to-peak amplitude of α over a time window.
pub fn oscillation_amplitude(log: &RunLog, t0: f64, t1: f64) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for r in log.rows.iter().filter(|r| r.t >= t0 && r.t <= t1) {
        lo = lo.min(r.alpha_deg);
        hi = hi.max(r.alpha_deg);
    }
    if hi < lo {
        0.0
    } else {
        0.5 * (hi - lo)
    }
}
