//! Time-delay margin by bisection.
//!
//! The loop is frozen at an operating point (LTI), regulated at a constant
//! reference, and a pure loop delay is increased until the closed loop shows
//! signs of instability: either the divergence flag trips or the output error
//! envelope grows (peak over the last quarter of the run exceeding the
//! second-quarter peak by the growth threshold).

use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::simkit::{run, ControllerKind, RunLog, Scenario, SimConfigs};
use crate::vehicle::{LtvPlant, ReferenceProfile};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct TdmConfig {
    /// Length of each regulation run.
    pub duration_s: f64,
    /// Largest delay searched; a loop still stable here reports the cap.
    pub cap_s: f64,
    /// Bisection resolution.
    pub resolution_s: f64,
    /// Envelope growth ratio declaring instability.
    pub growth_threshold: f64,
    /// Regulation level (the output starts at zero, so this sets the size of
    /// the excitation transient).
    pub regulation_deg: f64,
    pub control_rate_hz: f64,
}

impl Default for TdmConfig {
    fn default() -> Self {
        TdmConfig {
            duration_s: 40.0,
            cap_s: 2.0,
            resolution_s: 0.001,
            growth_threshold: 1.5,
            regulation_deg: 2.0,
            control_rate_hz: 200.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TdmResult {
    pub margin_s: f64,
    /// True when the loop was still stable at the search cap.
    pub saturated: bool,
}

fn is_unstable(log: &RunLog, cfg: &TdmConfig) -> bool {
    if log.diverged() {
        return true;
    }
    let n = log.rows.len();
    if n < 16 {
        return true;
    }
    let peak = |lo: usize, hi: usize| {
        log.rows[lo..hi]
            .iter()
            .map(|r| (r.y_r_deg - r.alpha_deg).abs())
            .fold(0.0f64, f64::max)
    };
    let q2 = peak(n / 4, n / 2);
    let q4 = peak(3 * n / 4, n);
    if q2 < 1e-9 {
        return false; // fully settled
    }
    q4 > cfg.growth_threshold * q2
}

fn verdict(
    plant: &LtvPlant,
    profile: &ReferenceProfile,
    kind: ControllerKind,
    cfgs: &SimConfigs,
    cfg: &TdmConfig,
    delay: f64,
) -> Result<bool, AnalysisError> {
    let scenario = Scenario {
        loop_delay_s: delay,
        x0: [0.0, 0.0],
        t_final_s: cfg.duration_s,
        control_rate_hz: cfg.control_rate_hz,
        ..Scenario::default()
    };
    let log = run(plant, profile, kind, cfgs, &scenario)?;
    Ok(is_unstable(&log, cfg))
}

/// Stability verdict of the frozen loop at one specific delay; exposed for
/// probing around a computed margin.
pub fn delay_is_unstable(
    plant: &LtvPlant,
    t_op: f64,
    kind: ControllerKind,
    cfgs: &SimConfigs,
    cfg: &TdmConfig,
    delay: f64,
) -> Result<bool, AnalysisError> {
    let frozen = plant.frozen_at(t_op, cfg.duration_s)?;
    let profile = ReferenceProfile::constant(cfg.regulation_deg, cfg.duration_s);
    verdict(&frozen, &profile, kind, cfgs, cfg, delay)
}

/// Largest tolerated pure loop delay at the operating point `t_op` of the
/// schedule, to the configured resolution.
pub fn time_delay_margin(
    plant: &LtvPlant,
    t_op: f64,
    kind: ControllerKind,
    cfgs: &SimConfigs,
    cfg: &TdmConfig,
) -> Result<TdmResult, AnalysisError> {
    let frozen = plant.frozen_at(t_op, cfg.duration_s)?;
    let profile = ReferenceProfile::constant(cfg.regulation_deg, cfg.duration_s);
    if verdict(&frozen, &profile, kind, cfgs, cfg, 0.0)? {
        return Err(AnalysisError::UnstableAtZeroDelay);
    }
    // bracket the instability by doubling
    let mut lo = 0.0;
    let mut hi = 0.05;
    loop {
        if hi >= cfg.cap_s {
            if !verdict(&frozen, &profile, kind, cfgs, cfg, cfg.cap_s)? {
                return Ok(TdmResult {
                    margin_s: cfg.cap_s,
                    saturated: true,
                });
            }
            break;
        }
        if verdict(&frozen, &profile, kind, cfgs, cfg, hi)? {
            break;
        }
        lo = hi;
        hi = (hi * 2.0).min(cfg.cap_s);
    }
    while hi - lo > cfg.resolution_s {
        let mid = 0.5 * (lo + hi);
        if verdict(&frozen, &profile, kind, cfgs, cfg, mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(TdmResult {
        margin_s: 0.5 * (lo + hi),
        saturated: false,
    })
}
