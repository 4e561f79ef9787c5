//! Time-series record of a simulation run, with CSV export and a JSON
//! metadata sidecar.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Scenario, SimError};
use crate::ampc::AmpcConfig;
use crate::l1::L1Config;

/// One logged control step.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LogRow {
    pub t: f64,
    pub q_deg_s: f64,
    pub alpha_deg: f64,
    pub y_r_deg: f64,
    pub u_total_deg: f64,
    /// AMPC feedback part −K·F·x (for RefMPC runs, the whole input).
    pub u_fb_deg: f64,
    /// Adaptive/feedforward part (K·y_r for baseline AMPC).
    pub u_ad_deg: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub xhat_q: f64,
    pub xhat_alpha: f64,
    pub xtilde_q: f64,
    pub xtilde_alpha: f64,
    pub k_gain: f64,
    pub am_max_re: f64,
}

pub const CSV_COLUMNS: [&str; 15] = [
    "t",
    "q_deg_s",
    "alpha_deg",
    "y_r_deg",
    "u_total_deg",
    "u_fb_deg",
    "u_ad_deg",
    "sigma1",
    "sigma2",
    "xhat_q",
    "xhat_alpha",
    "xtilde_q",
    "xtilde_alpha",
    "k_gain",
    "am_max_re",
];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunMeta {
    pub controller: String,
    pub scenario: Scenario,
    pub ampc: AmpcConfig,
    pub l1: Option<L1Config>,
    pub diverged: bool,
    /// Largest real part of any A_m eigenvalue seen over the run.
    pub worst_am_re: f64,
    /// Number of control updates whose A_m was not Hurwitz.
    pub not_hurwitz_count: usize,
}

#[derive(Debug, Clone)]
pub struct RunLog {
    pub meta: RunMeta,
    pub rows: Vec<LogRow>,
}

impl RunLog {
    pub fn diverged(&self) -> bool {
        self.meta.diverged
    }

    /// Uniform control-rate sampling interval of the log.
    pub fn sample_dt(&self) -> f64 {
        1.0 / self.meta.scenario.control_rate_hz
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), SimError> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(CSV_COLUMNS)?;
        for r in &self.rows {
            wtr.serialize((
                r.t,
                r.q_deg_s,
                r.alpha_deg,
                r.y_r_deg,
                r.u_total_deg,
                r.u_fb_deg,
                r.u_ad_deg,
                r.sigma1,
                r.sigma2,
                r.xhat_q,
                r.xhat_alpha,
                r.xtilde_q,
                r.xtilde_alpha,
                r.k_gain,
                r.am_max_re,
            ))?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn write_csv_file<P: AsRef<Path>>(&self, path: P) -> Result<(), SimError> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    /// Metadata sidecar: scenario echo plus summary values.
    pub fn metadata_json(&self, error_norm: f64) -> serde_json::Value {
        serde_json::json!({
            "meta": self.meta,
            "summary": {
                "rows": self.rows.len(),
                "error_norm": error_norm,
                "final_alpha_deg": self.rows.last().map(|r| r.alpha_deg),
            }
        })
    }
}
