//! Linear time-varying short-period longitudinal plant.
//!
//! The plant is x = [q, α]ᵀ with
//!
//! ```text
//! A(t) = | M_q(t)    M_α(t)      |      B_m(t) = | M_δe(t)       |
//!        | α̇_q(t)   −N_α(t)/V(t) |               | −N_δe(t)/V(t) |
//! ```
//!
//! and output y = α. The dimensional derivatives come from a scheduled table
//! of aerodynamic coefficients along a nominal re-entry trajectory, linearly
//! interpolated in time. The bundled default schedule is synthetic: the
//! published trajectory data behind this model class exists only as figures,
//! so the default descends from Mach 5 / 26 km to Mach 1 / 13 km over 120 s
//! with coefficients shaped to keep the open loop statically unstable at
//! high Mach (C_mα > 0) and stable near the end of the trajectory.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matlib::Matrix;

#[derive(Debug, Error)]
pub enum VehicleError {
    #[error("time {t} s outside schedule coverage [{lo}, {hi}] s")]
    OutOfSchedule { t: f64, lo: f64, hi: f64 },
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("model file parse error: {0}")]
    Parse(#[from] serde_json::Error),
}

/// Fixed mass/geometry properties.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VehicleParams {
    pub mass_kg: f64,
    pub pitch_inertia_kgm2: f64,
    pub ref_area_m2: f64,
    pub ref_length_m: f64,
}

/// One knot of the trajectory schedule: flight condition plus aerodynamic
/// coefficients (angles in degrees, rates in deg/s).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AeroPoint {
    pub time_s: f64,
    #[serde(default)]
    pub mach: f64,
    #[serde(default)]
    pub altitude_m: f64,
    pub velocity_mps: f64,
    pub dynamic_pressure_pa: f64,
    pub c_m_alpha: f64,
    pub c_m_q: f64,
    pub c_m_delta_e: f64,
    pub c_n_alpha: f64,
    pub c_n_delta_e: f64,
    /// Pitch-rate-to-AoA-rate map, nominally one-to-one.
    #[serde(default = "default_alpha_dot_q")]
    pub alpha_dot_q: f64,
}

fn default_alpha_dot_q() -> f64 {
    1.0
}

/// Dimensional derivatives evaluated at one flight condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionalDerivatives {
    pub m_q: f64,
    pub m_alpha: f64,
    pub m_delta_e: f64,
    pub n_alpha: f64,
    pub n_delta_e: f64,
}

/// M_α = q̄S̄c/I₂·C_mα, N_α = q̄S̄/m̄·C_Nα, M_q = q̄S̄c²/(2I₂V)·C_mq,
/// M_δe = q̄S̄c/I₂·C_mδe, N_δe = q̄S̄/m̄·C_Nδe.
pub fn dimensional_derivatives(p: &AeroPoint, v: &VehicleParams) -> DimensionalDerivatives {
    let qs = p.dynamic_pressure_pa * v.ref_area_m2;
    let moment_factor = qs * v.ref_length_m / v.pitch_inertia_kgm2;
    let force_factor = qs / v.mass_kg;
    DimensionalDerivatives {
        m_q: qs * v.ref_length_m * v.ref_length_m / (2.0 * v.pitch_inertia_kgm2 * p.velocity_mps)
            * p.c_m_q,
        m_alpha: moment_factor * p.c_m_alpha,
        m_delta_e: moment_factor * p.c_m_delta_e,
        n_alpha: force_factor * p.c_n_alpha,
        n_delta_e: force_factor * p.c_n_delta_e,
    }
}

/// Time-indexed plant: schedule, vehicle constants and the output matrix
/// C = [0 1] selecting α. Immutable after construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LtvPlant {
    pub params: VehicleParams,
    pub schedule: Vec<AeroPoint>,
}

impl LtvPlant {
    pub fn new(params: VehicleParams, schedule: Vec<AeroPoint>) -> Result<Self, VehicleError> {
        if schedule.is_empty() {
            return Err(VehicleError::InvalidModel("empty schedule".into()));
        }
        for w in schedule.windows(2) {
            if w[1].time_s <= w[0].time_s {
                return Err(VehicleError::InvalidModel(
                    "schedule times must be strictly increasing".into(),
                ));
            }
        }
        for p in &schedule {
            if p.velocity_mps <= 0.0 || p.dynamic_pressure_pa <= 0.0 {
                return Err(VehicleError::InvalidModel(
                    "velocity and dynamic pressure must be positive".into(),
                ));
            }
        }
        if params.mass_kg <= 0.0
            || params.pitch_inertia_kgm2 <= 0.0
            || params.ref_area_m2 <= 0.0
            || params.ref_length_m <= 0.0
        {
            return Err(VehicleError::InvalidModel(
                "vehicle parameters must be strictly positive".into(),
            ));
        }
        Ok(LtvPlant { params, schedule })
    }

    pub fn t_start(&self) -> f64 {
        self.schedule.first().unwrap().time_s
    }

    pub fn t_end(&self) -> f64 {
        self.schedule.last().unwrap().time_s
    }

    /// Output matrix selecting α.
    pub fn output_matrix(&self) -> Matrix {
        Matrix::row_vec(&[0.0, 1.0])
    }

    /// Linear interpolation of the schedule fields at time `t`.
    pub fn point_at(&self, t: f64) -> Result<AeroPoint, VehicleError> {
        let (lo, hi) = (self.t_start(), self.t_end());
        if t < lo - 1e-9 || t > hi + 1e-9 {
            return Err(VehicleError::OutOfSchedule { t, lo, hi });
        }
        let t = t.clamp(lo, hi);
        if self.schedule.len() == 1 {
            return Ok(self.schedule[0].clone());
        }
        let idx = self
            .schedule
            .partition_point(|p| p.time_s <= t)
            .saturating_sub(1)
            .min(self.schedule.len() - 2);
        let a = &self.schedule[idx];
        let b = &self.schedule[idx + 1];
        let w = (t - a.time_s) / (b.time_s - a.time_s);
        let lerp = |x: f64, y: f64| x + w * (y - x);
        Ok(AeroPoint {
            time_s: t,
            mach: lerp(a.mach, b.mach),
            altitude_m: lerp(a.altitude_m, b.altitude_m),
            velocity_mps: lerp(a.velocity_mps, b.velocity_mps),
            dynamic_pressure_pa: lerp(a.dynamic_pressure_pa, b.dynamic_pressure_pa),
            c_m_alpha: lerp(a.c_m_alpha, b.c_m_alpha),
            c_m_q: lerp(a.c_m_q, b.c_m_q),
            c_m_delta_e: lerp(a.c_m_delta_e, b.c_m_delta_e),
            c_n_alpha: lerp(a.c_n_alpha, b.c_n_alpha),
            c_n_delta_e: lerp(a.c_n_delta_e, b.c_n_delta_e),
            alpha_dot_q: lerp(a.alpha_dot_q, b.alpha_dot_q),
        })
    }

    /// (A(t), B_m(t)) with state order x = [q, α]ᵀ.
    pub fn plant_at(&self, t: f64) -> Result<(Matrix, Matrix), VehicleError> {
        let p = self.point_at(t)?;
        let d = dimensional_derivatives(&p, &self.params);
        let a = Matrix::from_rows(&[
            &[d.m_q, d.m_alpha],
            &[p.alpha_dot_q, -d.n_alpha / p.velocity_mps],
        ]);
        let b = Matrix::col_vec(&[d.m_delta_e, -d.n_delta_e / p.velocity_mps]);
        Ok((a, b))
    }

    /// LTI plant frozen at the flight condition of time `t`, covering
    /// `[0, duration]`. Used by the margin and time-delay studies.
    pub fn frozen_at(&self, t: f64, duration: f64) -> Result<LtvPlant, VehicleError> {
        let mut p0 = self.point_at(t)?;
        p0.time_s = 0.0;
        let mut p1 = p0.clone();
        p1.time_s = duration.max(1.0);
        LtvPlant::new(self.params.clone(), vec![p0, p1])
    }

    /// Schedule times of the knots whose Mach is nearest to each requested
    /// label. Used to pick the operating points for Tables of margins/TDM.
    pub fn operating_points(&self, mach_labels: &[f64]) -> Vec<(f64, AeroPoint)> {
        mach_labels
            .iter()
            .map(|&m| {
                let p = self
                    .schedule
                    .iter()
                    .min_by(|a, b| {
                        (a.mach - m)
                            .abs()
                            .partial_cmp(&(b.mach - m).abs())
                            .unwrap()
                    })
                    .unwrap();
                (p.time_s, p.clone())
            })
            .collect()
    }
}

/// Piecewise-linear reference command in degrees; clamps to the last segment
/// value beyond coverage.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReferenceProfile {
    pub segments: Vec<ReferenceSegment>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReferenceSegment {
    pub start_s: f64,
    pub end_s: f64,
    pub start_deg: f64,
    pub end_deg: f64,
}

impl ReferenceProfile {
    pub fn constant(value_deg: f64, duration_s: f64) -> Self {
        ReferenceProfile {
            segments: vec![ReferenceSegment {
                start_s: 0.0,
                end_s: duration_s,
                start_deg: value_deg,
                end_deg: value_deg,
            }],
        }
    }

    pub fn validate(&self) -> Result<(), VehicleError> {
        if self.segments.is_empty() {
            return Err(VehicleError::InvalidModel("empty reference profile".into()));
        }
        for w in self.segments.windows(2) {
            if (w[0].end_s - w[1].start_s).abs() > 1e-9 {
                return Err(VehicleError::InvalidModel(
                    "reference segments must be contiguous".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn command(&self, t: f64) -> f64 {
        for seg in &self.segments {
            if t <= seg.end_s {
                if seg.end_s == seg.start_s {
                    return seg.end_deg;
                }
                let w = ((t - seg.start_s) / (seg.end_s - seg.start_s)).clamp(0.0, 1.0);
                return seg.start_deg + w * (seg.end_deg - seg.start_deg);
            }
        }
        self.segments.last().map(|s| s.end_deg).unwrap_or(0.0)
    }
}

/// Vehicle model document: what a plant schedule file contains.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VehicleModel {
    pub params: VehicleParams,
    pub schedule: Vec<AeroPoint>,
    pub reference: ReferenceProfile,
}

impl VehicleModel {
    pub fn from_json(s: &str) -> Result<(LtvPlant, ReferenceProfile), VehicleError> {
        let doc: VehicleModel = serde_json::from_str(s)?;
        doc.reference.validate()?;
        let plant = LtvPlant::new(doc.params, doc.schedule)?;
        Ok((plant, doc.reference))
    }
}

const DEFAULT_MODEL_JSON: &str = include_str!("../assets/default_model.json");

/// The bundled synthetic re-entry model and its pull-up reference profile
/// (hold 2° to 38 s, ramp to 10° by 83 s, ramp back down to 2° by 93 s).
pub fn default_model() -> (LtvPlant, ReferenceProfile) {
    VehicleModel::from_json(DEFAULT_MODEL_JSON).expect("bundled model must parse")
}

/// JSON source of the bundled model, for tooling that wants to re-emit it.
pub fn default_model_json() -> &'static str {
    DEFAULT_MODEL_JSON
}
