//! Scenario simulation engine.
//!
//! Integrates the true plant
//!
//! ```text
//! ẋ = (A(t) + ΔA(t)) x + B_m(t)·ω_u·u(t − τ) + d(t)
//! ```
//!
//! under a chosen controller with fixed-step RK4 and zero-order-hold control.
//! The controller sees only the nominal `A(t), B_m(t)` — never the scenario's
//! mismatch, input gain, or disturbance. Divergence (‖x‖∞ > 1e6) flags the
//! run instead of aborting.

mod runlog;

pub use runlog::{LogRow, RunLog, RunMeta, CSV_COLUMNS};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ampc::{ampc_update, AmpcConfig, AmpcError};
use crate::l1::{L1Config, L1Controller, L1Error};
use crate::matlib::Matrix;
use crate::refmpc::{refmpc_control, QpError, RefMpcConfig};
use crate::vehicle::{LtvPlant, ReferenceProfile, VehicleError};

/// State magnitude beyond which a run is flagged as diverged.
pub const DIVERGENCE_LIMIT: f64 = 1e6;

fn default_substeps() -> usize {
    4
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("configuration mismatch: {0}")]
    ConfigMismatch(String),
    #[error(transparent)]
    Vehicle(#[from] VehicleError),
    #[error(transparent)]
    Ampc(#[from] AmpcError),
    #[error(transparent)]
    L1(#[from] L1Error),
    #[error(transparent)]
    Qp(#[from] QpError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ControllerKind {
    Ampc,
    AmpcL1,
    RefMpc,
}

impl ControllerKind {
    pub fn name(&self) -> &'static str {
        match self {
            ControllerKind::Ampc => "ampc",
            ControllerKind::AmpcL1 => "ampc-l1",
            ControllerKind::RefMpc => "refmpc",
        }
    }
}

/// Model-mismatch injection ΔA(t).
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum MismatchSpec {
    None,
    /// Severe time-dependent mismatch:
    /// ΔA = [[−0.8·M_q(t), 0.8·M_α(t)], [0.3, 0.7]].
    Case3,
    /// Per-entry multiplicative offsets on A(t): ΔA_ij = scales_ij · A_ij(t).
    Scaled { scales: [[f64; 2]; 2] },
}

/// Additive disturbance d(t).
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum DisturbanceSpec {
    None,
    /// d(t) = [0, 2·sin(1.5·t/π)]ᵀ.
    Case4,
    Sinusoid { amplitude: f64, rate_rad_s: f64 },
}

/// Uncertainty-injection description for one run. The controller never sees
/// any of these fields.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct Scenario {
    pub mismatch: MismatchSpec,
    pub input_gain: f64,
    pub disturbance: DisturbanceSpec,
    pub loop_delay_s: f64,
    pub x0: [f64; 2],
    pub t_final_s: f64,
    pub control_rate_hz: f64,
    pub seed: u64,
    /// RK4 substeps per integration tick (exposed for refinement checks).
    #[serde(default = "default_substeps")]
    pub rk4_substeps: usize,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            mismatch: MismatchSpec::None,
            input_gain: 1.0,
            disturbance: DisturbanceSpec::None,
            loop_delay_s: 0.0,
            x0: [0.0, 2.0],
            t_final_s: 120.0,
            control_rate_hz: 200.0,
            seed: 0,
            rk4_substeps: default_substeps(),
        }
    }
}

/// Benchmark case presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseId {
    Case1,
    Case2,
    Case3,
    Case4,
}

impl CaseId {
    pub fn parse(s: &str) -> Option<CaseId> {
        match s {
            "case1" => Some(CaseId::Case1),
            "case2" => Some(CaseId::Case2),
            "case3" => Some(CaseId::Case3),
            "case4" => Some(CaseId::Case4),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CaseId::Case1 => "case1",
            CaseId::Case2 => "case2",
            CaseId::Case3 => "case3",
            CaseId::Case4 => "case4",
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.control_rate_hz > 0.0 && self.t_final_s > 0.0 && self.loop_delay_s >= 0.0) {
            return Err(SimError::ConfigMismatch(
                "require control_rate > 0, t_final > 0, loop_delay >= 0".into(),
            ));
        }
        if self.rk4_substeps < 1 {
            return Err(SimError::ConfigMismatch("rk4_substeps must be >= 1".into()));
        }
        Ok(())
    }

    /// Preset for one of the benchmark cases: case 2 reduces the input gain
    /// to 40%, case 3 to 30% plus model mismatch, case 4 adds the sinusoidal
    /// disturbance.
    pub fn case(id: CaseId) -> Scenario {
        let base = Scenario::default();
        match id {
            CaseId::Case1 => base,
            CaseId::Case2 => Scenario {
                input_gain: 0.4,
                ..base
            },
            CaseId::Case3 => Scenario {
                input_gain: 0.3,
                mismatch: MismatchSpec::Case3,
                ..base
            },
            CaseId::Case4 => Scenario {
                disturbance: DisturbanceSpec::Case4,
                ..base
            },
        }
    }
}

/// ΔA(t) for a mismatch spec on the given plant.
pub fn mismatch_matrix(
    spec: &MismatchSpec,
    t: f64,
    plant: &LtvPlant,
) -> Result<Matrix, SimError> {
    match spec {
        MismatchSpec::None => Ok(Matrix::zeros(2, 2)),
        MismatchSpec::Case3 => {
            let (a, _) = plant.plant_at(t)?;
            // M_q = A[0][0], M_α = A[0][1]
            Ok(Matrix::from_rows(&[
                &[-0.8 * a[(0, 0)], 0.8 * a[(0, 1)]],
                &[0.3, 0.7],
            ]))
        }
        MismatchSpec::Scaled { scales } => {
            let (a, _) = plant.plant_at(t)?;
            let mut d = Matrix::zeros(2, 2);
            for i in 0..2 {
                for j in 0..2 {
                    d[(i, j)] = scales[i][j] * a[(i, j)];
                }
            }
            Ok(d)
        }
    }
}

/// d(t) for a disturbance spec.
pub fn disturbance(spec: &DisturbanceSpec, t: f64) -> [f64; 2] {
    match spec {
        DisturbanceSpec::None => [0.0, 0.0],
        DisturbanceSpec::Case4 => [0.0, 2.0 * (1.5 * t / std::f64::consts::PI).sin()],
        DisturbanceSpec::Sinusoid {
            amplitude,
            rate_rad_s,
        } => [0.0, amplitude * (rate_rad_s * t).sin()],
    }
}

/// Ring buffer of past control samples for pure-delay injection. Lookup
/// interpolates linearly between samples and clamps to the newest value, so
/// zero delay reproduces the zero-order-hold path exactly.
struct DelayBuffer {
    samples: std::collections::VecDeque<(f64, f64)>,
}

impl DelayBuffer {
    fn new() -> Self {
        DelayBuffer {
            samples: std::collections::VecDeque::new(),
        }
    }

    fn push(&mut self, t: f64, u: f64, keep_horizon: f64) {
        self.samples.push_back((t, u));
        while let Some(&(t0, _)) = self.samples.front() {
            if self.samples.len() > 2 && t0 < t - keep_horizon - 1.0 {
                self.samples.pop_front();
            } else {
                break;
            }
        }
    }

    fn value_at(&self, t_query: f64) -> f64 {
        let Some(&(t_first, _)) = self.samples.front() else {
            return 0.0;
        };
        if t_query < t_first {
            return 0.0; // before the first command reaches the actuator
        }
        let Some(&(t_last, u_last)) = self.samples.back() else {
            return 0.0;
        };
        if t_query >= t_last {
            return u_last;
        }
        // binary search for the bracketing pair
        let (mut lo, mut hi) = (0usize, self.samples.len() - 1);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.samples[mid].0 <= t_query {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (t0, u0) = self.samples[lo];
        let (t1, u1) = self.samples[hi];
        if t1 <= t0 {
            return u1;
        }
        let w = (t_query - t0) / (t1 - t0);
        u0 + w * (u1 - u0)
    }
}

/// Controller configurations for a run.
#[derive(Debug, Clone, Default)]
pub struct SimConfigs {
    pub ampc: AmpcConfig,
    pub l1: L1Config,
    pub refmpc: RefMpcConfig,
}

/// Simulate one scenario under one controller.
pub fn run(
    plant: &LtvPlant,
    profile: &ReferenceProfile,
    kind: ControllerKind,
    cfgs: &SimConfigs,
    scenario: &Scenario,
) -> Result<RunLog, SimError> {
    scenario.validate()?;
    cfgs.ampc.validate()?;
    let dt_ctrl = 1.0 / scenario.control_rate_hz;
    let n_ctrl = (scenario.t_final_s * scenario.control_rate_hz).round() as usize;
    if plant.t_start() > 0.0 || plant.t_end() + 1e-9 < scenario.t_final_s {
        return Err(SimError::ConfigMismatch(format!(
            "plant schedule [{}, {}] does not cover [0, {}]",
            plant.t_start(),
            plant.t_end(),
            scenario.t_final_s
        )));
    }

    // adaptation ticks per control period (adaptation may run faster)
    let ticks = if kind == ControllerKind::AmpcL1 {
        cfgs.l1.validate()?;
        let ratio = dt_ctrl / cfgs.l1.t_s;
        let k = ratio.round();
        if k < 1.0 - 1e-9 || (ratio - k).abs() > 1e-6 {
            return Err(SimError::ConfigMismatch(format!(
                "adaptation period {} must divide the control period {} evenly",
                cfgs.l1.t_s, dt_ctrl
            )));
        }
        k as usize
    } else {
        1
    };
    let dt_tick = dt_ctrl / ticks as f64;

    let c = plant.output_matrix();
    let mut x = [scenario.x0[0], scenario.x0[1]];
    let mut l1 = L1Controller::new(cfgs.l1, &scenario.x0);
    let mut delay_buf = DelayBuffer::new();
    let mut rows: Vec<LogRow> = Vec::with_capacity(n_ctrl + 1);
    let mut diverged = false;
    let mut worst_am = f64::NEG_INFINITY;
    let mut not_hurwitz = 0usize;

    'outer: for step in 0..=n_ctrl {
        let t = step as f64 * dt_ctrl;
        let (a, b) = plant.plant_at(t)?;
        let y_r = profile.command(t);
        let ampc_state = ampc_update(&a, &b, &c, &cfgs.ampc)?;
        worst_am = worst_am.max(ampc_state.am_max_re);
        if !ampc_state.hurwitz {
            not_hurwitz += 1;
        }
        let k_gain = ampc_state.k;
        let fx: f64 = ampc_state
            .f_row
            .data()
            .iter()
            .zip(&x)
            .map(|(f, xi)| f * xi)
            .sum();
        let u_fb = -k_gain * fx;

        let (u_ad, sigma1, sigma2, xhat, xtilde) = match kind {
            ControllerKind::Ampc => (k_gain * y_r, 0.0, 0.0, [0.0, 0.0], [0.0, 0.0]),
            ControllerKind::AmpcL1 => {
                let out = l1.step(&x, &ampc_state.a_m, &b, k_gain, y_r, &c)?;
                (
                    out.u_ad,
                    out.sigma1,
                    out.sigma2,
                    [out.x_hat[0], out.x_hat[1]],
                    [out.x_tilde[0], out.x_tilde[1]],
                )
            }
            ControllerKind::RefMpc => {
                let y_r_seq: Vec<f64> = (1..=cfgs.refmpc.n_pred)
                    .map(|j| profile.command(t + j as f64 * cfgs.refmpc.dt_step_s))
                    .collect();
                let u = refmpc_control(&a, &b, &c, &cfgs.refmpc, &x, &y_r_seq)?;
                // logged split keeps u_total = u_ad + u_fb
                (u - u_fb, 0.0, 0.0, [0.0, 0.0], [0.0, 0.0])
            }
        };

        let mut u_total = u_ad + u_fb;
        delay_buf.push(t, u_total, scenario.loop_delay_s);
        rows.push(LogRow {
            t,
            q_deg_s: x[0],
            alpha_deg: x[1],
            y_r_deg: y_r,
            u_total_deg: u_total,
            u_fb_deg: u_fb,
            u_ad_deg: u_ad,
            sigma1,
            sigma2,
            xhat_q: xhat[0],
            xhat_alpha: xhat[1],
            xtilde_q: xtilde[0],
            xtilde_alpha: xtilde[1],
            k_gain,
            am_max_re: ampc_state.am_max_re,
        });
        if step == n_ctrl {
            break;
        }

        for j in 0..ticks {
            let t_j = t + j as f64 * dt_tick;
            if j > 0 {
                // faster adaptation clock: refresh the augmentation with the
                // current linearization while the AMPC gains stay held
                let (a_j, b_j) = plant.plant_at(t_j)?;
                let a_m_j = a_j.sub(
                    &b_j.matmul(&Matrix::from_vec(1, 1, vec![k_gain]))
                        .matmul(&ampc_state.f_row),
                );
                let out = l1.step(&x, &a_m_j, &b_j, k_gain, profile.command(t_j), &c)?;
                u_total = out.u_ad + u_fb;
                delay_buf.push(t_j, u_total, scenario.loop_delay_s);
            }
            // RK4 over the tick, evaluating the true plant continuously
            let h = dt_tick / scenario.rk4_substeps as f64;
            for s in 0..scenario.rk4_substeps {
                let ts = t_j + s as f64 * h;
                let k1 = truth_dynamics(plant, scenario, &delay_buf, ts, &x)?;
                let x2 = [x[0] + 0.5 * h * k1[0], x[1] + 0.5 * h * k1[1]];
                let k2 = truth_dynamics(plant, scenario, &delay_buf, ts + 0.5 * h, &x2)?;
                let x3 = [x[0] + 0.5 * h * k2[0], x[1] + 0.5 * h * k2[1]];
                let k3 = truth_dynamics(plant, scenario, &delay_buf, ts + 0.5 * h, &x3)?;
                let x4 = [x[0] + h * k3[0], x[1] + h * k3[1]];
                let k4 = truth_dynamics(plant, scenario, &delay_buf, ts + h, &x4)?;
                for i in 0..2 {
                    x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
            }
            if !x[0].is_finite()
                || !x[1].is_finite()
                || x[0].abs() > DIVERGENCE_LIMIT
                || x[1].abs() > DIVERGENCE_LIMIT
            {
                diverged = true;
                break 'outer;
            }
        }
    }

    Ok(RunLog {
        meta: RunMeta {
            controller: kind.name().to_string(),
            scenario: *scenario,
            ampc: cfgs.ampc,
            l1: if kind == ControllerKind::AmpcL1 {
                Some(cfgs.l1)
            } else {
                None
            },
            diverged,
            worst_am_re: worst_am,
            not_hurwitz_count: not_hurwitz,
        },
        rows,
    })
}

fn truth_dynamics(
    plant: &LtvPlant,
    scenario: &Scenario,
    delay_buf: &DelayBuffer,
    t: f64,
    x: &[f64; 2],
) -> Result<[f64; 2], SimError> {
    // t can overshoot the schedule end by a fraction of a substep
    let t_eval = t.min(plant.t_end());
    let (a, b) = plant.plant_at(t_eval)?;
    let da = mismatch_matrix(&scenario.mismatch, t_eval, plant)?;
    let d = disturbance(&scenario.disturbance, t);
    let u = scenario.input_gain * delay_buf.value_at(t - scenario.loop_delay_s);
    let mut dx = [0.0; 2];
    for i in 0..2 {
        dx[i] = (a[(i, 0)] + da[(i, 0)]) * x[0]
            + (a[(i, 1)] + da[(i, 1)]) * x[1]
            + b[(i, 0)] * u
            + d[i];
    }
    Ok(dx)
}
