//! Single-update timing comparison: conventional MPC at 10 and 5 prediction
//! points versus AMPC and AMPC-L1. Strictly single-threaded; reports the
//! median over many repetitions plus the ratio against AMPC.

use std::hint::black_box;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::ampc::{ampc_control, ampc_update};
use crate::l1::L1Controller;
use crate::refmpc::{refmpc_control, RefMpcConfig};
use crate::simkit::SimConfigs;
use crate::vehicle::LtvPlant;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimingRow {
    pub scheme: String,
    pub n_pred: usize,
    pub median_s: f64,
    pub ratio_vs_ampc: f64,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn time_reps<F: FnMut()>(reps: usize, mut f: F) -> f64 {
    // warm-up
    for _ in 0..(reps / 10).max(10) {
        f();
    }
    let mut times = Vec::with_capacity(reps);
    for _ in 0..reps {
        let t0 = Instant::now();
        f();
        times.push(t0.elapsed().as_secs_f64());
    }
    median(times)
}

/// Benchmark one control update per scheme at the flight condition `t_op`.
/// The reference step is large enough to activate the QP bounds, so the
/// interior point does representative work.
pub fn timing_benchmark(
    plant: &LtvPlant,
    t_op: f64,
    cfgs: &SimConfigs,
    reps: usize,
) -> Result<Vec<TimingRow>, AnalysisError> {
    let (a, b) = plant.plant_at(t_op)?;
    let c = plant.output_matrix();
    let x = [0.0, 0.0];
    let y_r = 10.0;
    let reps = reps.max(1000);

    let ampc_median = time_reps(reps, || {
        let st = ampc_update(black_box(&a), black_box(&b), &c, &cfgs.ampc).unwrap();
        black_box(ampc_control(&st, black_box(&x), black_box(y_r)));
    });

    let mut l1 = L1Controller::new(cfgs.l1, &x);
    let l1_median = time_reps(reps, || {
        let st = ampc_update(black_box(&a), black_box(&b), &c, &cfgs.ampc).unwrap();
        let u_opt = ampc_control(&st, black_box(&x), black_box(y_r));
        let out = l1
            .step(black_box(&x), &st.a_m, &b, st.k, black_box(y_r), &c)
            .unwrap();
        black_box(u_opt + out.u_ad);
    });

    let mut rows = vec![];
    for n_pred in [10usize, 5] {
        let cfg = RefMpcConfig {
            n_pred,
            dt_step_s: cfgs.ampc.dt_pred_s / n_pred as f64,
            ..cfgs.refmpc
        };
        let y_r_seq = vec![y_r; n_pred];
        let m = time_reps(reps, || {
            black_box(
                refmpc_control(black_box(&a), black_box(&b), &c, &cfg, black_box(&x), &y_r_seq)
                    .unwrap(),
            );
        });
        rows.push(TimingRow {
            scheme: format!("refmpc-{n_pred}"),
            n_pred,
            median_s: m,
            ratio_vs_ampc: m / ampc_median,
        });
    }
    rows.push(TimingRow {
        scheme: "ampc".into(),
        n_pred: 1,
        median_s: ampc_median,
        ratio_vs_ampc: 1.0,
    });
    rows.push(TimingRow {
        scheme: "ampc-l1".into(),
        n_pred: 1,
        median_s: l1_median,
        ratio_vs_ampc: l1_median / ampc_median,
    });
    Ok(rows)
}
