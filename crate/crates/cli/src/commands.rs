//! Command implementations: each writes CSV results plus a JSON metadata
//! record with the full effective configuration.

use std::path::Path;

use anyhow::{bail, Context, Result};

use ampc_core::analysis::{
    lti_margins, monte_carlo, time_delay_margin, timing_benchmark, tracking_error_norm,
};
use ampc_core::ampc::ampc_update;
use ampc_core::simkit::{run, CaseId, ControllerKind, Scenario};

use crate::config::RootConfig;

/// Exit status carrying the spec'd process codes: 0 ok, 1 config error,
/// 2 divergence in a non-Monte-Carlo run.
pub enum Outcome {
    Ok,
    Diverged,
}

fn ensure_out_dir(cfg: &RootConfig) -> Result<()> {
    std::fs::create_dir_all(&cfg.out_dir)
        .with_context(|| format!("cannot create output directory {}", cfg.out_dir.display()))
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

/// `run <case>`: simulate the case under both controllers, write one RunLog
/// CSV per controller and a summary with the error norms.
pub fn cmd_run(cfg: &RootConfig, case: &str) -> Result<Outcome> {
    let scenario = match CaseId::parse(case) {
        Some(id) => Scenario {
            seed: cfg.seed,
            ..Scenario::case(id)
        },
        None if case == "custom" => Scenario {
            seed: cfg.seed,
            ..cfg.scenario
        },
        None => bail!("unknown case '{case}' (expected case1..case4 or custom)"),
    };
    let (plant, profile) = cfg.load_model()?;
    let cfgs = cfg.sim_configs();
    ensure_out_dir(cfg)?;

    let mut summary = serde_json::Map::new();
    let mut any_diverged = false;
    for kind in [ControllerKind::Ampc, ControllerKind::AmpcL1] {
        let log = run(&plant, &profile, kind, &cfgs, &scenario)?;
        let norm = tracking_error_norm(&log);
        any_diverged |= log.diverged();
        let csv_path = cfg.out_dir.join(format!("{case}_{}.csv", kind.name()));
        log.write_csv_file(&csv_path)?;
        let meta_path = cfg.out_dir.join(format!("{case}_{}.json", kind.name()));
        write_json(&meta_path, &log.metadata_json(norm))?;
        summary.insert(
            format!("norm_{}", kind.name().replace('-', "_")),
            serde_json::json!(norm),
        );
        summary.insert(
            format!("diverged_{}", kind.name().replace('-', "_")),
            serde_json::json!(log.diverged()),
        );
        println!(
            "{case} {:>8}: |e|_2 = {:.4}{}",
            kind.name(),
            norm,
            if log.diverged() { " [DIVERGED]" } else { "" }
        );
    }
    let doc = serde_json::json!({
        "case": case,
        "scenario": scenario,
        "results": summary,
        "config": cfg,
        "config_hash": cfg.hash(),
    });
    write_json(&cfg.out_dir.join(format!("{case}_summary.json")), &doc)?;
    Ok(if any_diverged {
        Outcome::Diverged
    } else {
        Outcome::Ok
    })
}

/// `montecarlo`: paired campaign, per-run CSV plus summary manifest.
pub fn cmd_montecarlo(cfg: &RootConfig) -> Result<Outcome> {
    let (plant, profile) = cfg.load_model()?;
    let cfgs = cfg.sim_configs();
    ensure_out_dir(cfg)?;
    let base = Scenario {
        seed: cfg.seed,
        ..cfg.scenario
    };
    let summary = monte_carlo(&plant, &profile, &cfgs, &base, &cfg.analysis.montecarlo)?;

    let csv_path = cfg.out_dir.join("montecarlo.csv");
    let mut w = csv::Writer::from_path(&csv_path)?;
    w.write_record([
        "index",
        "d_m_q",
        "d_m_alpha",
        "d_alpha_dot_q",
        "d_n_alpha",
        "omega_u",
        "norm_ampc",
        "norm_ampc_l1",
        "diverged_ampc",
        "diverged_ampc_l1",
    ])?;
    for r in &summary.runs {
        w.serialize((
            r.index,
            r.draw.m_q,
            r.draw.m_alpha,
            r.draw.alpha_dot_q,
            r.draw.n_alpha,
            r.draw.omega_u,
            r.norm_ampc,
            r.norm_l1,
            r.diverged_ampc,
            r.diverged_l1,
        ))?;
    }
    w.flush()?;

    let doc = serde_json::json!({
        "spec": summary.spec,
        "ampc": summary.ampc,
        "ampc_l1": summary.l1,
        "config": cfg,
        "config_hash": cfg.hash(),
        "seed": cfg.analysis.montecarlo.seed,
    });
    write_json(&cfg.out_dir.join("montecarlo_summary.json"), &doc)?;
    println!(
        "montecarlo: {} runs | ampc mean {:.3} std {:.3} ({} diverged) | ampc-l1 mean {:.3} std {:.3} ({} diverged)",
        summary.spec.n_runs,
        summary.ampc.mean,
        summary.ampc.std,
        summary.ampc.n_diverged,
        summary.l1.mean,
        summary.l1.std,
        summary.l1.n_diverged,
    );
    Ok(Outcome::Ok)
}

fn parse_controller(s: &str) -> Result<Vec<ControllerKind>> {
    match s {
        "ampc" => Ok(vec![ControllerKind::Ampc]),
        "ampc-l1" => Ok(vec![ControllerKind::AmpcL1]),
        "refmpc" => Ok(vec![ControllerKind::RefMpc]),
        "both" => Ok(vec![ControllerKind::Ampc, ControllerKind::AmpcL1]),
        _ => bail!("unknown controller '{s}' (expected ampc, ampc-l1, refmpc, or both)"),
    }
}

/// `tdm`: time-delay margin per Mach-labeled operating point and controller.
pub fn cmd_tdm(cfg: &RootConfig, controller: &str) -> Result<Outcome> {
    let kinds = parse_controller(controller)?;
    let (plant, _) = cfg.load_model()?;
    let cfgs = cfg.sim_configs();
    ensure_out_dir(cfg)?;
    let points = plant.operating_points(&cfg.analysis.mach_points);

    let csv_path = cfg.out_dir.join("tdm.csv");
    let mut w = csv::Writer::from_path(&csv_path)?;
    w.write_record(["mach", "altitude_m", "controller", "tdm_ms", "saturated"])?;
    for (t_op, point) in &points {
        for kind in &kinds {
            let r = time_delay_margin(&plant, *t_op, *kind, &cfgs, &cfg.analysis.tdm)?;
            w.serialize((
                point.mach,
                point.altitude_m,
                kind.name(),
                r.margin_s * 1000.0,
                r.saturated,
            ))?;
            println!(
                "tdm Mach {:>4}: {:>8} = {:7.1} ms{}",
                point.mach,
                kind.name(),
                r.margin_s * 1000.0,
                if r.saturated { " (search cap)" } else { "" }
            );
        }
    }
    w.flush()?;
    let doc = serde_json::json!({ "config": cfg, "config_hash": cfg.hash() });
    write_json(&cfg.out_dir.join("tdm_meta.json"), &doc)?;
    Ok(Outcome::Ok)
}

/// `margins`: LTI gain/phase margins at the Mach-labeled operating points.
pub fn cmd_margins(cfg: &RootConfig) -> Result<Outcome> {
    let (plant, _) = cfg.load_model()?;
    ensure_out_dir(cfg)?;
    let c = plant.output_matrix();
    let points = plant.operating_points(&cfg.analysis.mach_points);

    let csv_path = cfg.out_dir.join("margins.csv");
    let mut w = csv::Writer::from_path(&csv_path)?;
    w.write_record(["mach", "altitude_m", "phase_margin_deg", "gain_margin"])?;
    for (t_op, point) in &points {
        let (a, b) = plant.plant_at(*t_op)?;
        let state = ampc_update(&a, &b, &c, &cfg.ampc)?;
        let rep = lti_margins(&a, &b, &state, &cfg.analysis.margins);
        let pm = if rep.phase_margin_deg.is_finite() {
            format!("{:.2}", rep.phase_margin_deg)
        } else {
            "inf".into()
        };
        let gm = if rep.gain_margin.is_finite() {
            format!("{:.3}", rep.gain_margin)
        } else {
            "inf".into()
        };
        w.write_record([
            &format!("{}", point.mach),
            &format!("{}", point.altitude_m),
            &pm,
            &gm,
        ])?;
        println!("margins Mach {:>4}: PM = {pm} deg, GM = {gm}", point.mach);
    }
    w.flush()?;
    let doc = serde_json::json!({ "config": cfg, "config_hash": cfg.hash() });
    write_json(&cfg.out_dir.join("margins_meta.json"), &doc)?;
    Ok(Outcome::Ok)
}

/// `bench`: per-update timing table.
pub fn cmd_bench(cfg: &RootConfig) -> Result<Outcome> {
    let (plant, _) = cfg.load_model()?;
    ensure_out_dir(cfg)?;
    let cfgs = cfg.sim_configs();
    let rows = timing_benchmark(&plant, 0.0, &cfgs, cfg.analysis.bench_reps)?;
    let csv_path = cfg.out_dir.join("bench.csv");
    let mut w = csv::Writer::from_path(&csv_path)?;
    w.write_record(["scheme", "prediction_points", "median_s", "ratio_vs_ampc"])?;
    for r in &rows {
        w.serialize((&r.scheme, r.n_pred, r.median_s, r.ratio_vs_ampc))?;
        println!(
            "bench {:>10}: {:9.2} us/update  ({:5.2}x ampc)",
            r.scheme,
            r.median_s * 1e6,
            r.ratio_vs_ampc
        );
    }
    w.flush()?;
    let doc = serde_json::json!({ "config": cfg, "config_hash": cfg.hash() });
    write_json(&cfg.out_dir.join("bench_meta.json"), &doc)?;
    Ok(Outcome::Ok)
}

/// `validate-config`: parse the config and the model it references, check
/// invariants, print a short report.
pub fn cmd_validate(cfg: &RootConfig) -> Result<Outcome> {
    cfg.ampc
        .validate()
        .map_err(|e| anyhow::anyhow!("ampc config: {e}"))?;
    cfg.l1
        .validate()
        .map_err(|e| anyhow::anyhow!("l1 config: {e}"))?;
    cfg.scenario
        .validate()
        .map_err(|e| anyhow::anyhow!("scenario: {e}"))?;
    let (plant, profile) = cfg.load_model()?;
    profile
        .validate()
        .map_err(|e| anyhow::anyhow!("reference profile: {e}"))?;
    if plant.t_end() < cfg.scenario.t_final_s {
        bail!(
            "plant schedule ends at {} s but the scenario runs to {} s",
            plant.t_end(),
            cfg.scenario.t_final_s
        );
    }
    println!(
        "config ok: schedule [{}, {}] s, {} knots, t_final {} s, control {} Hz",
        plant.t_start(),
        plant.t_end(),
        plant.schedule.len(),
        cfg.scenario.t_final_s,
        cfg.scenario.control_rate_hz
    );
    Ok(Outcome::Ok)
}
