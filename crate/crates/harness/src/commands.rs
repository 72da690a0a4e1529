//! Runs a configured study and writes its artifacts to the output directory.

use std::path::PathBuf;

use crate::config::{ExperimentConfig, InitPreset, StudyMode};
use crate::error::Result;
use crate::io::{fmt_f64, write_field_csv, write_manifest, write_series_csv, write_spatial_csv, write_table_csv};
use crate::studies::{amplitude_series, convergence_study, dirac_experiment, eps_sweep_at, initial_data, run_snapshots};

/// Default output times of an eps sweep.
pub const EPS_SWEEP_TIMES: [f64; 2] = [0.15, 1.5];

fn time_tag(t: f64) -> String {
    format!("{t}").replace('.', "p")
}

/// Executes `cfg.mode`, returning the files written (manifest last).
pub fn execute(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    // the kernel study falls back to a single Dirac; record what actually ran
    let mut effective = cfg.clone();
    if cfg.mode == StudyMode::Kernel && !matches!(cfg.init, InitPreset::Dirac | InitPreset::TwoDirac) {
        effective.init = InitPreset::Dirac;
    }
    let cfg = &effective;
    std::fs::create_dir_all(&cfg.out_dir)?;
    let out = |name: &str| cfg.out_dir.join(name);
    let mut written = Vec::new();
    let mut derived: Vec<(String, String)> = Vec::new();
    let grid = cfg.grid()?;
    let j0 = grid.nearest_v_index(0.0);
    let i0 = grid.nearest_x_index(0.0);
    derived.push(("dx".into(), fmt_f64(grid.dx())));
    derived.push(("dv".into(), fmt_f64(grid.dv())));
    derived.push(("dt".into(), fmt_f64(grid.dt())));
    derived.push(("n_t".into(), grid.n_t().to_string()));
    derived.push(("slice_v".into(), fmt_f64(grid.v()[j0])));
    derived.push(("slice_x".into(), fmt_f64(grid.x()[i0])));

    match cfg.mode {
        StudyMode::Run => {
            let phi_in = initial_data(cfg, &grid);
            let times = cfg.output_times();
            let snaps = run_snapshots(cfg.scheme, cfg.primary_eps(), &grid, phi_in, &times)?;
            let single = snaps.len() == 1;
            for snap in &snaps {
                let suffix = if single { String::new() } else { format!("_t{}", time_tag(snap.t)) };
                let p = out(&format!("phi{suffix}.csv"));
                write_field_csv(&p, &grid, &snap.phi)?;
                written.push(p);
                if let Some(mu) = &snap.mu {
                    let p = out(&format!("mu{suffix}.csv"));
                    write_spatial_csv(&p, &grid, mu)?;
                    written.push(p);
                }
            }
        }
        StudyMode::EpsSweep => {
            let times = if cfg.times.is_empty() {
                EPS_SWEEP_TIMES.iter().copied().filter(|&t| t <= cfg.t_final).collect()
            } else {
                cfg.times.clone()
            };
            for table in eps_sweep_at(cfg, &times)? {
                let t = table.metadata.iter().find(|(k, _)| k == "t").map(|(_, v)| v.clone()).unwrap_or_default();
                let p = out(&format!("eps_errors_t{}.csv", t.replace('.', "p")));
                write_table_csv(&p, &table)?;
                written.push(p);
                if let Some(slope) = table.fitted_order() {
                    derived.push((format!("fitted_slope_t{t}"), fmt_f64(slope)));
                }
            }
        }
        StudyMode::ConvDx | StudyMode::ConvDv | StudyMode::ConvDt => {
            let table = convergence_study(cfg, cfg.mode)?;
            let p = out("errors.csv");
            write_table_csv(&p, &table)?;
            written.push(p);
            for (k, v) in &table.metadata {
                derived.push((format!("study.{k}"), v.clone()));
            }
            if let Some(order) = table.fitted_order() {
                derived.push(("fitted_order".into(), fmt_f64(order)));
            }
        }
        StudyMode::Amplitude => {
            let series = amplitude_series(cfg)?;
            let p = out("amplitude.csv");
            write_series_csv(&p, ["t", "amplitude"], &series)?;
            written.push(p);
        }
        StudyMode::Kernel => {
            let report = dirac_experiment(cfg)?;
            let p = out("profile.csv");
            write_spatial_csv(&p, &grid, &report.profile)?;
            written.push(p);
            let p = out("kernel.csv");
            let mut w = csv::Writer::from_path(&p)?;
            w.write_record(["x", "offset", "profile", "cusp", "kernel"])?;
            for r in &report.rows {
                w.write_record([r.x, r.offset, r.profile, r.cusp, r.kernel].map(fmt_f64))?;
            }
            w.flush()?;
            written.push(p);
            derived.push(("kernel.center_x".into(), fmt_f64(report.center_x)));
            derived.push(("kernel.radius".into(), fmt_f64(report.radius)));
            derived.push(("kernel.deviation".into(), fmt_f64(report.deviation)));
            if let Some(d) = report.superposition_deficit {
                derived.push(("kernel.superposition_deficit".into(), fmt_f64(d)));
            }
        }
    }

    let p = out("manifest.txt");
    write_manifest(&p, &cfg.to_text(), &derived)?;
    written.push(p);
    Ok(written)
}
