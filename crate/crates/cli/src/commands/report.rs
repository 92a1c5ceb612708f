use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use serde_json::json;

use rough_dot::electrostatics::HarmonicDot;
use rough_dot::spinorbit::BetaMaxModel;
use rough_dot::surface::io::sidecar_path;
use rough_dot::surface::{generate_surface, FractalParams, RoughSurface};
use rough_dot::variability::{
    build_report, run_grid, write_report, DotGridSpec, ExchangeInput, FiniteDiffDeltas,
    GridOptions, VariabilityReport,
};

use super::surface::snapped_spacing;
use super::{emit_json, Outcome};
use crate::args::ReportArgs;
use crate::error::CliError;
use crate::plots;
use crate::specs::{
    is_csv, read_json, read_response, read_surface, RunConfig, SurfaceSource, RUN_SCHEMA,
};

fn relative_to(config: &Path, p: &Path) -> PathBuf {
    config.parent().unwrap_or(Path::new(".")).join(p)
}

fn surface_for(
    cfg: &RunConfig,
    config: &Path,
    outcome: &mut Outcome,
) -> Result<RoughSurface, CliError> {
    match &cfg.surface {
        SurfaceSource::Generate {
            hurst,
            c0_nm3,
            extent_nm,
            dx_nm,
            lambda_min_nm,
            lambda_max_nm,
        } => {
            let dx = snapped_spacing(*extent_nm, *dx_nm)?;
            let mut params = FractalParams::full_band(*hurst, *c0_nm3, *extent_nm, dx);
            if let Some(l) = lambda_min_nm {
                params.lambda_min = *l;
            }
            if let Some(l) = lambda_max_nm {
                params.lambda_max = *l;
            }
            Ok(generate_surface(params, *extent_nm, dx, cfg.seed)?)
        }
        SurfaceSource::File(p) => {
            let p = relative_to(config, p);
            outcome.input(&p);
            if !is_csv(&p) && sidecar_path(&p).exists() {
                outcome.input(&sidecar_path(&p));
            }
            read_surface(&p)
        }
    }
}

fn grid_options(
    cfg: &RunConfig,
    config: &Path,
    outcome: &mut Outcome,
) -> Result<GridOptions, CliError> {
    let table = cfg.gate_response.as_ref().map(|p| relative_to(config, p));
    if let Some(t) = &table {
        outcome.input(t);
    }
    Ok(GridOptions {
        response: read_response(table.as_deref())?,
        tuning_gate: cfg.tuning_gate.clone(),
        gradients: cfg.gradients.then_some(FiniteDiffDeltas {
            e_z: cfg.fd_field_step_mev_nm,
            x: cfg.fd_position_step_nm,
        }),
        beta_max: BetaMaxModel {
            slope_per_mev_nm: cfg.beta_max_slope_per_mev_nm,
            offset: 0.0,
        },
        ..GridOptions::default()
    })
}

fn draw(report: &VariabilityReport, dir: &Path, outcome: &mut Outcome) -> Result<(), CliError> {
    let ok: Vec<_> = report.rows.iter().filter(|r| r.ok()).collect();
    let bins = (ok.len() as f64).sqrt().ceil().max(5.0) as usize;
    let mut hist =
        |name: &str, title: &str, label: &str, values: Vec<f64>| -> Result<(), CliError> {
            let p = dir.join(name);
            plots::histogram(&p, title, label, &values, bins)?;
            outcome.output(&p);
            Ok(())
        };
    hist(
        "displacement.svg",
        "Dot displacement",
        "displacement (nm)",
        ok.iter().map(|r| r.displacement).collect(),
    )?;
    hist(
        "valley_splitting.svg",
        "Valley splitting",
        "log10 VS (meV)",
        ok.iter()
            .filter(|r| r.splitting > 0.0)
            .map(|r| r.splitting.log10())
            .collect(),
    )?;
    hist(
        "valley_phase.svg",
        "Valley phase",
        "phase (rad)",
        ok.iter().filter_map(|r| r.phase).collect(),
    )?;
    hist(
        "dresselhaus.svg",
        "Dresselhaus coefficient",
        "beta",
        ok.iter().map(|r| r.beta).collect(),
    )?;
    if let Some(x) = &report.exchange {
        if x.distances.len() == x.j_uev.len() && !x.distances.is_empty() {
            let p = dir.join("exchange_distance.svg");
            let pts: Vec<(f64, f64)> = x
                .distances
                .iter()
                .copied()
                .zip(x.j_uev.iter().copied())
                .collect();
            plots::scatter(
                &p,
                "Exchange against distance",
                ("distance (nm)", "J (ueV)"),
                &pts,
                true,
            )?;
            outcome.output(&p);
        }
    }
    Ok(())
}

pub fn run(a: &ReportArgs) -> Result<Outcome, CliError> {
    let started = Instant::now();
    let mut outcome = Outcome::new(Some(&a.out));
    let (cfg, config) = match &a.config {
        Some(p) => {
            outcome.input(p);
            let cfg: RunConfig = read_json(p, "run configuration")?;
            if cfg.schema != RUN_SCHEMA {
                return Err(CliError::param(format!(
                    "schema: expected `{RUN_SCHEMA}`, found `{}`",
                    cfg.schema
                )));
            }
            (cfg, p.clone())
        }
        None => (
            RunConfig::default_pipeline(a.seed),
            a.out.join("config.json"),
        ),
    };
    outcome.seeds.push(cfg.seed);
    let opts = grid_options(&cfg, &config, &mut outcome)?;
    let surface = surface_for(&cfg, &config, &mut outcome)?;
    info!("surface ready: {} x {} nodes", surface.nx(), surface.ny());

    let d = &cfg.dots;
    let spec = DotGridSpec {
        rows: d.rows,
        cols: d.cols,
        pitch: d.pitch_nm,
        base: HarmonicDot::new(
            0.0,
            0.0,
            d.curvature_x_mev_nm2,
            d.curvature_y_mev_nm2,
            d.field_mev_nm,
        )?,
        center: d.center_nm.map(|c| (c[0], c[1])),
        offsets: Vec::new(),
    };
    let rows = run_grid(&spec, &surface, &opts)?;
    let exchange = cfg.exchange.as_ref().map(|x| ExchangeInput {
        j_uev: x.j_uev.clone(),
        dlog10j_dv: x.dlog10j_dv_per_v,
        distances: x.distances_nm.clone(),
    });
    let report = build_report(rows, exchange)?;
    write_report(&a.out, &report)?;
    if a.config.is_none() {
        std::fs::write(&config, serde_json::to_string_pretty(&cfg)? + "\n")?;
        outcome.output(&config);
    }
    outcome.output(&a.out.join("report.json"));
    outcome.output(&a.out.join("dots.csv"));
    if cfg.plots {
        draw(&report, &a.out, &mut outcome)?;
    }
    info!("report written in {:.1?}", started.elapsed());

    let summary = json!({
        "n_dots": report.n_dots,
        "n_failed": report.n_failed,
        "splitting_decades": report.splitting_decades,
        "vod": report.vod,
    });
    emit_json(&summary, None, &mut outcome)?;
    outcome.failed = report.n_failed == report.n_dots;
    Ok(outcome)
}
