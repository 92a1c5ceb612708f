use log::info;
use serde::Serialize;

use rough_dot::surface::io::{read_profile_csv, sidecar_path, write_surface, write_surface_csv};
use rough_dot::surface::{
    estimate_psd_1d, estimate_psd_2d_average, generate_surface, rms_of_segments, Axes,
    FractalParams, LineSource, Profile, PsdEstimate, PsdOptions,
};

use super::{csv_writer, emit_json, linear_fit, Outcome};
use crate::args::{LineAxes, SurfaceGenArgs, SurfaceInput, SurfacePsdArgs, SurfaceRmsArgs};
use crate::error::CliError;
use crate::plots;
use crate::specs::{is_csv, read_surface};

/// Spacing that fits a whole number of cells into `extent`.
pub fn snapped_spacing(extent: f64, dx: f64) -> Result<f64, CliError> {
    if !(extent > 0.0 && dx > 0.0 && extent.is_finite() && dx.is_finite()) {
        return Err(CliError::param("extent and dx must be positive"));
    }
    let n = (extent / dx).round().max(1.0);
    let snapped = extent / n;
    if (snapped - dx).abs() > 1e-12 * dx {
        info!("grid spacing snapped from {dx} nm to {snapped} nm ({n} cells)");
    }
    Ok(snapped)
}

#[derive(Serialize)]
struct GenSummary {
    n: usize,
    dx_nm: f64,
    extent_nm: f64,
    lambda_min_nm: f64,
    lambda_max_nm: f64,
    seed: u64,
    rms_nm: f64,
}

pub fn generate(a: &SurfaceGenArgs) -> Result<Outcome, CliError> {
    let dx = snapped_spacing(a.extent, a.dx)?;
    let mut params = FractalParams::full_band(a.hurst, a.c0, a.extent, dx);
    if let Some(l) = a.lambda_min {
        params.lambda_min = l;
    }
    if let Some(l) = a.lambda_max {
        params.lambda_max = l;
    }
    let surface = generate_surface(params, a.extent, dx, a.seed)?;
    let mut outcome = Outcome::new(Some(&a.out));
    outcome.seeds.push(a.seed);
    super::create_parent(&a.out)?;
    if is_csv(&a.out) {
        write_surface_csv(&surface, &a.out)?;
        outcome.output(&a.out);
    } else {
        write_surface(&surface, &a.out)?;
        outcome.output(&a.out);
        outcome.output(&sidecar_path(&a.out));
    }
    let h = surface.heights();
    let mean = surface.mean();
    let rms = (h.iter().map(|z| (z - mean).powi(2)).sum::<f64>() / h.len() as f64).sqrt();
    let summary = GenSummary {
        n: surface.nx(),
        dx_nm: dx,
        extent_nm: a.extent,
        lambda_min_nm: params.lambda_min,
        lambda_max_nm: params.lambda_max,
        seed: a.seed,
        rms_nm: rms,
    };
    emit_json(&summary, None, &mut outcome)?;
    Ok(outcome)
}

enum Loaded {
    Profile(Vec<f64>, f64),
    Surface(rough_dot::surface::RoughSurface),
}

fn load(src: &SurfaceInput, outcome: &mut Outcome) -> Result<Loaded, CliError> {
    match (&src.input, &src.surface) {
        (Some(p), _) => {
            outcome.input(p);
            let (z, dx) = read_profile_csv(p)?;
            Ok(Loaded::Profile(z, dx))
        }
        (None, Some(p)) => {
            outcome.input(p);
            if !is_csv(p) && sidecar_path(p).exists() {
                outcome.input(&sidecar_path(p));
            }
            Ok(Loaded::Surface(read_surface(p)?))
        }
        (None, None) => Err(CliError::param("one of --in or --surface is required")),
    }
}

#[derive(Serialize)]
struct PsdSummary {
    hurst: Option<f64>,
    c0_nm3: Option<f64>,
    exponent: Option<f64>,
    n_bins_fitted: usize,
    fit_range_nm: (f64, f64),
    n_samples: usize,
    total_power_nm2: f64,
}

pub fn psd(a: &SurfacePsdArgs) -> Result<Outcome, CliError> {
    let mut outcome = Outcome::new(a.out.as_deref());
    let opts = PsdOptions {
        fit_range: (a.fit_min, a.fit_max),
        bins_per_decade: a.bins_per_decade,
    };
    let est: PsdEstimate = match load(&a.source, &mut outcome)? {
        Loaded::Profile(z, dx) => estimate_psd_1d(&z, dx, &opts)?,
        Loaded::Surface(s) => {
            let axes = match a.axes {
                LineAxes::Rows => Axes::Rows,
                LineAxes::Columns => Axes::Columns,
                LineAxes::Both => Axes::Both,
            };
            estimate_psd_2d_average(&s, a.lines, axes, &opts)?
        }
    };
    if let Some(p) = &a.out {
        let mut w = csv_writer(p)?;
        w.write_record(["wavelength_nm", "psd_nm3"])?;
        for (l, c) in est.wavelengths.iter().zip(&est.psd1d) {
            w.write_record([l.to_string(), c.to_string()])?;
        }
        w.flush()?;
        outcome.output(p);
    }
    if let Some(p) = &a.plot {
        let pts: Vec<(f64, f64)> = est
            .wavelengths
            .iter()
            .copied()
            .zip(est.psd1d.iter().copied())
            .collect();
        plots::curve(
            p,
            "Power spectral density",
            ("wavelength (nm)", "PSD (nm^3)"),
            &pts,
            true,
        )?;
        outcome.output(p);
    }
    let summary = PsdSummary {
        hurst: est.fit.map(|f| f.hurst),
        c0_nm3: est.fit.map(|f| f.c0),
        exponent: est.fit.map(|f| f.exponent),
        n_bins_fitted: est.fit.map_or(0, |f| f.n_bins),
        fit_range_nm: est.fit_range,
        n_samples: est.n_samples,
        total_power_nm2: est.total_power(),
    };
    emit_json(&summary, None, &mut outcome)?;
    if est.fit.is_none() {
        eprintln!("error: too few spectral bins inside the fit window for a power-law fit");
        outcome.failed = true;
    }
    Ok(outcome)
}

#[derive(Serialize)]
struct RmsRow {
    lambda_nm: f64,
    rms_nm: f64,
    std_err_nm: f64,
    n_windows: usize,
}

#[derive(Serialize)]
struct RmsSummary {
    /// Log-log slope of RMS against window width.
    exponent: Option<f64>,
    rows: Vec<RmsRow>,
}

pub fn rms(a: &SurfaceRmsArgs) -> Result<Outcome, CliError> {
    let mut outcome = Outcome::new(a.out.as_deref());
    let loaded = load(&a.source, &mut outcome)?;
    let curve = match &loaded {
        Loaded::Profile(z, dx) => {
            rms_of_segments(&Profile { z, dx: *dx } as &dyn LineSource, &a.lambdas)?
        }
        Loaded::Surface(s) => rms_of_segments(s, &a.lambdas)?,
    };
    let rows: Vec<RmsRow> = (0..curve.lambdas.len())
        .map(|i| RmsRow {
            lambda_nm: curve.lambdas[i],
            rms_nm: curve.rms[i],
            std_err_nm: curve.std_err[i],
            n_windows: curve.n_windows[i],
        })
        .collect();
    if let Some(p) = &a.out {
        let mut w = csv_writer(p)?;
        for r in &rows {
            w.serialize(r)?;
        }
        w.flush()?;
        outcome.output(p);
    }
    let (lx, ly): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.rms_nm > 0.0)
        .map(|r| (r.lambda_nm.ln(), r.rms_nm.ln()))
        .unzip();
    let summary = RmsSummary {
        exponent: linear_fit(&lx, &ly).map(|f| f.0),
        rows,
    };
    emit_json(&summary, None, &mut outcome)?;
    Ok(outcome)
}
