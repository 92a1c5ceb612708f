use serde::Serialize;
use serde_json::json;

use rough_dot::electrostatics::HarmonicDot;
use rough_dot::surface::io::sidecar_path;
use rough_dot::valleymodel::{build_chain, chain_valley_splitting, extract_valley_phase, ZGrid};
use rough_dot::variability::{run_grid, DotGridSpec, GridOptions};

use super::{csv_writer, emit_json, read_columns, Outcome};
use crate::args::{ValleyGridArgs, ValleyPhaseArgs};
use crate::error::CliError;
use crate::specs::{is_csv, read_surface};

/// `ROWSxCOLS`.
pub fn parse_shape(s: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::param(format!("--dots `{s}`: expected ROWSxCOLS"));
    let (r, c) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    let r: usize = r.trim().parse().map_err(|_| bad())?;
    let c: usize = c.trim().parse().map_err(|_| bad())?;
    if r == 0 || c == 0 {
        return Err(bad());
    }
    Ok((r, c))
}

#[derive(Serialize)]
struct ValleyRow {
    dot_id: usize,
    xc: f64,
    yc: f64,
    dx_nm: f64,
    dy_nm: f64,
    #[serde(rename = "vs_meV")]
    vs_mev: f64,
    phase_rad: Option<f64>,
}

pub fn grid(a: &ValleyGridArgs) -> Result<Outcome, CliError> {
    let (rows, cols) = parse_shape(&a.dots)?;
    let mut outcome = Outcome::new(Some(&a.out));
    outcome.input(&a.surface);
    if !is_csv(&a.surface) && sidecar_path(&a.surface).exists() {
        outcome.input(&sidecar_path(&a.surface));
    }
    let surface = read_surface(&a.surface)?;
    let spec = DotGridSpec {
        rows,
        cols,
        pitch: a.pitch,
        base: HarmonicDot::isotropic(0.0, 0.0, a.curvature, a.ez)?,
        center: None,
        offsets: Vec::new(),
    };
    let opts = GridOptions {
        gradients: None,
        ..GridOptions::default()
    };
    let dots = run_grid(&spec, &surface, &opts)?;
    let mut w = csv_writer(&a.out)?;
    for d in &dots {
        w.serialize(ValleyRow {
            dot_id: d.id,
            xc: d.center_x,
            yc: d.center_y,
            dx_nm: d.displacement_x,
            dy_nm: d.displacement_y,
            vs_mev: d.splitting,
            phase_rad: d.phase,
        })?;
    }
    w.flush()?;
    outcome.output(&a.out);

    let failed: Vec<String> = dots
        .iter()
        .filter_map(|d| d.error.as_ref().map(|e| format!("dot {}: {e}", d.id)))
        .collect();
    let vs: Vec<f64> = dots
        .iter()
        .filter(|d| d.ok() && d.splitting > 0.0)
        .map(|d| d.splitting)
        .collect();
    let (lo, hi) = vs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| {
            (l.min(v), h.max(v))
        });
    let summary = json!({
        "n_dots": dots.len(),
        "n_failed": failed.len(),
        "vs_min_mev": (!vs.is_empty()).then_some(lo),
        "vs_max_mev": (!vs.is_empty()).then_some(hi),
        "vs_spread_decades": (!vs.is_empty()).then(|| (hi / lo).log10()),
        "failures": failed,
    });
    emit_json(&summary, None, &mut outcome)?;
    outcome.failed = failed.len() == dots.len();
    Ok(outcome)
}

pub fn phase(a: &ValleyPhaseArgs) -> Result<Outcome, CliError> {
    let mut outcome = Outcome::new(a.out.as_deref());
    let value = match (&a.input, a.ez) {
        (Some(p), _) => {
            outcome.input(p);
            let cols = read_columns(p, &["z_nm", "rho_plus", "rho_minus"])?;
            let z = &cols[0];
            if z.len() < 8 {
                return Err(CliError::param("density table needs at least 8 rows"));
            }
            let dz = (z[z.len() - 1] - z[0]) / (z.len() - 1) as f64;
            if !(dz > 0.0)
                || z.windows(2)
                    .any(|w| ((w[1] - w[0]) - dz).abs() > 1e-6 * dz.abs())
            {
                return Err(CliError::param(
                    "z_nm must be increasing and uniformly spaced",
                ));
            }
            let grid = ZGrid {
                nz: z.len(),
                dz,
                z0: z[0],
            };
            let ph = extract_valley_phase(&cols[1], &cols[2], &grid)?;
            json!({
                "phase_rad": ph.phase,
                "peak_k_per_nm": ph.peak_k,
                "peak_bin_k_per_nm": ph.peak_bin_k,
                "peak_to_floor": ph.peak_to_floor,
            })
        }
        (None, Some(ez)) => {
            let chain = build_chain(ez, a.interface_z, 300)?;
            let v = chain_valley_splitting(&chain)?;
            json!({
                "e_z_mev_nm": ez,
                "interface_z_nm": a.interface_z,
                "splitting_mev": v.splitting,
                "phase_rad": v.phase,
                "degenerate": v.degenerate,
                "energies_mev": v.energies,
            })
        }
        (None, None) => return Err(CliError::param("one of --in or --ez is required")),
    };
    emit_json(&value, a.out.as_deref(), &mut outcome)?;
    Ok(outcome)
}
