use log::info;
use serde::Serialize;

use rough_dot::electrostatics::{build_double_dot, DoubleDotPotential, GateResponse, HarmonicDot};
use rough_dot::pimc::oracle::{exact_exchange_1d, OracleOptions};
use rough_dot::pimc::{
    estimate_exchange, estimate_exchange_for, DoubleWell1D, ExchangeOptions, PimcConfig,
};
use rough_dot::surface::io::sidecar_path;
use rough_dot::surface::RoughSurface;
use rough_dot::units::{EPS_SI, M_TRANSVERSE};

use super::pot::load_double_dot;
use super::{csv_writer, emit_json, linear_fit, Outcome};
use crate::args::{PimcExchangeArgs, PimcRunArgs, PimcValidateArgs};
use crate::error::CliError;
use crate::plots;
use crate::specs::{is_csv, read_surface, DoubleDotSpec};

fn config(run: &PimcRunArgs) -> Result<PimcConfig, CliError> {
    if !(run.kt > 0.0 && run.kt.is_finite()) {
        return Err(CliError::param("--kt must be positive"));
    }
    let mut cfg = PimcConfig::at_temperature(run.kt, run.slices);
    cfg.n_sweeps = run.sweeps;
    cfg.burn_in = run.burn_in;
    cfg.seed = run.seed;
    cfg.validate()?;
    Ok(cfg)
}

/// Double dot at `v_j`, optionally moved so its midpoint sits at `at`.
fn place(
    spec: &DoubleDotSpec,
    response: &GateResponse,
    v_j: f64,
    at: Option<(f64, f64)>,
) -> Result<DoubleDotPotential, CliError> {
    let (mut left, mut right) = (spec.left.dot()?, spec.right.dot()?);
    let rule = spec.merge_rule();
    let pot = build_double_dot(&left, &right, v_j, response, &spec.j_gate, rule)?;
    let Some((x, y)) = at else {
        return Ok(pot);
    };
    let (mx, my) = pot.midpoint();
    let shift = |d: &mut HarmonicDot| {
        d.x_c += x - mx;
        d.y_c += y - my;
    };
    shift(&mut left);
    shift(&mut right);
    Ok(build_double_dot(
        &left,
        &right,
        v_j,
        response,
        &spec.j_gate,
        rule,
    )?)
}

/// Flat interface at z = 0 covering ±100 nm around `center`.
fn flat_surface(center: (f64, f64)) -> Result<RoughSurface, CliError> {
    Ok(RoughSurface::flat(
        1000,
        0.2,
        (center.0 - 100.0, center.1 - 100.0),
        0.0,
    )?)
}

#[derive(Serialize)]
struct ExchangeRow {
    vj: f64,
    #[serde(rename = "J_ueV")]
    j_uev: f64,
    #[serde(rename = "J_err")]
    j_err: f64,
    #[serde(rename = "deltaS")]
    delta_s: f64,
    #[serde(rename = "deltaS_err")]
    delta_s_err: f64,
    accept_rate: f64,
    separation_nm: f64,
    below_floor: bool,
    #[serde(rename = "J_upper_ueV")]
    j_upper: Option<f64>,
    n_windows: usize,
    tau_int: f64,
}

pub fn exchange(a: &PimcExchangeArgs) -> Result<Outcome, CliError> {
    let cfg = config(&a.run)?;
    let mut outcome = Outcome::new(Some(&a.out));
    outcome.seeds.push(a.run.seed);
    let (spec, response) = load_double_dot(Some(&a.pot), a.response.as_deref(), &mut outcome)?;
    let at = match a.at.as_deref() {
        None => None,
        Some([x, y]) => Some((*x, *y)),
        Some(_) => return Err(CliError::param("--at takes two values X,Y")),
    };
    let first = place(&spec, &response, a.vj[0], at)?;
    let surface = match &a.surface {
        Some(p) => {
            outcome.input(p);
            if !is_csv(p) && sidecar_path(p).exists() {
                outcome.input(&sidecar_path(p));
            }
            read_surface(p)?
        }
        None => flat_surface(first.midpoint())?,
    };

    let mut rows = Vec::with_capacity(a.vj.len());
    for (i, &vj) in a.vj.iter().enumerate() {
        let pot = place(&spec, &response, vj, at)?;
        let opts = ExchangeOptions {
            windows: a.windows,
            checkpoint_dir: a
                .checkpoint_dir
                .as_ref()
                .map(|d| d.join(format!("vj_{i:03}"))),
            checkpoint_every: a.checkpoint_every,
        };
        let e = estimate_exchange(&pot, &surface, &cfg, &opts)?;
        info!(
            "V_J = {vj} V: separation {:.2} nm, J = {:.4e} ueV, dS = {:.3} +- {:.3}",
            pot.separation(),
            e.j_uev,
            e.delta_s,
            e.delta_s_err
        );
        rows.push(ExchangeRow {
            vj,
            j_uev: e.j_uev,
            j_err: e.j_err_uev,
            delta_s: e.delta_s,
            delta_s_err: e.delta_s_err,
            accept_rate: e.acceptance.overall(),
            separation_nm: pot.separation(),
            below_floor: e.below_floor,
            j_upper: e.j_upper_uev,
            n_windows: e.n_windows,
            tau_int: e.tau_int,
        });
    }
    if let Some(d) = &a.checkpoint_dir {
        info!("checkpoints kept under {}", d.display());
    }

    let mut w = csv_writer(&a.out)?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    outcome.output(&a.out);
    if let Some(p) = &a.plot {
        let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.vj, r.j_uev)).collect();
        plots::curve(
            p,
            "Exchange against barrier gate",
            ("V_J (V)", "J (ueV)"),
            &pts,
            false,
        )?;
        outcome.output(p);
    }
    let (v, lj): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| !r.below_floor)
        .map(|r| (r.vj, r.j_uev.log10()))
        .unzip();
    let summary = serde_json::json!({
        "points": rows.len(),
        "resolved": v.len(),
        "dlog10j_dv_per_v": linear_fit(&v, &lj).map(|f| f.0),
    });
    emit_json(&summary, None, &mut outcome)?;
    Ok(outcome)
}

#[derive(Serialize)]
struct ValidationRow {
    distance_nm: f64,
    j_exact_uev: f64,
    j_pimc_uev: f64,
    j_pimc_err_uev: f64,
    delta_s: f64,
    delta_s_err: f64,
    delta_s_exact: f64,
    /// (ΔS − ΔS_exact)/σ.
    z: f64,
    pass: bool,
}

/// Agreement threshold in standard errors.
const SIGMAS: f64 = 2.0;

pub fn validate(a: &PimcValidateArgs) -> Result<Outcome, CliError> {
    let cfg = config(&a.run)?;
    if a.distances.is_empty() {
        return Err(CliError::param("--distances is empty"));
    }
    let mut outcome = Outcome::new(a.out.as_deref());
    outcome.seeds.push(a.run.seed);
    let mut rows = Vec::new();
    for &d in &a.distances {
        let sys = DoubleWell1D::new(M_TRANSVERSE, a.curvature, d, a.coulomb_width, EPS_SI);
        let exact = exact_exchange_1d(
            &sys,
            &OracleOptions {
                n_grid: a.grid,
                ..Default::default()
            },
        )?;
        let j_exact = 1000.0 * exact.j;
        if !(j_exact > 0.0) {
            return Err(CliError::Numerical(format!(
                "exact exchange at {d} nm is not positive"
            )));
        }
        let est = estimate_exchange_for(&sys, &cfg, &ExchangeOptions::default())?;
        let target = (2000.0 / cfg.beta() / j_exact).ln();
        let z = (est.delta_s - target) / est.delta_s_err;
        let pass = z.abs() <= SIGMAS;
        eprintln!(
            "{} d = {d} nm: J exact {j_exact:.4e} ueV, PIMC {:.4e} +- {:.2e} ueV ({z:+.2} sigma)",
            if pass { "PASS" } else { "FAIL" },
            est.j_uev,
            est.j_err_uev
        );
        rows.push(ValidationRow {
            distance_nm: d,
            j_exact_uev: j_exact,
            j_pimc_uev: est.j_uev,
            j_pimc_err_uev: est.j_err_uev,
            delta_s: est.delta_s,
            delta_s_err: est.delta_s_err,
            delta_s_exact: target,
            z,
            pass,
        });
    }
    let logs: Vec<f64> = rows.iter().map(|r| r.j_exact_uev.log10()).collect();
    let decades = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - logs.iter().copied().fold(f64::INFINITY, f64::min);
    let all_pass = rows.iter().all(|r| r.pass);
    let value = serde_json::json!({
        "decades_spanned": decades,
        "sigmas": SIGMAS,
        "all_pass": all_pass,
        "rows": rows,
    });
    emit_json(&value, a.out.as_deref(), &mut outcome)?;
    outcome.failed = !all_pass;
    Ok(outcome)
}
