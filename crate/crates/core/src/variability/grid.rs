use std::collections::HashMap;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gradients::{finite_diff_gradients, FiniteDiffDeltas, Observation, ParamGradients};
use super::vod::tunability_chain;
use crate::electrostatics::{apply_gate, GateResponse, HarmonicDot};
use crate::error::{Error, Result};
use crate::spinorbit::{dresselhaus_from_fraction, sublattice_fraction, BetaMaxModel};
use crate::surface::RoughSurface;
use crate::units::G0;
use crate::valleymodel::{
    build_chain_with, chain_valley_splitting, dot_valley_observables, solve_envelope, ChainParams,
    ChainValley, EnvelopeOptions,
};

/// Gate voltage applied to one dot of the grid before solving.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateOffset {
    pub dot: usize,
    pub gate: String,
    pub volts: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DotGridSpec {
    pub rows: usize,
    pub cols: usize,
    /// Dot spacing, nm.
    pub pitch: f64,
    /// Curvatures and field of every dot; its center is ignored.
    pub base: HarmonicDot,
    /// Grid center, nm; the surface center when absent.
    #[serde(default)]
    pub center: Option<(f64, f64)>,
    #[serde(default)]
    pub offsets: Vec<GateOffset>,
}

impl DotGridSpec {
    pub fn square(n: usize, pitch: f64, base: HarmonicDot) -> Self {
        Self {
            rows: n,
            cols: n,
            pitch,
            base,
            center: None,
            offsets: Vec::new(),
        }
    }

    /// Nominal dots in row-major order, with gate offsets applied.
    pub fn dots(
        &self,
        surface: &RoughSurface,
        response: &GateResponse,
    ) -> Result<Vec<HarmonicDot>> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::param("grid", "rows and cols must be positive"));
        }
        if !(self.pitch > 0.0) {
            return Err(Error::param("grid.pitch", "must be positive"));
        }
        self.base.validate()?;
        let (x0, y0) = surface.origin();
        let (ex, ey) = surface.extent();
        let (cx, cy) = self.center.unwrap_or((x0 + 0.5 * ex, y0 + 0.5 * ey));
        let mut dots = Vec::with_capacity(self.rows * self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                dots.push(HarmonicDot {
                    x_c: cx + (c as f64 - 0.5 * (self.cols - 1) as f64) * self.pitch,
                    y_c: cy + (r as f64 - 0.5 * (self.rows - 1) as f64) * self.pitch,
                    ..self.base
                });
            }
        }
        for off in &self.offsets {
            let d = dots
                .get_mut(off.dot)
                .ok_or_else(|| Error::param("grid.offsets", format!("no dot {}", off.dot)))?;
            *d = apply_gate(d, response, &off.gate, 1, off.volts)?;
        }
        Ok(dots)
    }

    /// Checks that every dot keeps a four-length margin inside the surface.
    pub fn check_fits(
        &self,
        surface: &RoughSurface,
        response: &GateResponse,
        mass_ratio: f64,
    ) -> Result<()> {
        for (i, d) in self.dots(surface, response)?.iter().enumerate() {
            let mx = 4.0 * d.length_x(mass_ratio);
            let my = 4.0 * d.length_y(mass_ratio);
            let inside = surface.contains(d.x_c - mx, d.y_c - my)
                && surface.contains(d.x_c + mx, d.y_c + my);
            if !inside {
                return Err(Error::Geometry(format!(
                    "dot {i} at ({:.1}, {:.1}) nm lacks a 4-length margin inside the surface",
                    d.x_c, d.y_c
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridOptions {
    pub envelope: EnvelopeOptions,
    pub chain: ChainParams,
    pub chain_sites: usize,
    pub beta_max: BetaMaxModel,
    pub response: GateResponse,
    /// Gate whose lever arm converts spreads into volts.
    pub tuning_gate: String,
    /// Finite-difference steps; gradients are skipped when absent.
    pub gradients: Option<FiniteDiffDeltas>,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self {
            envelope: EnvelopeOptions::default(),
            chain: ChainParams::default(),
            chain_sites: 300,
            beta_max: BetaMaxModel::default(),
            response: GateResponse::default(),
            tuning_gate: "P1".to_string(),
            gradients: Some(FiniteDiffDeltas::default()),
        }
    }
}

/// Per-dot results. Failed dots keep their nominal position and carry the
/// error text; their numeric fields are NaN.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DotObservables {
    pub id: usize,
    pub row: usize,
    pub col: usize,
    pub x_nominal: f64,
    pub y_nominal: f64,
    pub center_x: f64,
    pub center_y: f64,
    pub displacement_x: f64,
    pub displacement_y: f64,
    pub displacement: f64,
    pub spread_x: f64,
    pub spread_y: f64,
    pub energy: f64,
    pub e_z: f64,
    pub splitting: f64,
    pub phase: Option<f64>,
    pub delta_re: f64,
    pub delta_im: f64,
    pub suppression: f64,
    pub degenerate: bool,
    pub p_a: f64,
    pub beta_max: f64,
    pub beta: f64,
    /// g along [110] with the Rashba offset set to zero.
    pub g_110: f64,
    pub confinement_warning: bool,
    pub dvs_dez: Option<f64>,
    pub dvs_dx: Option<f64>,
    pub dbeta_dez: Option<f64>,
    pub dbeta_dx: Option<f64>,
    /// Chain-rule tunabilities with respect to the tuning gate.
    pub dvs_dv: Option<f64>,
    pub dbeta_dv: Option<f64>,
    pub gradient_unreliable: bool,
    pub error: Option<String>,
}

impl DotObservables {
    fn failed(id: usize, row: usize, col: usize, dot: &HarmonicDot, err: &Error) -> Self {
        let nan = f64::NAN;
        Self {
            id,
            row,
            col,
            x_nominal: dot.x_c,
            y_nominal: dot.y_c,
            center_x: nan,
            center_y: nan,
            displacement_x: nan,
            displacement_y: nan,
            displacement: nan,
            spread_x: nan,
            spread_y: nan,
            energy: nan,
            e_z: dot.e_z,
            splitting: nan,
            phase: None,
            delta_re: nan,
            delta_im: nan,
            suppression: nan,
            degenerate: false,
            p_a: nan,
            beta_max: nan,
            beta: nan,
            g_110: nan,
            confinement_warning: false,
            dvs_dez: None,
            dvs_dx: None,
            dbeta_dez: None,
            dbeta_dx: None,
            dvs_dv: None,
            dbeta_dv: None,
            gradient_unreliable: false,
            error: Some(err.to_string()),
        }
    }

    pub fn ok(&self) -> bool {
        self.error.is_none()
    }
}

/// Chain solutions shared by all dots, keyed by field.
struct ChainCache {
    params: ChainParams,
    sites: usize,
    map: Mutex<HashMap<u64, ChainValley>>,
}

impl ChainCache {
    fn get(&self, e_z: f64) -> Result<ChainValley> {
        let key = e_z.to_bits();
        if let Some(v) = self.map.lock().unwrap().get(&key) {
            return Ok(*v);
        }
        let chain = build_chain_with(e_z, 0.0, self.sites, self.params)?;
        let v = chain_valley_splitting(&chain)?;
        self.map.lock().unwrap().insert(key, v);
        Ok(v)
    }
}

fn evaluate(
    dot: &HarmonicDot,
    surface: &RoughSurface,
    opts: &GridOptions,
    chains: &ChainCache,
) -> Result<DotObservables> {
    let env = solve_envelope(dot, surface, &opts.envelope)?;
    let chain = chains.get(dot.e_z)?;
    let valley = dot_valley_observables(&env, surface, &chain);
    let p = sublattice_fraction(&env, surface);
    let beta_max = opts.beta_max.at(dot.e_z);
    let beta = dresselhaus_from_fraction(p, beta_max)?;
    let (dx, dy) = (env.center.0 - dot.x_c, env.center.1 - dot.y_c);
    Ok(DotObservables {
        id: 0,
        row: 0,
        col: 0,
        x_nominal: dot.x_c,
        y_nominal: dot.y_c,
        center_x: env.center.0,
        center_y: env.center.1,
        displacement_x: dx,
        displacement_y: dy,
        displacement: dx.hypot(dy),
        spread_x: env.spread.0,
        spread_y: env.spread.1,
        energy: env.energy,
        e_z: dot.e_z,
        splitting: valley.splitting,
        phase: valley.phase,
        delta_re: valley.delta_re,
        delta_im: valley.delta_im,
        suppression: valley.suppression,
        degenerate: valley.degenerate,
        p_a: p.p_a,
        beta_max,
        beta,
        g_110: G0 + beta,
        confinement_warning: env.confinement_warning,
        dvs_dez: None,
        dvs_dx: None,
        dbeta_dez: None,
        dbeta_dx: None,
        dvs_dv: None,
        dbeta_dv: None,
        gradient_unreliable: false,
        error: None,
    })
}

fn evaluate_with_gradients(
    dot: &HarmonicDot,
    surface: &RoughSurface,
    opts: &GridOptions,
    chains: &ChainCache,
) -> Result<DotObservables> {
    let mut obs = evaluate(dot, surface, opts, chains)?;
    if let Some(deltas) = &opts.gradients {
        let pipeline = |d: &HarmonicDot| -> Result<Observation> {
            let o = evaluate(d, surface, opts, chains)?;
            Ok(Observation {
                values: vec![o.splitting, o.beta],
                flagged: o.degenerate,
            })
        };
        let g = finite_diff_gradients(pipeline, dot, deltas)?;
        let (vs, beta): (ParamGradients, ParamGradients) = (g[0], g[1]);
        obs.dvs_dez = Some(vs.d_ez);
        obs.dvs_dx = Some(vs.d_x);
        obs.dbeta_dez = Some(beta.d_ez);
        obs.dbeta_dx = Some(beta.d_x);
        obs.dvs_dv = Some(tunability_chain(&vs, &opts.response, &opts.tuning_gate, 1)?.combined);
        obs.dbeta_dv =
            Some(tunability_chain(&beta, &opts.response, &opts.tuning_gate, 1)?.combined);
        obs.gradient_unreliable = vs.unreliable;
    }
    Ok(obs)
}

/// Runs the per-dot pipeline over the grid in parallel. Rows come back in
/// row-major dot order; per-dot failures become flagged rows.
pub fn run_grid(
    spec: &DotGridSpec,
    surface: &RoughSurface,
    opts: &GridOptions,
) -> Result<Vec<DotObservables>> {
    spec.check_fits(surface, &opts.response, opts.envelope.mass_ratio)?;
    let dots = spec.dots(surface, &opts.response)?;
    let chains = ChainCache {
        params: opts.chain,
        sites: opts.chain_sites,
        map: Mutex::new(HashMap::new()),
    };
    // Solve the shared chains up front so a broken chain fails the run.
    chains.get(spec.base.e_z)?;
    let rows = dots
        .par_iter()
        .enumerate()
        .map(|(id, dot)| {
            let (row, col) = (id / spec.cols, id % spec.cols);
            match evaluate_with_gradients(dot, surface, opts, &chains) {
                Ok(mut obs) => {
                    obs.id = id;
                    obs.row = row;
                    obs.col = col;
                    obs
                }
                Err(e) => {
                    log::warn!("dot {id} failed: {e}");
                    DotObservables::failed(id, row, col, dot, &e)
                }
            }
        })
        .collect();
    Ok(rows)
}
