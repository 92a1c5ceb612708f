//! JSON inputs of the CLI. Physical fields carry their unit in the name.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use rough_dot::electrostatics::{GateResponse, HarmonicDot, MergeRule};
use rough_dot::surface::{io, RoughSurface};

use crate::error::CliError;

pub const DOUBLE_DOT_SCHEMA: &str = "rough-dot/double-dot-v1";
pub const RUN_SCHEMA: &str = "rough-dot/run-v1";
pub const FIELDS_SCHEMA: &str = "rough-dot/fields-v1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DotSpec {
    pub x_nm: f64,
    pub y_nm: f64,
    pub curvature_x_mev_nm2: f64,
    pub curvature_y_mev_nm2: f64,
    pub field_mev_nm: f64,
}

impl DotSpec {
    pub fn isotropic(x_nm: f64, curvature: f64, field: f64) -> Self {
        Self {
            x_nm,
            y_nm: 0.0,
            curvature_x_mev_nm2: curvature,
            curvature_y_mev_nm2: curvature,
            field_mev_nm: field,
        }
    }

    pub fn dot(&self) -> Result<HarmonicDot, CliError> {
        Ok(HarmonicDot::new(
            self.x_nm,
            self.y_nm,
            self.curvature_x_mev_nm2,
            self.curvature_y_mev_nm2,
            self.field_mev_nm,
        )?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MergeSpec {
    pub softness_mev: f64,
    pub barrier_mev: f64,
    pub barrier_slope_mev_per_v: f64,
    pub barrier_width_nm: f64,
}

impl From<MergeSpec> for MergeRule {
    fn from(m: MergeSpec) -> Self {
        MergeRule {
            softness_mev: m.softness_mev,
            barrier_mev: m.barrier_mev,
            barrier_slope_mev_per_v: m.barrier_slope_mev_per_v,
            barrier_width_nm: m.barrier_width_nm,
        }
    }
}

/// Two dots joined by a barrier gate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoubleDotSpec {
    pub schema: String,
    pub left: DotSpec,
    pub right: DotSpec,
    #[serde(default = "default_j_gate")]
    pub j_gate: String,
    #[serde(default)]
    pub merge_rule: Option<MergeSpec>,
    /// Gate response table, relative to this file.
    #[serde(default)]
    pub gate_response: Option<PathBuf>,
}

fn default_j_gate() -> String {
    "J1".to_string()
}

impl Default for DoubleDotSpec {
    fn default() -> Self {
        Self {
            schema: DOUBLE_DOT_SCHEMA.to_string(),
            left: DotSpec::isotropic(-25.0, 0.3, 28.0),
            right: DotSpec::isotropic(25.0, 0.3, 28.0),
            j_gate: default_j_gate(),
            merge_rule: None,
            gate_response: None,
        }
    }
}

impl DoubleDotSpec {
    pub fn merge_rule(&self) -> MergeRule {
        self.merge_rule
            .clone()
            .map(MergeRule::from)
            .unwrap_or_default()
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path, what: &str) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::param(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::param(format!("{what} {}: {e}", path.display())))
}

pub fn read_double_dot(path: &Path) -> Result<(DoubleDotSpec, Option<PathBuf>), CliError> {
    let spec: DoubleDotSpec = read_json(path, "double-dot file")?;
    if spec.schema != DOUBLE_DOT_SCHEMA {
        return Err(CliError::param(format!(
            "schema: expected `{DOUBLE_DOT_SCHEMA}`, found `{}`",
            spec.schema
        )));
    }
    let table = spec
        .gate_response
        .as_ref()
        .map(|p| path.parent().unwrap_or(Path::new(".")).join(p));
    Ok((spec, table))
}

pub fn read_response(path: Option<&Path>) -> Result<GateResponse, CliError> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::param(format!("{}: {e}", p.display())))?;
            Ok(GateResponse::from_json(&text)?)
        }
        None => Ok(GateResponse::default()),
    }
}

pub fn is_csv(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

pub fn read_surface(path: &Path) -> Result<RoughSurface, CliError> {
    let s = if is_csv(path) {
        io::read_surface_csv(path)?
    } else {
        io::read_surface(path)?
    };
    Ok(s)
}

/// Surface source of a run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SurfaceSource {
    Generate {
        hurst: f64,
        c0_nm3: f64,
        extent_nm: f64,
        dx_nm: f64,
        #[serde(default)]
        lambda_min_nm: Option<f64>,
        #[serde(default)]
        lambda_max_nm: Option<f64>,
    },
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub rows: usize,
    pub cols: usize,
    pub pitch_nm: f64,
    pub curvature_x_mev_nm2: f64,
    pub curvature_y_mev_nm2: f64,
    pub field_mev_nm: f64,
    /// Grid center, nm; the surface center when absent.
    #[serde(default)]
    pub center_nm: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExchangeSpec {
    /// Exchange of each pair, μeV.
    pub j_uev: Vec<f64>,
    pub dlog10j_dv_per_v: f64,
    /// Interdot distances, nm, for the J-distance plot.
    #[serde(default)]
    pub distances_nm: Vec<f64>,
}

fn default_gate() -> String {
    "P1".to_string()
}

fn yes() -> bool {
    true
}

fn default_beta_slope() -> f64 {
    1e-4
}

fn default_step() -> f64 {
    0.5
}

/// Configuration of `rough-dot report`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: String,
    pub seed: u64,
    pub surface: SurfaceSource,
    pub dots: GridSpec,
    /// Gate used as lever arm for the VOD conversion.
    #[serde(default = "default_gate")]
    pub tuning_gate: String,
    #[serde(default)]
    pub gate_response: Option<PathBuf>,
    #[serde(default = "yes")]
    pub gradients: bool,
    #[serde(default = "default_step")]
    pub fd_field_step_mev_nm: f64,
    #[serde(default = "default_step")]
    pub fd_position_step_nm: f64,
    /// dβ_max/dE_z per (meV/nm).
    #[serde(default = "default_beta_slope")]
    pub beta_max_slope_per_mev_nm: f64,
    #[serde(default)]
    pub exchange: Option<ExchangeSpec>,
    #[serde(default = "yes")]
    pub plots: bool,
}

impl RunConfig {
    /// The default pipeline: 500 nm monolayer-grid surface and a 7×7 grid.
    pub fn default_pipeline(seed: u64) -> Self {
        Self {
            schema: RUN_SCHEMA.to_string(),
            seed,
            surface: SurfaceSource::Generate {
                hurst: 0.28,
                c0_nm3: 1.4,
                extent_nm: 500.0,
                dx_nm: 0.13575,
                lambda_min_nm: None,
                lambda_max_nm: None,
            },
            dots: GridSpec {
                rows: 7,
                cols: 7,
                pitch_nm: 50.0,
                curvature_x_mev_nm2: 0.3,
                curvature_y_mev_nm2: 0.3,
                field_mev_nm: 28.0,
                center_nm: None,
            },
            tuning_gate: default_gate(),
            gate_response: None,
            gradients: true,
            fd_field_step_mev_nm: 0.5,
            fd_position_step_nm: 0.5,
            beta_max_slope_per_mev_nm: 1e-4,
            exchange: None,
            plots: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldsSpec {
    #[serde(default)]
    pub schema: Option<String>,
    /// Applied fields, T.
    pub applied_t: [[f64; 3]; 3],
    /// Effective Zeeman fields g·B, T.
    pub effective_t: [[f64; 3]; 3],
}
