use serde::{Deserialize, Serialize};

use crate::electrostatics::HarmonicDot;
use crate::error::{Error, Result};

/// Observables of one pipeline evaluation. `flagged` marks results near a
/// degeneracy, where derivatives are not trustworthy.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub values: Vec<f64>,
    pub flagged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteDiffDeltas {
    /// Field step, meV/nm.
    pub e_z: f64,
    /// Lateral step, nm.
    pub x: f64,
}

impl Default for FiniteDiffDeltas {
    fn default() -> Self {
        Self { e_z: 0.5, x: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamGradients {
    /// Derivative per (meV/nm).
    pub d_ez: f64,
    /// Derivative per nm of dot displacement along x.
    pub d_x: f64,
    pub unreliable: bool,
}

impl ParamGradients {
    pub fn new(d_ez: f64, d_x: f64) -> Self {
        Self {
            d_ez,
            d_x,
            unreliable: false,
        }
    }
}

/// Central differences of every observable with respect to the vertical
/// field and the x position of `dot`.
pub fn finite_diff_gradients<F>(
    pipeline: F,
    dot: &HarmonicDot,
    deltas: &FiniteDiffDeltas,
) -> Result<Vec<ParamGradients>>
where
    F: Fn(&HarmonicDot) -> Result<Observation>,
{
    if !(deltas.e_z > 0.0 && deltas.x > 0.0) {
        return Err(Error::param("deltas", "steps must be positive"));
    }
    if dot.e_z - deltas.e_z <= 0.0 {
        return Err(Error::param("deltas.e_z", "step exceeds the field"));
    }
    let shifted = |dez: f64, dx: f64| HarmonicDot {
        e_z: dot.e_z + dez,
        x_c: dot.x_c + dx,
        ..*dot
    };
    let centre = pipeline(dot)?;
    let ez_p = pipeline(&shifted(deltas.e_z, 0.0))?;
    let ez_m = pipeline(&shifted(-deltas.e_z, 0.0))?;
    let x_p = pipeline(&shifted(0.0, deltas.x))?;
    let x_m = pipeline(&shifted(0.0, -deltas.x))?;
    let n = centre.values.len();
    if [&ez_p, &ez_m, &x_p, &x_m]
        .iter()
        .any(|o| o.values.len() != n)
    {
        return Err(Error::Model(
            "pipeline returned inconsistent observable counts".into(),
        ));
    }
    let unreliable = [&centre, &ez_p, &ez_m, &x_p, &x_m]
        .iter()
        .any(|o| o.flagged);
    Ok((0..n)
        .map(|k| ParamGradients {
            d_ez: (ez_p.values[k] - ez_m.values[k]) / (2.0 * deltas.e_z),
            d_x: (x_p.values[k] - x_m.values[k]) / (2.0 * deltas.x),
            unreliable,
        })
        .collect())
}
