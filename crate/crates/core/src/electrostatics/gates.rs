use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::HarmonicDot;
use crate::{Error, Result};

pub const GATE_SCHEMA: &str = "rough-dot/gate-response-v1";

/// First-order response of one dot to one gate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateSlope {
    /// Lateral shift of the dot center, nm/V.
    pub dx_dv: f64,
    /// Change of vertical field, meV·nm⁻¹·V⁻¹.
    pub dez_dv: f64,
}

/// Linear gate-response table keyed by gate name and 1-based dot index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateResponse {
    pub schema: String,
    pub gates: BTreeMap<String, BTreeMap<usize, GateSlope>>,
}

impl Default for GateResponse {
    /// Two-dot table for gates P1, P2, J1, P3, J2.
    fn default() -> Self {
        let rows: [(&str, [f64; 4]); 5] = [
            ("P1", [-6.74, 13.42, -2.95, -2.11]),
            ("P2", [4.95, -0.68, 5.5, 14.75]),
            ("J1", [6.88, 0.46, -3.57, -0.22]),
            ("P3", [0.04, -0.02, 0.13, 0.06]),
            ("J2", [0.02, -0.01, 0.13, 0.06]),
        ];
        let mut gates = BTreeMap::new();
        for (name, v) in rows {
            let mut per_dot = BTreeMap::new();
            per_dot.insert(
                1,
                GateSlope {
                    dx_dv: v[0],
                    dez_dv: v[1],
                },
            );
            per_dot.insert(
                2,
                GateSlope {
                    dx_dv: v[2],
                    dez_dv: v[3],
                },
            );
            gates.insert(name.to_string(), per_dot);
        }
        Self {
            schema: GATE_SCHEMA.to_string(),
            gates,
        }
    }
}

impl GateResponse {
    pub fn empty() -> Self {
        Self {
            schema: GATE_SCHEMA.to_string(),
            gates: BTreeMap::new(),
        }
    }

    pub fn with(mut self, gate: &str, dot: usize, slope: GateSlope) -> Self {
        self.gates
            .entry(gate.to_string())
            .or_default()
            .insert(dot, slope);
        self
    }

    /// A barrier gate pulling two dots together symmetrically at
    /// `rate_nm_per_v` each.
    pub fn symmetric_barrier(gate: &str, rate_nm_per_v: f64) -> Self {
        Self::empty()
            .with(
                gate,
                1,
                GateSlope {
                    dx_dv: rate_nm_per_v,
                    dez_dv: 0.0,
                },
            )
            .with(
                gate,
                2,
                GateSlope {
                    dx_dv: -rate_nm_per_v,
                    dez_dv: 0.0,
                },
            )
    }

    pub fn slope(&self, gate: &str, dot: usize) -> Result<GateSlope> {
        let per_dot = self
            .gates
            .get(gate)
            .ok_or_else(|| Error::param("gate", format!("unknown gate `{gate}`")))?;
        per_dot
            .get(&dot)
            .copied()
            .ok_or_else(|| Error::param("dot", format!("gate `{gate}` has no entry for dot {dot}")))
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != GATE_SCHEMA {
            return Err(Error::Format(format!(
                "unsupported gate schema `{}`",
                self.schema
            )));
        }
        for (g, per_dot) in &self.gates {
            for (d, s) in per_dot {
                if !(s.dx_dv.is_finite() && s.dez_dv.is_finite()) {
                    return Err(Error::param(
                        "gates",
                        format!("non-finite slope for {g}/{d}"),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: Self = serde_json::from_str(text)?;
        r.validate()?;
        Ok(r)
    }
}

/// Shift `dot` by the response of `gate` acting on dot number `dot_index`.
pub fn apply_gate(
    dot: &HarmonicDot,
    response: &GateResponse,
    gate: &str,
    dot_index: usize,
    dv: f64,
) -> Result<HarmonicDot> {
    let s = response.slope(gate, dot_index)?;
    Ok(HarmonicDot {
        x_c: dot.x_c + s.dx_dv * dv,
        e_z: dot.e_z + s.dez_dv * dv,
        ..*dot
    })
}
