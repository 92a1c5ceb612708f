use serde::{Deserialize, Serialize};

use super::gradients::ParamGradients;
use crate::electrostatics::GateResponse;
use crate::error::{Error, Result};
use crate::stats::{mean, std_dev};

/// Gate lever arm used to convert parameter spread into volts.
#[derive(Debug, Clone, Copy)]
pub enum TunabilityInput<'a> {
    Scalar(f64),
    PerDot(&'a [f64]),
}

/// Voltage-offset deviation `std((x − ⟨x⟩)/(dx/dV))`, volts.
pub fn vod(values: &[f64], tunability: TunabilityInput<'_>) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::param("values", "empty"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::param("values", "non-finite entry"));
    }
    let m = mean(values);
    let offsets: Vec<f64> = match tunability {
        TunabilityInput::Scalar(t) => {
            if t == 0.0 || !t.is_finite() {
                return Err(Error::ZeroTunability(0));
            }
            values.iter().map(|v| (v - m) / t).collect()
        }
        TunabilityInput::PerDot(ts) => {
            if ts.len() != values.len() {
                return Err(Error::param("tunability", "length differs from values"));
            }
            let mut out = Vec::with_capacity(values.len());
            for (i, (v, t)) in values.iter().zip(ts).enumerate() {
                if *t == 0.0 || !t.is_finite() {
                    return Err(Error::ZeroTunability(i));
                }
                out.push((v - m) / t);
            }
            out
        }
    };
    Ok(std_dev(&offsets))
}

/// Exchange VOD from per-dot J and a common `d log₁₀J/dV`; each dot's lever
/// arm is `dJ/dV = J·ln10·(d log₁₀J/dV)`.
pub fn exchange_vod(j_values: &[f64], dlog10j_dv: f64) -> Result<f64> {
    if j_values.iter().any(|j| !(*j > 0.0)) {
        return Err(Error::param("j_values", "exchange must be positive"));
    }
    let t: Vec<f64> = j_values
        .iter()
        .map(|j| j * std::f64::consts::LN_10 * dlog10j_dv)
        .collect();
    vod(j_values, TunabilityInput::PerDot(&t))
}

/// Chain-rule tunability of one parameter with respect to one gate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tunability {
    pub gate: String,
    pub d_dez: f64,
    pub d_dx: f64,
    pub dez_dv: f64,
    pub dx_dv: f64,
    /// Field (top-gate) part `(dσ/dE_z)(dE_z/dV)`.
    pub top: f64,
    /// Lateral part `(dσ/dx)(dx/dV)`.
    pub lateral: f64,
    pub combined: f64,
}

pub fn tunability_chain(
    gradients: &ParamGradients,
    response: &GateResponse,
    gate: &str,
    dot_index: usize,
) -> Result<Tunability> {
    if !gradients.d_ez.is_finite() {
        return Err(Error::param("gradients.d_ez", "missing field gradient"));
    }
    if !gradients.d_x.is_finite() {
        return Err(Error::param("gradients.d_x", "missing position gradient"));
    }
    let s = response.slope(gate, dot_index)?;
    let top = gradients.d_ez * s.dez_dv;
    let lateral = gradients.d_x * s.dx_dv;
    Ok(Tunability {
        gate: gate.to_string(),
        d_dez: gradients.d_ez,
        d_dx: gradients.d_x,
        dez_dv: s.dez_dv,
        dx_dv: s.dx_dv,
        top,
        lateral,
        combined: top + lateral,
    })
}
