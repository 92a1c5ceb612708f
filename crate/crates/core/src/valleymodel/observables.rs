use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::chain::ChainValley;
use super::envelope::Envelope2D;
use super::DEGENERACY_FLOOR;
use crate::surface::RoughSurface;
use crate::units::K0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValleyResult {
    /// 2|Δ_dot|, meV.
    pub splitting: f64,
    /// arg Δ_dot in (−π, π]; `None` when degenerate.
    pub phase: Option<f64>,
    pub delta_re: f64,
    pub delta_im: f64,
    /// |Σ|ψ|² e^{−2ik₀z_s}|, the interference suppression factor.
    pub suppression: f64,
    pub e_z: f64,
    pub degenerate: bool,
}

impl ValleyResult {
    pub fn delta(&self) -> Complex64 {
        Complex64::new(self.delta_re, self.delta_im)
    }
}

/// Δ_dot = Δ₁D · Σ |ψ(x, y)|² e^{−2ik₀ z_s(x, y)} over the surface nodes
/// under the envelope.
pub fn dot_valley_observables(
    env: &Envelope2D,
    surface: &RoughSurface,
    chain: &ChainValley,
) -> ValleyResult {
    let mut avg = Complex64::new(0.0, 0.0);
    for (i, j, w) in env.surface_weights(surface) {
        avg += Complex64::from_polar(w, -2.0 * K0 * surface.at(i, j));
    }
    let delta = chain.delta() * avg;
    let splitting = 2.0 * delta.norm();
    let degenerate = chain.degenerate || splitting < DEGENERACY_FLOOR;
    ValleyResult {
        splitting,
        phase: if degenerate {
            None
        } else {
            Some(crate::stats::wrap_phase(delta.arg()))
        },
        delta_re: delta.re,
        delta_im: delta.im,
        suppression: avg.norm(),
        e_z: chain.e_z,
        degenerate,
    }
}
