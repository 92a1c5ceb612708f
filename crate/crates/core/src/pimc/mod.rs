//! Path-integral Monte Carlo for the two-electron exchange coupling.
//!
//! World-lines are discretised into `n_slices` imaginary-time slices of
//! length τ with the primitive action
//! `S/ħ = Σ m|Δr|²/(2τħ) + (τ/ħ) Σ V`. The exchange coupling follows from
//! the action difference between the exchanged and identity boundary
//! conditions, `J = (2ħ/β_T)·e^{−ΔS/ħ}`, with ΔS obtained by Bennett
//! acceptance ratio along a chain of intermediate closing conditions.

mod checkpoint;
mod exchange;
pub mod oracle;
mod sampler;
mod system;

pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint, CHECKPOINT_SCHEMA};
pub use exchange::{
    bar_free_energy, estimate_exchange, estimate_exchange_for, exchange_vs_surface,
    ExchangeEstimate, ExchangeOptions, SurfaceExchange, SurfaceExchangeTable,
};
pub use sampler::{
    action, sample, sample_system, system_action, Acceptance, Chain, MoveCounter, MoveMix,
    PathEnsemble, SampleStats, Sector,
};
pub use system::{
    interface_step, spring_for, DeviceSystem, DoubleWell1D, HarmonicWell, PathSystem, SoftCoulomb,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{CHAIN_BARRIER, EPS_SI, HBAR, M_LONGITUDINAL, M_TRANSVERSE, PIMC_STEP};

/// Positions closer than this count as coincident, nm.
pub const COINCIDENCE_RADIUS: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PimcConfig {
    pub n_slices: usize,
    /// Imaginary-time step, ps.
    pub tau: f64,
    /// Effective masses (x, y, z) in units of mₑ.
    pub masses: [f64; 3],
    pub eps_r: f64,
    /// Interface step height, meV.
    pub v_step: f64,
    /// Soft-core radius of the Coulomb interaction, nm.
    pub core_radius: f64,
    pub seed: u64,
    pub moves: MoveMix,
    pub n_sweeps: usize,
    pub burn_in: usize,
    pub staging_len: usize,
    pub n_blocks: usize,
    /// Starting depth of the beads below the interface, nm.
    pub start_depth: f64,
}

impl Default for PimcConfig {
    fn default() -> Self {
        Self::at_temperature(DEFAULT_KT, 256)
    }
}

/// k_B·T of the default configuration, meV: a tenth of the orbital spacing
/// of a c = 0.3 meV/nm² dot.
pub const DEFAULT_KT: f64 = 1.55;

impl PimcConfig {
    /// Configuration with `β_T = ħ/(k_B T)` split over `n_slices`.
    pub fn at_temperature(kt_mev: f64, n_slices: usize) -> Self {
        Self {
            n_slices,
            tau: HBAR / kt_mev / n_slices as f64,
            masses: [M_TRANSVERSE, M_TRANSVERSE, M_LONGITUDINAL],
            eps_r: EPS_SI,
            v_step: PIMC_STEP,
            core_radius: 0.1,
            seed: 0,
            moves: MoveMix::default(),
            n_sweeps: 4000,
            burn_in: 400,
            staging_len: 16,
            n_blocks: 8,
            start_depth: 1.0,
        }
    }

    /// Inverse temperature in time units, ps.
    pub fn beta_t(&self) -> f64 {
        self.n_slices as f64 * self.tau
    }

    /// Inverse temperature in energy units, 1/meV.
    pub fn beta(&self) -> f64 {
        self.beta_t() / HBAR
    }

    /// Same β_T with twice the slices.
    pub fn trotter_halved(&self) -> Self {
        Self {
            n_slices: 2 * self.n_slices,
            tau: 0.5 * self.tau,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_slices < 64 {
            return Err(Error::param("n_slices", "must be at least 64"));
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(Error::param("tau", "must be positive"));
        }
        if self.masses.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
            return Err(Error::param("masses", "must be positive"));
        }
        for (name, v) in [
            ("eps_r", self.eps_r),
            ("v_step", self.v_step),
            ("core_radius", self.core_radius),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, "must be positive"));
            }
        }
        if self.v_step > 2.0 * CHAIN_BARRIER {
            return Err(Error::param("v_step", "implausibly large interface step"));
        }
        if self.staging_len < 2 || self.staging_len >= self.n_slices {
            return Err(Error::param("staging_len", "must lie in [2, n_slices)"));
        }
        if self.n_sweeps < self.n_blocks.max(2) {
            return Err(Error::param("n_sweeps", "fewer sweeps than blocks"));
        }
        if self.n_blocks < 2 {
            return Err(Error::param("n_blocks", "need at least two blocks"));
        }
        // Cap on the time step for the primitive approximation.
        if self.tau / HBAR > MAX_TAU_E {
            return Err(Error::param(
                "tau",
                "too large for the primitive approximation",
            ));
        }
        Ok(())
    }
}

/// Largest τ/ħ accepted, 1/meV.
pub const MAX_TAU_E: f64 = 0.05;
