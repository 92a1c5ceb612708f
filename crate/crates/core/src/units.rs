//! Physical constants in project units: nm, meV, V, T, ps.

/// Reduced Planck constant, meV·ps.
pub const HBAR: f64 = 0.658_211_9;

/// Free electron mass, meV·ps²/nm².
pub const ELECTRON_MASS: f64 = 9.109_383_7e-31 / 1.602_176_634e-28;

/// ħ²/(2 mₑ), meV·nm².
pub const HBAR2_OVER_2ME: f64 = HBAR * HBAR / (2.0 * ELECTRON_MASS);

/// e²/(4πε₀), meV·nm.
pub const COULOMB_VACUUM: f64 = 1_439.964_5;

/// Relative permittivity of silicon.
pub const EPS_SI: f64 = 11.7;

/// Silicon lattice constant, nm.
pub const A0: f64 = 0.543;

/// One atomic monolayer along [001], nm.
pub const MONOLAYER: f64 = A0 / 4.0;

/// Valley wavevector magnitude, nm⁻¹.
pub const K0: f64 = 0.82 * 2.0 * std::f64::consts::PI / A0;

/// Transverse and longitudinal effective masses in units of mₑ.
pub const M_TRANSVERSE: f64 = 0.19;
pub const M_LONGITUDINAL: f64 = 0.98;

/// Bulk electron g-factor reference.
pub const G0: f64 = 1.9935;

/// Bohr magneton over Planck constant, GHz/T.
pub const MU_B_OVER_H_GHZ: f64 = 13.996_245;

/// Oxide conduction-band offset used by the valley chain, meV.
pub const CHAIN_BARRIER: f64 = 3150.0;

/// Oxide step height used by the path-integral action, meV.
pub const PIMC_STEP: f64 = 3100.0;

/// ħ²/(2m) for a mass given in units of mₑ.
pub fn kinetic_prefactor(mass_ratio: f64) -> f64 {
    HBAR2_OVER_2ME / mass_ratio
}
