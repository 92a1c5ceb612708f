//! Confinement potentials: the single-dot harmonic model, linear gate
//! response, the merged double-dot potential and imported potential grids.

mod double_dot;
mod gates;
mod grid;

pub use double_dot::{build_double_dot, eval_double_dot, DoubleDotPotential, MergeRule};
pub use gates::{apply_gate, GateResponse, GateSlope, GATE_SCHEMA};
pub use grid::{fit_harmonic, FitWindow, HarmonicFit, PotentialGrid};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// `V = c_x (x−x_c)² + c_y (y−y_c)² + E_z z`, with z the depth into silicon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonicDot {
    /// Center, nm.
    pub x_c: f64,
    pub y_c: f64,
    /// Lateral curvatures, meV/nm².
    pub c_x: f64,
    pub c_y: f64,
    /// Vertical field, meV/nm.
    pub e_z: f64,
}

impl HarmonicDot {
    pub fn new(x_c: f64, y_c: f64, c_x: f64, c_y: f64, e_z: f64) -> Result<Self> {
        let d = Self {
            x_c,
            y_c,
            c_x,
            c_y,
            e_z,
        };
        d.validate()?;
        Ok(d)
    }

    /// Isotropic dot with curvature `c` at `(x_c, y_c)`.
    pub fn isotropic(x_c: f64, y_c: f64, c: f64, e_z: f64) -> Result<Self> {
        Self::new(x_c, y_c, c, c, e_z)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.x_c, self.y_c, self.c_x, self.c_y, self.e_z];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("dot", "non-finite parameter"));
        }
        if self.c_x <= 0.0 || self.c_y <= 0.0 {
            return Err(Error::param("dot.c", "curvatures must be positive"));
        }
        if self.e_z <= 0.0 {
            return Err(Error::param("dot.e_z", "vertical field must be positive"));
        }
        Ok(())
    }

    /// Lateral part only.
    pub fn lateral(&self, x: f64, y: f64) -> f64 {
        self.c_x * (x - self.x_c).powi(2) + self.c_y * (y - self.y_c).powi(2)
    }

    /// Harmonic length `(ħ²/(2 m c))^{1/4}` along x for transverse mass `m`.
    pub fn length_x(&self, mass_ratio: f64) -> f64 {
        (crate::units::kinetic_prefactor(mass_ratio) / self.c_x).powf(0.25)
    }

    pub fn length_y(&self, mass_ratio: f64) -> f64 {
        (crate::units::kinetic_prefactor(mass_ratio) / self.c_y).powf(0.25)
    }

    /// Orbital spacing ħω along x, meV.
    pub fn orbital_energy_x(&self, mass_ratio: f64) -> f64 {
        2.0 * (crate::units::kinetic_prefactor(mass_ratio) * self.c_x).sqrt()
    }
}

/// Evaluates the harmonic-plus-field model exactly.
pub fn eval_harmonic(dot: &HarmonicDot, x: f64, y: f64, z: f64) -> f64 {
    dot.lateral(x, y) + z * dot.e_z
}
