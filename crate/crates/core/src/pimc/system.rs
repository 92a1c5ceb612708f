use crate::electrostatics::DoubleDotPotential;
use crate::surface::RoughSurface;
use crate::units::{COULOMB_VACUUM, MONOLAYER};

/// Particles, masses and potentials sampled by the path-integral engine.
///
/// Positions are in nm, energies in meV. `external` may return
/// `f64::INFINITY` for forbidden positions; moves there are rejected.
pub trait PathSystem<const D: usize>: Sync {
    /// Effective masses per axis in units of mₑ.
    fn masses(&self) -> [f64; D];
    fn n_particles(&self) -> usize;
    fn external(&self, r: &[f64; D]) -> f64;
    fn pair(&self, _r1: &[f64; D], _r2: &[f64; D]) -> f64 {
        0.0
    }
    /// Starting bead position of each particle.
    fn initial_positions(&self) -> Vec<[f64; D]>;

    fn external_gradient(&self, r: &[f64; D]) -> [f64; D] {
        numeric_gradient(|p| self.external(p), r)
    }

    /// Gradient of the pair energy with respect to the first argument.
    fn pair_gradient(&self, r1: &[f64; D], r2: &[f64; D]) -> [f64; D] {
        numeric_gradient(|p| self.pair(p, r2), r1)
    }
}

fn numeric_gradient<const D: usize>(f: impl Fn(&[f64; D]) -> f64, r: &[f64; D]) -> [f64; D] {
    let h = 1e-5;
    let mut g = [0.0; D];
    for a in 0..D {
        let mut p = *r;
        let mut m = *r;
        p[a] += h;
        m[a] -= h;
        g[a] = (f(&p) - f(&m)) / (2.0 * h);
    }
    g
}

/// Soft-core Coulomb `k/√(r² + r_c²)` with `k = e²/(4πε₀ε_r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoftCoulomb {
    pub strength: f64,
    pub core: f64,
}

impl SoftCoulomb {
    pub fn silicon(core: f64, eps_r: f64) -> Self {
        Self {
            strength: COULOMB_VACUUM / eps_r,
            core,
        }
    }

    pub fn energy(&self, r2: f64) -> f64 {
        self.strength / (r2 + self.core * self.core).sqrt()
    }
}

/// Smooth interface step `1/(1 + e^{−4u/a₀})`, with u the depth below the
/// interface measured into the oxide (`u = z_s − z`).
pub fn interface_step(u: f64) -> f64 {
    let a0 = 4.0 * MONOLAYER;
    1.0 / (1.0 + (-4.0 * u / a0).exp())
}

/// Two electrons in the merged double dot under a rough interface.
///
/// `V(r) = V_DQD(x, y, z) + V_step·step(z_s(x, y) − z)`; z is the depth into
/// silicon so the oxide lies at `z < z_s`.
pub struct DeviceSystem<'a> {
    pub pot: &'a DoubleDotPotential,
    pub surface: &'a RoughSurface,
    pub masses: [f64; 3],
    pub v_step: f64,
    pub coulomb: SoftCoulomb,
    /// Initial depth of the electrons below the local interface, nm.
    pub start_depth: f64,
}

impl DeviceSystem<'_> {
    pub fn interface_energy(&self, r: &[f64; 3]) -> Option<f64> {
        if !self.surface.contains(r[0], r[1]) {
            return None;
        }
        let zs = self.surface.sample_unchecked(r[0], r[1]);
        Some(self.v_step * interface_step(zs - r[2]))
    }
}

impl PathSystem<3> for DeviceSystem<'_> {
    fn masses(&self) -> [f64; 3] {
        self.masses
    }
    fn n_particles(&self) -> usize {
        2
    }
    fn external(&self, r: &[f64; 3]) -> f64 {
        match self.interface_energy(r) {
            Some(step) => self.pot.eval(r[0], r[1], r[2]) + step,
            None => f64::INFINITY,
        }
    }
    fn pair(&self, r1: &[f64; 3], r2: &[f64; 3]) -> f64 {
        let d2 = (r1[0] - r2[0]).powi(2) + (r1[1] - r2[1]).powi(2) + (r1[2] - r2[2]).powi(2);
        self.coulomb.energy(d2)
    }
    fn initial_positions(&self) -> Vec<[f64; 3]> {
        [self.pot.left, self.pot.right]
            .iter()
            .map(|d| {
                let zs = self.surface.sample_unchecked(d.x_c, d.y_c);
                [d.x_c, d.y_c, zs + self.start_depth]
            })
            .collect()
    }
}

/// One particle in `½ Σ k_a x_a²` with masses per axis; test system.
pub struct HarmonicWell<const D: usize> {
    pub masses: [f64; D],
    /// Spring constants, meV/nm².
    pub springs: [f64; D],
}

impl<const D: usize> HarmonicWell<D> {
    /// Isotropic well with level spacing `hbar_omega` (meV) for mass `m`.
    pub fn isotropic(mass: f64, hbar_omega: f64) -> Self {
        let k = spring_for(mass, hbar_omega);
        Self {
            masses: [mass; D],
            springs: [k; D],
        }
    }

    /// ħω along each axis, meV.
    pub fn level_spacing(&self) -> [f64; D] {
        let mut w = [0.0; D];
        for a in 0..D {
            w[a] = 2.0
                * (crate::units::kinetic_prefactor(self.masses[a]) * 0.5 * self.springs[a]).sqrt();
        }
        w
    }
}

/// Spring constant k with ħ√(k/m) = ħω, meV/nm².
pub fn spring_for(mass: f64, hbar_omega: f64) -> f64 {
    // ħ²ω² = ħ² k / m  →  k = (ħω)² / (2 · ħ²/(2m)).
    hbar_omega * hbar_omega / (2.0 * crate::units::kinetic_prefactor(mass))
}

impl<const D: usize> PathSystem<D> for HarmonicWell<D> {
    fn masses(&self) -> [f64; D] {
        self.masses
    }
    fn n_particles(&self) -> usize {
        1
    }
    fn external(&self, r: &[f64; D]) -> f64 {
        (0..D).map(|a| 0.5 * self.springs[a] * r[a] * r[a]).sum()
    }
    fn external_gradient(&self, r: &[f64; D]) -> [f64; D] {
        let mut g = [0.0; D];
        for a in 0..D {
            g[a] = self.springs[a] * r[a];
        }
        g
    }
    fn initial_positions(&self) -> Vec<[f64; D]> {
        vec![[0.0; D]]
    }
}

/// Separable 1D test mode: two electrons in `c·min((x+d/2)², (x−d/2)²)`
/// with a softened 1D Coulomb `k/√(Δx² + w²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleWell1D {
    pub mass: f64,
    /// Curvature, meV/nm².
    pub curvature: f64,
    /// Well separation, nm.
    pub separation: f64,
    pub coulomb: SoftCoulomb,
}

impl DoubleWell1D {
    pub fn new(mass: f64, curvature: f64, separation: f64, coulomb_width: f64, eps_r: f64) -> Self {
        Self {
            mass,
            curvature,
            separation,
            coulomb: SoftCoulomb::silicon(coulomb_width, eps_r),
        }
    }

    pub fn well(&self, x: f64) -> f64 {
        let h = 0.5 * self.separation;
        self.curvature * (x + h).powi(2).min((x - h).powi(2))
    }

    pub fn interaction(&self, dx: f64) -> f64 {
        self.coulomb.energy(dx * dx)
    }
}

impl PathSystem<1> for DoubleWell1D {
    fn masses(&self) -> [f64; 1] {
        [self.mass]
    }
    fn n_particles(&self) -> usize {
        2
    }
    fn external(&self, r: &[f64; 1]) -> f64 {
        self.well(r[0])
    }
    fn pair(&self, r1: &[f64; 1], r2: &[f64; 1]) -> f64 {
        self.interaction(r1[0] - r2[0])
    }
    fn initial_positions(&self) -> Vec<[f64; 1]> {
        vec![[-0.5 * self.separation], [0.5 * self.separation]]
    }
}
