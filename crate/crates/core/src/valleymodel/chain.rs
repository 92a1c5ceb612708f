use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::phase::{extract_valley_phase, ZGrid};
use super::DEGENERACY_FLOOR;
use crate::eigen::{lowest_eigenpairs, LanczosOptions, SymmetricOperator};
use crate::units::{kinetic_prefactor, CHAIN_BARRIER, K0, MONOLAYER, M_LONGITUDINAL};
use crate::{Error, Result};

/// Tunable pieces of the chain that are not fixed by the band structure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainParams {
    /// Oxide barrier height, meV.
    pub barrier: f64,
    /// Width of the sigmoid interface profile, nm.
    pub interface_width: f64,
    /// Sites on the oxide side of z = 0.
    pub n_oxide: usize,
}

impl Default for ChainParams {
    fn default() -> Self {
        Self {
            barrier: CHAIN_BARRIER,
            interface_width: 0.058,
            n_oxide: 40,
        }
    }
}

/// Two-band chain along [001] with first and second neighbour hoppings.
///
/// Sites sit at `z_j = (j − n_oxide)·a`. On-site energy:
/// `barrier / (1 + e^{(z − z_int)/w}) + E_z·z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainModel {
    pub a: f64,
    pub t1: f64,
    pub t2: f64,
    pub n_sites: usize,
    pub k0: f64,
    pub barrier: f64,
    pub e_z: f64,
    pub interface_z: f64,
    pub params: ChainParams,
    onsite: Vec<f64>,
}

impl ChainModel {
    pub fn site_z(&self, j: usize) -> f64 {
        (j as f64 - self.params.n_oxide as f64) * self.a
    }

    pub fn onsite(&self) -> &[f64] {
        &self.onsite
    }

    /// Infinite-chain dispersion.
    pub fn dispersion(&self, k: f64) -> f64 {
        2.0 * self.t1 * (k * self.a).cos() + 2.0 * self.t2 * (2.0 * k * self.a).cos()
    }
}

impl SymmetricOperator for ChainModel {
    fn dim(&self) -> usize {
        self.n_sites
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.n_sites;
        for i in 0..n {
            let mut v = self.onsite[i] * x[i];
            if i >= 1 {
                v += self.t1 * x[i - 1];
            }
            if i + 1 < n {
                v += self.t1 * x[i + 1];
            }
            if i >= 2 {
                v += self.t2 * x[i - 2];
            }
            if i + 2 < n {
                v += self.t2 * x[i + 2];
            }
            y[i] = v;
        }
    }
}

/// Hoppings placing the band minimum at `k0` with curvature `ħ²/m_z`.
fn calibrate(a: f64, k0: f64, mass_ratio: f64) -> Result<(f64, f64)> {
    let s = (k0 * a).sin();
    let c = (k0 * a).cos();
    if s.abs() < 1e-6 {
        return Err(Error::Model("valley wavevector at a zone boundary".into()));
    }
    let hbar2_over_m = 2.0 * kinetic_prefactor(mass_ratio);
    let t2 = hbar2_over_m / (8.0 * a * a * s * s);
    let t1 = -4.0 * t2 * c;
    Ok((t1, t2))
}

/// Numerical check of the calibrated band: minimum location within 1% of
/// `k0` and curvature within 5% of `ħ²/m_z`.
fn verify_band(chain: &ChainModel, mass_ratio: f64) -> Result<()> {
    let e = |k: f64| chain.dispersion(k);
    let zone = std::f64::consts::PI / chain.a;
    let n = 20_000;
    let (kmin, _) = (1..n)
        .map(|i| i as f64 * zone / n as f64)
        .map(|k| (k, e(k)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    if (kmin - chain.k0).abs() > 0.01 * chain.k0 {
        return Err(Error::Model(format!(
            "band minimum at {kmin:.4} nm^-1, expected {:.4}",
            chain.k0
        )));
    }
    let h = 1e-3;
    let curv = (e(chain.k0 + h) - 2.0 * e(chain.k0) + e(chain.k0 - h)) / (h * h);
    let target = 2.0 * kinetic_prefactor(mass_ratio);
    if (curv / target - 1.0).abs() > 0.05 {
        return Err(Error::Model(format!(
            "band curvature {curv:.3} vs {target:.3} meV nm^2"
        )));
    }
    Ok(())
}

pub fn build_chain_with(
    e_z: f64,
    interface_z: f64,
    n_sites: usize,
    params: ChainParams,
) -> Result<ChainModel> {
    if n_sites < 200 {
        return Err(Error::param("n_sites", format!("{n_sites} < 200")));
    }
    if !(e_z.is_finite() && e_z >= 0.0) {
        return Err(Error::param("e_z", "must be finite and non-negative"));
    }
    if !(params.barrier > 0.0 && params.interface_width > 0.0) {
        return Err(Error::param(
            "chain",
            "barrier and interface width must be positive",
        ));
    }
    if params.n_oxide + 10 >= n_sites {
        return Err(Error::param("n_oxide", "leaves no silicon sites"));
    }
    let a = MONOLAYER;
    let (t1, t2) = calibrate(a, K0, M_LONGITUDINAL)?;
    let mut chain = ChainModel {
        a,
        t1,
        t2,
        n_sites,
        k0: K0,
        barrier: params.barrier,
        e_z,
        interface_z,
        params,
        onsite: Vec::new(),
    };
    verify_band(&chain, M_LONGITUDINAL)?;
    chain.onsite = (0..n_sites)
        .map(|j| {
            let z = chain.site_z(j);
            let u = ((z - interface_z) / params.interface_width).clamp(-700.0, 700.0);
            params.barrier / (1.0 + u.exp()) + e_z * z
        })
        .collect();
    Ok(chain)
}

/// Chain with the default interface profile.
pub fn build_chain(e_z: f64, interface_z: f64, n_sites: usize) -> Result<ChainModel> {
    build_chain_with(e_z, interface_z, n_sites, ChainParams::default())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainValley {
    /// E₁ − E₀, meV.
    pub splitting: f64,
    /// φ_v of the chain, `None` when degenerate.
    pub phase: Option<f64>,
    /// Δ₁D = (splitting/2)·e^{iφ_v}; zero when degenerate.
    pub delta_re: f64,
    pub delta_im: f64,
    pub energies: [f64; 2],
    pub degenerate: bool,
    pub e_z: f64,
}

impl ChainValley {
    pub fn delta(&self) -> Complex64 {
        Complex64::new(self.delta_re, self.delta_im)
    }
}

/// Two lowest chain states, their splitting and valley phase.
pub fn chain_valley_splitting(chain: &ChainModel) -> Result<ChainValley> {
    let (eigs, densities) = chain_states(chain)?;
    let splitting = eigs[1] - eigs[0];
    let grid = ZGrid {
        nz: chain.n_sites,
        dz: chain.a,
        z0: chain.site_z(0),
    };
    let degenerate = splitting < DEGENERACY_FLOOR;
    let phase = if degenerate {
        None
    } else {
        Some(extract_valley_phase(&densities[0], &densities[1], &grid)?.phase)
    };
    let delta = match phase {
        Some(p) => Complex64::from_polar(0.5 * splitting, p),
        None => Complex64::new(0.0, 0.0),
    };
    Ok(ChainValley {
        splitting,
        phase,
        delta_re: delta.re,
        delta_im: delta.im,
        energies: eigs,
        degenerate,
        e_z: chain.e_z,
    })
}

/// Two lowest eigenvalues and site densities.
pub fn chain_states(chain: &ChainModel) -> Result<([f64; 2], [Vec<f64>; 2])> {
    // Start vector: triangular-well envelope times a generic mix of both valleys.
    let ell = if chain.e_z > 0.0 {
        (2.0 * kinetic_prefactor(M_LONGITUDINAL) / chain.e_z)
            .cbrt()
            .min(20.0)
    } else {
        chain.n_sites as f64 * chain.a / 4.0
    };
    let start: Vec<f64> = (0..chain.n_sites)
        .map(|j| {
            let z = chain.site_z(j) - chain.interface_z;
            if z <= 0.0 {
                1e-3
            } else {
                z * (-z / ell).exp()
                    * (1.0 + 0.5 * (chain.k0 * z).cos() + 0.3 * (chain.k0 * z).sin())
            }
        })
        .collect();
    let opts = LanczosOptions {
        n_eigen: 2,
        krylov_dim: 80,
        tol: 1e-8,
        max_restarts: 2000,
    };
    let res = lowest_eigenpairs(chain, &start, &opts)?;
    let dens = |v: &Vec<f64>| v.iter().map(|x| x * x).collect::<Vec<f64>>();
    Ok((
        [res.values[0], res.values[1]],
        [dens(&res.vectors[0]), dens(&res.vectors[1])],
    ))
}
