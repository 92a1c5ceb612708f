//! Exact diagonalization of the 1D two-electron double well, used as the
//! reference for the path-integral exchange estimator.

use serde::{Deserialize, Serialize};

use super::system::DoubleWell1D;
use crate::eigen::{ground_energy, SymmetricOperator};
use crate::error::{Error, Result};
use crate::units::kinetic_prefactor;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleOptions {
    /// Grid points per coordinate.
    pub n_grid: usize,
    /// Half-width of the box; defaults to `d/2 + 8ℓ` with ℓ the single-well
    /// oscillator length.
    pub half_width: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            n_grid: 1024,
            half_width: None,
            tol: 1e-11,
            max_iter: 40_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactExchange {
    /// Lowest spatially symmetric energy, meV.
    pub e_singlet: f64,
    /// Lowest spatially antisymmetric energy, meV.
    pub e_triplet: f64,
    /// `E_T − E_S`, meV.
    pub j: f64,
    pub spacing: f64,
}

struct TwoBody {
    n: usize,
    hop: f64,
    diag: Vec<f64>,
}

impl SymmetricOperator for TwoBody {
    fn dim(&self) -> usize {
        self.n * self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.n;
        let t = self.hop;
        for i in 0..n {
            let row = i * n;
            for j in 0..n {
                let k = row + j;
                let mut s = self.diag[k] * x[k];
                if j > 0 {
                    s += t * x[k - 1];
                }
                if j + 1 < n {
                    s += t * x[k + 1];
                }
                if i > 0 {
                    s += t * x[k - n];
                }
                if i + 1 < n {
                    s += t * x[k + n];
                }
                y[k] = s;
            }
        }
    }
}

fn symmetrize(n: usize, v: &mut [f64], sign: f64) {
    for i in 0..n {
        for j in (i + 1)..n {
            let a = v[i * n + j];
            let b = v[j * n + i];
            let s = 0.5 * (a + sign * b);
            v[i * n + j] = s;
            v[j * n + i] = sign * s;
        }
        if sign < 0.0 {
            v[i * n + i] = 0.0;
        }
    }
}

/// Singlet and triplet ground energies on a finite-difference grid.
pub fn exact_exchange_1d(system: &DoubleWell1D, opts: &OracleOptions) -> Result<ExactExchange> {
    if opts.n_grid < 16 {
        return Err(Error::param("n_grid", "need at least 16 points"));
    }
    let p = kinetic_prefactor(system.mass);
    let ell = (p / system.curvature).powf(0.25);
    let half = opts
        .half_width
        .unwrap_or(0.5 * system.separation + 8.0 * ell);
    let n = opts.n_grid;
    let h = 2.0 * half / (n + 1) as f64;
    let xs: Vec<f64> = (0..n).map(|i| -half + (i + 1) as f64 * h).collect();
    let wells: Vec<f64> = xs.iter().map(|&x| system.well(x)).collect();
    let mut diag = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            diag[i * n + j] =
                4.0 * p / (h * h) + wells[i] + wells[j] + system.interaction(xs[i] - xs[j]);
        }
    }
    let op = TwoBody {
        n,
        hop: -p / (h * h),
        diag,
    };
    let d = 0.5 * system.separation;
    let gauss = |x: f64, c: f64| (-(x - c).powi(2) / (2.0 * ell * ell)).exp();
    let mut start = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            start[i * n + j] = gauss(xs[i], -d) * gauss(xs[j], d);
        }
    }
    let sym = |v: &mut [f64]| symmetrize(n, v, 1.0);
    let anti = |v: &mut [f64]| symmetrize(n, v, -1.0);
    let e_singlet = ground_energy(&op, &start, Some(&sym), opts.tol, opts.max_iter)?;
    let e_triplet = ground_energy(&op, &start, Some(&anti), opts.tol, opts.max_iter)?;
    Ok(ExactExchange {
        e_singlet,
        e_triplet,
        j: e_triplet - e_singlet,
        spacing: h,
    })
}
