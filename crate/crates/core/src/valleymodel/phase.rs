use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::units::K0;
use crate::{Error, Result};

/// Uniform sampling along z: `z_j = z0 + j·dz`, `j < nz`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZGrid {
    pub nz: usize,
    pub dz: f64,
    pub z0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValleyPhase {
    /// φ_v in (−π, π].
    pub phase: f64,
    /// Refined peak wavevector, nm⁻¹.
    pub peak_k: f64,
    /// Wavevector of the FFT bin holding the peak, nm⁻¹.
    pub peak_bin_k: f64,
    /// Peak magnitude over the median spectral magnitude.
    pub peak_to_floor: f64,
}

fn dtft(signal: &[f64], grid: &ZGrid, q: f64) -> Complex64 {
    signal
        .iter()
        .enumerate()
        .map(|(j, &s)| {
            let z = grid.z0 + j as f64 * grid.dz;
            Complex64::from_polar(s, -q * z)
        })
        .sum::<Complex64>()
        * grid.dz
}

/// Phase of the 2k₀ oscillation in `density_plus − density_minus`.
///
/// Arrays hold `n_lateral` stacked columns of `grid.nz` samples each (z
/// fastest). The difference is averaged over columns, Fourier transformed
/// along z, and the local spectral maximum closest to 2k₀ is refined on the
/// continuous transform. φ_v is the transform's argument at 2k₀ when the
/// refined peak lies within one bin of it, otherwise at the peak.
pub fn extract_valley_phase(
    density_plus: &[f64],
    density_minus: &[f64],
    grid: &ZGrid,
) -> Result<ValleyPhase> {
    let nz = grid.nz;
    if density_plus.len() != density_minus.len() {
        return Err(Error::param("density", "arrays differ in shape"));
    }
    if nz < 8 || density_plus.is_empty() || density_plus.len() % nz != 0 {
        return Err(Error::param(
            "density",
            "length must be a positive multiple of nz >= 8",
        ));
    }
    if !(grid.dz > 0.0 && grid.dz < PI / (2.0 * K0)) {
        return Err(Error::param(
            "dz",
            format!("{} nm does not resolve 2k0", grid.dz),
        ));
    }
    let cols = density_plus.len() / nz;
    let mut osc = vec![0.0; nz];
    for c in 0..cols {
        for j in 0..nz {
            osc[j] += density_plus[c * nz + j] - density_minus[c * nz + j];
        }
    }
    osc.iter_mut().for_each(|v| *v /= cols as f64);

    let mut buf: Vec<Complex64> = osc.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::<f64>::new()
        .plan_fft_forward(nz)
        .process(&mut buf);
    let half = nz / 2;
    let mags: Vec<f64> = buf[..=half].iter().map(|c| c.norm()).collect();
    let dk = 2.0 * PI / (nz as f64 * grid.dz);
    let mut sorted: Vec<f64> = mags[1..].to_vec();
    sorted.sort_by(f64::total_cmp);
    let floor = sorted[sorted.len() / 2];

    let target = 2.0 * K0;
    let is_peak = |k: usize| {
        let left = if k > 1 { mags[k - 1] } else { 0.0 };
        let right = if k < half { mags[k + 1] } else { 0.0 };
        mags[k] >= left && mags[k] >= right && mags[k] > 5.0 * floor
    };
    let best = (1..=half)
        .filter(|&k| is_peak(k))
        .min_by(|&a, &b| {
            let da = (a as f64 * dk - target).abs();
            let db = (b as f64 * dk - target).abs();
            da.total_cmp(&db)
        })
        .ok_or_else(|| Error::Extraction("no spectral peak above 5x the median floor".into()))?;

    // Golden-section refinement of |F(q)| within one bin of the peak.
    let f = |q: f64| dtft(&osc, grid, q).norm();
    let (mut a, mut b) = ((best as f64 - 1.0) * dk, (best as f64 + 1.0) * dk);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..60 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let q = 0.5 * (a + b);
    // Reading the phase at 2k₀ itself (when the peak is that close) makes a
    // rigid shift by δ rotate φ_v by exactly −2k₀δ.
    let q_read = if (q - target).abs() <= dk { target } else { q };
    let phase = crate::stats::wrap_phase(dtft(&osc, grid, q_read).arg());
    Ok(ValleyPhase {
        phase,
        peak_k: q,
        peak_bin_k: best as f64 * dk,
        peak_to_floor: if floor > 0.0 {
            mags[best] / floor
        } else {
            f64::INFINITY
        },
    })
}
