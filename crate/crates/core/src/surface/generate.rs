use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::{FractalParams, RoughSurface};
use crate::{Error, Result};

/// Number of cells along a side, or a parameter error when `extent / dx`
/// is not an integer.
pub(crate) fn cell_count(extent: f64, dx: f64) -> Result<usize> {
    if !(dx > 0.0 && dx.is_finite()) {
        return Err(Error::param("dx", "grid spacing must be positive"));
    }
    if !(extent > 0.0 && extent.is_finite()) {
        return Err(Error::param("extent", "extent must be positive"));
    }
    let ratio = extent / dx;
    let n = ratio.round();
    if (ratio - n).abs() > 1e-6 {
        return Err(Error::param(
            "dx",
            format!(
                "extent {extent} nm is not an integer multiple of dx {dx} nm (ratio {ratio:.6})"
            ),
        ));
    }
    Ok(n as usize)
}

/// Sum over ky of |q|^(-2-2H), scaled to the 1D law: √π Γ(H+½)/Γ(H+1).
fn line_integral_factor(hurst: f64) -> f64 {
    PI.sqrt() * libm::tgamma(hurst + 0.5) / libm::tgamma(hurst + 1.0)
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    const B: usize = 32;
    for i0 in (0..n).step_by(B) {
        for j0 in (0..n).step_by(B) {
            for i in i0..(i0 + B).min(n) {
                for j in j0..(j0 + B).min(n) {
                    dst[j * n + i] = src[i * n + j];
                }
            }
        }
    }
}

/// Fourier-filtered self-affine surface on an `extent × extent` square.
///
/// Complex Gaussian amplitudes with variance `D |q|^(−2−2H)` fill the band
/// `2π/λ_max ≤ |q| ≤ 2π/λ_min`; the real part of the inverse transform
/// (scaled by √2) has line cuts following `C₀ |q|^(−1−2H)`. The mean is
/// removed. The result is bit-identical for a fixed seed.
pub fn generate_surface(
    params: FractalParams,
    extent: f64,
    dx: f64,
    seed: u64,
) -> Result<RoughSurface> {
    let n = cell_count(extent, dx)?;
    if n < 64 {
        return Err(Error::param(
            "extent",
            format!("grid of {n} cells is below the 64 minimum"),
        ));
    }
    params.validate(extent, dx)?;
    let l = n as f64 * dx;

    if params.c0 == 0.0 {
        let s = RoughSurface::from_heights(vec![0.0; n * n], n, n, dx, (0.0, 0.0))?;
        return Ok(s.with_meta(seed, params));
    }

    let d = params.c0 / (2.0 * PI * l * l * line_integral_factor(params.hurst));
    let q_lo = 2.0 * PI / params.lambda_max * (1.0 - 1e-12);
    let q_hi = 2.0 * PI / params.lambda_min * (1.0 + 1e-12);
    let dq = 2.0 * PI / l;
    let exponent = -1.0 - params.hurst;

    let signed = |k: usize| -> f64 {
        if k <= n / 2 {
            k as f64
        } else {
            k as f64 - n as f64
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spec = vec![Complex64::new(0.0, 0.0); n * n];
    for iy in 0..n {
        let ky = signed(iy) * dq;
        for ix in 0..n {
            let kx = signed(ix) * dq;
            let q = (kx * kx + ky * ky).sqrt();
            if q < q_lo || q > q_hi || q == 0.0 {
                continue;
            }
            // Each component carries half of D|q|^(−2−2H).
            let sigma = (0.5 * d).sqrt() * q.powf(exponent);
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            spec[iy * n + ix] = Complex64::new(sigma * re, sigma * im);
        }
    }

    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_inverse(n);
    fft.process(&mut spec);
    let mut scratch = vec![Complex64::new(0.0, 0.0); n * n];
    transpose(&spec, &mut scratch, n);
    fft.process(&mut scratch);
    transpose(&scratch, &mut spec, n);
    drop(scratch);

    let mut heights: Vec<f64> = spec
        .iter()
        .map(|c| c.re * std::f64::consts::SQRT_2)
        .collect();
    drop(spec);
    let mean = crate::stats::mean(&heights);
    heights.iter_mut().for_each(|h| *h -= mean);

    let s = RoughSurface::from_heights(heights, n, n, dx, (0.0, 0.0))?;
    Ok(s.with_meta(seed, params))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_fractional_grid() {
        let p = FractalParams::full_band(0.28, 1.4, 100.0, 0.3);
        assert!(matches!(
            generate_surface(p, 100.0, 0.3, 1),
            Err(Error::Parameter { .. })
        ));
    }

    #[test]
    fn rejects_bad_hurst() {
        for h in [0.0, 1.0, -0.2, 1.5] {
            let p = FractalParams::full_band(h, 1.4, 64.0, 0.5);
            assert!(generate_surface(p, 64.0, 0.5, 1).is_err());
        }
    }

    #[test]
    fn line_factor_known_values() {
        // H = 1/2: √π Γ(1)/Γ(3/2) = 2.
        assert!((line_integral_factor(0.5) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_amplitude_is_flat() {
        let p = FractalParams::full_band(0.28, 0.0, 64.0, 0.5);
        let s = generate_surface(p, 64.0, 0.5, 3).unwrap();
        assert!(s.heights().iter().all(|&h| h == 0.0));
    }

    #[test]
    fn deterministic_and_zero_mean() {
        let p = FractalParams::full_band(0.28, 1.4, 64.0, 0.5);
        let a = generate_surface(p, 64.0, 0.5, 11).unwrap();
        let b = generate_surface(p, 64.0, 0.5, 11).unwrap();
        let c = generate_surface(p, 64.0, 0.5, 12).unwrap();
        assert_eq!(a.heights(), b.heights());
        assert_ne!(a.heights(), c.heights());
        assert!(a.mean().abs() < 1e-12);
    }
}
