//! Self-affine rough interfaces: synthesis, spectral analysis and lookup.
//!
//! Height convention: `z_s(x, y)` is the local depth of the Si/SiO₂ boundary
//! in nm, positive into the silicon. Spectra use the angular-wavenumber
//! normalisation in which a line profile's variance is
//! `(2π)⁻³ ∫ C(q) dq` over positive and negative `q`; the self-affine law
//! reads `C(q) = C₀ |q|^(−1−2H)`.

mod generate;
pub mod io;
mod psd;
mod rms;

pub use generate::generate_surface;
pub use psd::{
    estimate_psd_1d, estimate_psd_2d_average, Axes, PowerLawFit, PsdEstimate, PsdOptions,
};
pub use rms::{rms_of_segments, LineSource, Profile, RmsCurve};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Spectral parameters of a self-affine surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FractalParams {
    /// Hurst exponent, in (0, 1).
    pub hurst: f64,
    /// Amplitude C₀, nm³. Zero gives a flat surface.
    pub c0: f64,
    /// Shortest wavelength kept, nm.
    pub lambda_min: f64,
    /// Longest wavelength kept, nm.
    pub lambda_max: f64,
}

impl FractalParams {
    /// Default band for a grid: from the Nyquist wavelength to the domain size.
    pub fn full_band(hurst: f64, c0: f64, extent: f64, dx: f64) -> Self {
        Self {
            hurst,
            c0,
            lambda_min: 2.0 * dx,
            lambda_max: extent,
        }
    }

    pub fn validate(&self, extent: f64, dx: f64) -> Result<()> {
        if !(self.hurst > 0.0 && self.hurst < 1.0) {
            return Err(Error::param(
                "hurst",
                format!("{} not in (0, 1)", self.hurst),
            ));
        }
        if !(self.c0 >= 0.0 && self.c0.is_finite()) {
            return Err(Error::param(
                "c0",
                format!("{} must be finite and non-negative", self.c0),
            ));
        }
        if !(self.lambda_min >= 2.0 * dx * (1.0 - 1e-9)) {
            return Err(Error::param(
                "lambda_min",
                format!(
                    "{} nm is below twice the grid spacing {} nm",
                    self.lambda_min, dx
                ),
            ));
        }
        if !(self.lambda_max <= extent * (1.0 + 1e-9)) || self.lambda_max <= self.lambda_min {
            return Err(Error::param(
                "lambda_max",
                format!(
                    "{} nm must lie in (lambda_min, extent = {} nm]",
                    self.lambda_max, extent
                ),
            ));
        }
        Ok(())
    }
}

/// Height field on a uniform square-celled grid.
///
/// Stored row-major: `heights[iy * nx + ix]` is the height at
/// `(x0 + ix·dx, y0 + iy·dx)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RoughSurface {
    heights: Vec<f64>,
    nx: usize,
    ny: usize,
    dx: f64,
    origin: (f64, f64),
    seed: u64,
    params: Option<FractalParams>,
}

impl RoughSurface {
    pub fn from_heights(
        heights: Vec<f64>,
        nx: usize,
        ny: usize,
        dx: f64,
        origin: (f64, f64),
    ) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::param("shape", "surface needs at least 2x2 nodes"));
        }
        if heights.len() != nx * ny {
            return Err(Error::param("heights", "length does not match nx * ny"));
        }
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(Error::param("dx", "grid spacing must be positive"));
        }
        if heights.iter().any(|h| !h.is_finite()) {
            return Err(Error::param("heights", "non-finite height"));
        }
        Ok(Self {
            heights,
            nx,
            ny,
            dx,
            origin,
            seed: 0,
            params: None,
        })
    }

    /// Surface filled from `f(x, y)` evaluated at the grid nodes.
    pub fn from_fn(
        nx: usize,
        ny: usize,
        dx: f64,
        origin: (f64, f64),
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let mut h = Vec::with_capacity(nx * ny);
        for iy in 0..ny {
            for ix in 0..nx {
                h.push(f(origin.0 + ix as f64 * dx, origin.1 + iy as f64 * dx));
            }
        }
        Self::from_heights(h, nx, ny, dx, origin)
    }

    /// Constant-height surface.
    pub fn flat(n: usize, dx: f64, origin: (f64, f64), z: f64) -> Result<Self> {
        Self::from_fn(n, n, dx, origin, |_, _| z)
    }

    pub(crate) fn with_meta(mut self, seed: u64, params: FractalParams) -> Self {
        self.seed = seed;
        self.params = Some(params);
        self
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }
    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn dx(&self) -> f64 {
        self.dx
    }
    pub fn origin(&self) -> (f64, f64) {
        self.origin
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }
    pub fn params(&self) -> Option<&FractalParams> {
        self.params.as_ref()
    }

    /// Periodic extent `(nx·dx, ny·dx)`.
    pub fn extent(&self) -> (f64, f64) {
        (self.nx as f64 * self.dx, self.ny as f64 * self.dx)
    }

    /// Coordinates of the last grid node.
    pub fn far_corner(&self) -> (f64, f64) {
        (
            self.origin.0 + (self.nx - 1) as f64 * self.dx,
            self.origin.1 + (self.ny - 1) as f64 * self.dx,
        )
    }

    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.heights[iy * self.nx + ix]
    }

    pub fn row(&self, iy: usize) -> &[f64] {
        &self.heights[iy * self.nx..(iy + 1) * self.nx]
    }

    pub fn column(&self, ix: usize) -> Vec<f64> {
        (0..self.ny).map(|iy| self.at(ix, iy)).collect()
    }

    /// Copy with every height multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.heights.iter_mut().for_each(|h| *h *= s);
        out
    }

    /// Copy with `dz` added to every height.
    pub fn shifted(&self, dz: f64) -> Self {
        let mut out = self.clone();
        out.heights.iter_mut().for_each(|h| *h += dz);
        out
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (x1, y1) = self.far_corner();
        let tol = 1e-9 * self.dx;
        x >= self.origin.0 - tol && x <= x1 + tol && y >= self.origin.1 - tol && y <= y1 + tol
    }

    /// Bilinear interpolation of the height at `(x, y)`.
    pub fn sample(&self, x: f64, y: f64) -> Result<f64> {
        if !(x.is_finite() && y.is_finite()) || !self.contains(x, y) {
            return Err(Error::OutOfBounds { x, y });
        }
        Ok(self.sample_unchecked(x, y))
    }

    /// Bilinear lookup without the bounds check; coordinates are clamped.
    pub fn sample_unchecked(&self, x: f64, y: f64) -> f64 {
        let fx = ((x - self.origin.0) / self.dx).clamp(0.0, (self.nx - 1) as f64);
        let fy = ((y - self.origin.1) / self.dx).clamp(0.0, (self.ny - 1) as f64);
        let ix = (fx.floor() as usize).min(self.nx - 2);
        let iy = (fy.floor() as usize).min(self.ny - 2);
        let tx = fx - ix as f64;
        let ty = fy - iy as f64;
        let base = iy * self.nx + ix;
        let h00 = self.heights[base];
        let h10 = self.heights[base + 1];
        let h01 = self.heights[base + self.nx];
        let h11 = self.heights[base + self.nx + 1];
        (1.0 - ty) * ((1.0 - tx) * h00 + tx * h10) + ty * ((1.0 - tx) * h01 + tx * h11)
    }

    pub fn mean(&self) -> f64 {
        crate::stats::mean(&self.heights)
    }
}

/// Bilinear height lookup; errors outside the grid instead of extrapolating.
pub fn sample_height(surface: &RoughSurface, x: f64, y: f64) -> Result<f64> {
    surface.sample(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_queries_are_exact() {
        let s = RoughSurface::from_fn(5, 4, 0.5, (1.0, -2.0), |x, y| x * x - 3.0 * y).unwrap();
        for iy in 0..4 {
            for ix in 0..5 {
                let x = 1.0 + ix as f64 * 0.5;
                let y = -2.0 + iy as f64 * 0.5;
                assert_eq!(sample_height(&s, x, y).unwrap(), s.at(ix, iy));
            }
        }
    }

    #[test]
    fn plane_is_reproduced() {
        let s = RoughSurface::from_fn(6, 6, 0.3, (0.0, 0.0), |x, y| 0.2 * x - 0.7 * y).unwrap();
        let v = sample_height(&s, 0.45, 0.75).unwrap();
        assert!((v - (0.2 * 0.45 - 0.7 * 0.75)).abs() < 1e-14);
    }

    #[test]
    fn outside_is_an_error() {
        let s = RoughSurface::flat(4, 1.0, (0.0, 0.0), 0.0).unwrap();
        assert!(matches!(
            sample_height(&s, 3.5, 0.0),
            Err(Error::OutOfBounds { .. })
        ));
        assert!(sample_height(&s, 3.0, 3.0).is_ok());
    }
}
