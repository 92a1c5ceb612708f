use serde::{Deserialize, Serialize};

use crate::eigen::{lowest_eigenpairs, LanczosOptions, SymmetricOperator};
use crate::electrostatics::HarmonicDot;
use crate::surface::RoughSurface;
use crate::units::{kinetic_prefactor, M_TRANSVERSE};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeOptions {
    /// In-plane mass in units of mₑ.
    pub mass_ratio: f64,
    /// Target finite-difference spacing, nm; snapped to a multiple of the
    /// surface spacing.
    pub target_spacing: f64,
    /// Window half-width in bare harmonic lengths.
    pub window_lengths: f64,
    /// Eigen-residual tolerance, meV.
    pub tol: f64,
}

impl Default for EnvelopeOptions {
    fn default() -> Self {
        Self {
            mass_ratio: M_TRANSVERSE,
            target_spacing: 0.4,
            window_lengths: 4.0,
            tol: 1e-8,
        }
    }
}

/// Lowest lateral state of a dot on the rough interface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope2D {
    /// Probability density (nm⁻²), row-major `[iy * nx + ix]`.
    pub density: Vec<f64>,
    pub nx: usize,
    pub ny: usize,
    /// Envelope grid spacing, nm.
    pub h: f64,
    /// Coordinates of node (0, 0), nm.
    pub origin: (f64, f64),
    /// Surface spacings per envelope spacing.
    pub stride: usize,
    pub center: (f64, f64),
    pub spread: (f64, f64),
    /// Ground energy, meV.
    pub energy: f64,
    /// Probability on the outermost ring of nodes.
    pub boundary_mass: f64,
    pub confinement_warning: bool,
    pub dot: HarmonicDot,
}

impl Envelope2D {
    pub fn node(&self, ix: usize, iy: usize) -> (f64, f64) {
        (
            self.origin.0 + ix as f64 * self.h,
            self.origin.1 + iy as f64 * self.h,
        )
    }

    /// Bilinear density at `(x, y)`; zero outside the envelope grid.
    pub fn density_at(&self, x: f64, y: f64) -> f64 {
        let fx = (x - self.origin.0) / self.h;
        let fy = (y - self.origin.1) / self.h;
        if fx < 0.0 || fy < 0.0 || fx > (self.nx - 1) as f64 || fy > (self.ny - 1) as f64 {
            return 0.0;
        }
        let ix = (fx.floor() as usize).min(self.nx - 2);
        let iy = (fy.floor() as usize).min(self.ny - 2);
        let tx = fx - ix as f64;
        let ty = fy - iy as f64;
        let d = |i: usize, j: usize| self.density[j * self.nx + i];
        (1.0 - ty) * ((1.0 - tx) * d(ix, iy) + tx * d(ix + 1, iy))
            + ty * ((1.0 - tx) * d(ix, iy + 1) + tx * d(ix + 1, iy + 1))
    }

    /// Normalised weights of the density on every surface node covered by
    /// the envelope grid, as `(ix, iy, weight)`.
    pub fn surface_weights(&self, surface: &RoughSurface) -> Vec<(usize, usize, f64)> {
        let dx = surface.dx();
        let (sx0, sy0) = surface.origin();
        let x1 = self.origin.0 + (self.nx - 1) as f64 * self.h;
        let y1 = self.origin.1 + (self.ny - 1) as f64 * self.h;
        let i_lo = ((self.origin.0 - sx0) / dx).ceil().max(0.0) as usize;
        let i_hi = (((x1 - sx0) / dx).floor() as usize).min(surface.nx() - 1);
        let j_lo = ((self.origin.1 - sy0) / dx).ceil().max(0.0) as usize;
        let j_hi = (((y1 - sy0) / dx).floor() as usize).min(surface.ny() - 1);
        let mut out = Vec::with_capacity((i_hi + 1 - i_lo) * (j_hi + 1 - j_lo));
        let mut total = 0.0;
        for j in j_lo..=j_hi {
            let y = sy0 + j as f64 * dx;
            for i in i_lo..=i_hi {
                let w = self.density_at(sx0 + i as f64 * dx, y);
                if w > 0.0 {
                    total += w;
                    out.push((i, j, w));
                }
            }
        }
        if total > 0.0 {
            out.iter_mut().for_each(|e| e.2 /= total);
        }
        out
    }

    /// Δx·Δy, nm².
    pub fn area(&self) -> f64 {
        self.spread.0 * self.spread.1
    }
}

struct LateralHamiltonian {
    nx: usize,
    ny: usize,
    kin: f64,
    potential: Vec<f64>,
}

impl SymmetricOperator for LateralHamiltonian {
    fn dim(&self) -> usize {
        self.nx * self.ny
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let (nx, ny, t) = (self.nx, self.ny, self.kin);
        for j in 0..ny {
            for i in 0..nx {
                let k = j * nx + i;
                let mut v = (self.potential[k] + 4.0 * t) * x[k];
                if i > 0 {
                    v -= t * x[k - 1];
                }
                if i + 1 < nx {
                    v -= t * x[k + 1];
                }
                if j > 0 {
                    v -= t * x[k - nx];
                }
                if j + 1 < ny {
                    v -= t * x[k + nx];
                }
                y[k] = v;
            }
        }
    }
}

/// Lowest state of `−ħ²/(2m)∇² + c_x(x−x_c)² + c_y(y−y_c)² + E_z·z_s(x, y)`.
///
/// Finite differences with Dirichlet walls on a window of
/// ±`window_lengths` bare harmonic lengths around the dot center. The
/// surface enters through block averages over each envelope cell.
pub fn solve_envelope(
    dot: &HarmonicDot,
    surface: &RoughSurface,
    opts: &EnvelopeOptions,
) -> Result<Envelope2D> {
    dot.validate()?;
    let dx = surface.dx();
    let stride = ((opts.target_spacing / dx).round() as usize).max(1);
    let h = stride as f64 * dx;
    let half_x = opts.window_lengths * dot.length_x(opts.mass_ratio);
    let half_y = opts.window_lengths * dot.length_y(opts.mass_ratio);
    let kx = (half_x / h).ceil() as usize;
    let ky = (half_y / h).ceil() as usize;
    let (sx0, sy0) = surface.origin();
    let ic = ((dot.x_c - sx0) / dx).round();
    let jc = ((dot.y_c - sy0) / dx).round();
    let halo = (stride / 2) as f64;
    let reach_x = (kx * stride) as f64 + halo;
    let reach_y = (ky * stride) as f64 + halo;
    if ic - reach_x < 0.0
        || jc - reach_y < 0.0
        || ic + reach_x > (surface.nx() - 1) as f64
        || jc + reach_y > (surface.ny() - 1) as f64
    {
        return Err(Error::Geometry(format!(
            "envelope window around ({:.2}, {:.2}) nm leaves the surface",
            dot.x_c, dot.y_c
        )));
    }
    let (ic, jc) = (ic as usize, jc as usize);
    let nx = 2 * kx + 1;
    let ny = 2 * ky + 1;
    let i0 = ic - kx * stride;
    let j0 = jc - ky * stride;
    let origin = (sx0 + i0 as f64 * dx, sy0 + j0 as f64 * dx);
    let hw = stride / 2;

    let mut potential = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let si = i0 + i * stride;
            let sj = j0 + j * stride;
            let mut zs = 0.0;
            for b in sj - hw..=sj + hw {
                for a in si - hw..=si + hw {
                    zs += surface.at(a, b);
                }
            }
            zs /= ((2 * hw + 1) * (2 * hw + 1)) as f64;
            let (x, y) = (origin.0 + i as f64 * h, origin.1 + j as f64 * h);
            potential.push(dot.lateral(x, y) + dot.e_z * zs);
        }
    }
    let op = LateralHamiltonian {
        nx,
        ny,
        kin: kinetic_prefactor(opts.mass_ratio) / (h * h),
        potential,
    };

    let lx = dot.length_x(opts.mass_ratio);
    let ly = dot.length_y(opts.mass_ratio);
    let mut start = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (x, y) = (origin.0 + i as f64 * h, origin.1 + j as f64 * h);
            let u = (x - dot.x_c) / lx;
            let v = (y - dot.y_c) / ly;
            start.push((-(u * u + v * v) / 2.0).exp());
        }
    }
    let lopts = LanczosOptions {
        n_eigen: 1,
        krylov_dim: 60,
        tol: opts.tol,
        max_restarts: 500,
    };
    let res = lowest_eigenpairs(&op, &start, &lopts)?;
    let psi = &res.vectors[0];
    let cell = h * h;
    let norm: f64 = psi.iter().map(|p| p * p).sum();
    let density: Vec<f64> = psi.iter().map(|p| p * p / (norm * cell)).collect();

    let (mut mx, mut my, mut mxx, mut myy, mut edge) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for j in 0..ny {
        for i in 0..nx {
            let w = density[j * nx + i] * cell;
            let (x, y) = (origin.0 + i as f64 * h, origin.1 + j as f64 * h);
            mx += w * x;
            my += w * y;
            mxx += w * x * x;
            myy += w * y * y;
            if i == 0 || j == 0 || i == nx - 1 || j == ny - 1 {
                edge += w;
            }
        }
    }
    let spread = (
        (mxx - mx * mx).max(0.0).sqrt(),
        (myy - my * my).max(0.0).sqrt(),
    );
    let warn = edge > 0.01;
    if warn {
        log::warn!(
            "envelope at ({:.2}, {:.2}) nm has {:.2}% of its weight on the window boundary",
            dot.x_c,
            dot.y_c,
            100.0 * edge
        );
    }
    Ok(Envelope2D {
        density,
        nx,
        ny,
        h,
        origin,
        stride,
        center: (mx, my),
        spread,
        energy: res.values[0],
        boundary_mass: edge,
        confinement_warning: warn,
        dot: *dot,
    })
}
