//! g-tensors from effective-field triples, the in-plane sinusoid fit and
//! the sublattice bound on the Dresselhaus term.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::surface::RoughSurface;
use crate::units::{G0, MONOLAYER, MU_B_OVER_H_GHZ};
use crate::valleymodel::Envelope2D;
use crate::{Error, Result};

/// 3×3 g-matrix mapping applied field to effective Zeeman field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GTensor {
    /// Row-major entries.
    pub g: [[f64; 3]; 3],
}

impl GTensor {
    pub fn isotropic(g: f64) -> Self {
        Self::from_matrix(&(Matrix3::identity() * g))
    }

    pub fn from_matrix(m: &Matrix3<f64>) -> Self {
        let mut g = [[0.0; 3]; 3];
        for (i, row) in g.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = m[(i, j)];
            }
        }
        Self { g }
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.g[i][j])
    }

    /// Effective field `G·B`.
    pub fn apply(&self, b: [f64; 3]) -> [f64; 3] {
        let v = self.matrix() * Vector3::from(b);
        [v[0], v[1], v[2]]
    }

    /// Singular values, descending.
    pub fn singular_values(&self) -> [f64; 3] {
        let s = self.matrix().svd(false, false).singular_values;
        let mut v = [s[0], s[1], s[2]];
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }

    /// In-plane tensor of a pure sinusoid `g(φ) = g₀ + α + β sin 2φ`, with
    /// φ measured from [100] in the (001) plane.
    pub fn in_plane(alpha: f64, beta: f64) -> Self {
        let g = G0 + alpha;
        // ‖G r̂‖ with G = [[g, β], [β, g]] gives √(g² + β² + 2gβ sin 2φ)
        // ≈ g + β sin 2φ to first order in β/g.
        Self::from_matrix(&Matrix3::new(g, beta, 0.0, beta, g, 0.0, 0.0, 0.0, g))
    }
}

/// Solve `G·B_i = B_eff,i` for three linearly independent applied fields.
pub fn assemble_g_matrix(b_fields: &[[f64; 3]; 3], b_eff: &[[f64; 3]; 3]) -> Result<GTensor> {
    // Columns of B are the applied fields; G = B_eff · B⁻¹.
    let b = Matrix3::from_fn(|i, j| b_fields[j][i]);
    let be = Matrix3::from_fn(|i, j| b_eff[j][i]);
    let s = b.svd(false, false).singular_values;
    let smax = s.max();
    let smin = s.min();
    if !(smin > 0.0) || smax / smin >= 1e6 || !smax.is_finite() {
        return Err(Error::Conditioning(format!(
            "applied-field matrix condition number {:.3e} exceeds 1e6",
            smax / smin
        )));
    }
    let inv = b
        .try_inverse()
        .ok_or_else(|| Error::Conditioning("applied-field matrix is singular".into()))?;
    Ok(GTensor::from_matrix(&(be * inv)))
}

/// g along a unit direction: ‖G r̂‖.
pub fn g_factor(g: &GTensor, direction: [f64; 3]) -> Result<f64> {
    let v = Vector3::from(direction);
    if (v.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::param(
            "direction",
            format!("norm {} is not 1", v.norm()),
        ));
    }
    Ok((g.matrix() * v).norm())
}

/// Qubit frequency in GHz for g-factor `g` at field `b_tesla`.
pub fn larmor_ghz(g: f64, b_tesla: f64) -> f64 {
    g * MU_B_OVER_H_GHZ * b_tesla
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SoCoefficients {
    pub alpha: f64,
    pub beta: f64,
    pub g_iso: f64,
    /// RMS residual of the fit.
    pub residual: f64,
}

/// Least squares for `g(φ) = g₀ + α + β sin 2φ` with g₀ fixed.
pub fn fit_sinusoid(angles: &[f64], g_values: &[f64]) -> Result<SoCoefficients> {
    if angles.len() != g_values.len() {
        return Err(Error::param("g_values", "length differs from angles"));
    }
    if angles.iter().chain(g_values).any(|v| !v.is_finite()) {
        return Err(Error::param("angles", "non-finite sample"));
    }
    let mut distinct: Vec<f64> = angles
        .iter()
        .map(|a| a.rem_euclid(std::f64::consts::PI))
        .collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    if distinct.len() < 3 {
        return Err(Error::Conditioning(
            "fewer than three distinct angles".into(),
        ));
    }
    let span = angles.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - angles.iter().copied().fold(f64::INFINITY, f64::min);
    if span <= std::f64::consts::FRAC_PI_2 {
        return Err(Error::Conditioning(format!(
            "angle span {span:.3} rad does not exceed pi/2"
        )));
    }
    let n = angles.len() as f64;
    let s: Vec<f64> = angles.iter().map(|a| (2.0 * a).sin()).collect();
    let y: Vec<f64> = g_values.iter().map(|g| g - G0).collect();
    let (ss, s1) = (s.iter().map(|v| v * v).sum::<f64>(), s.iter().sum::<f64>());
    let (sy, y1) = (
        s.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>(),
        y.iter().sum::<f64>(),
    );
    let det = n * ss - s1 * s1;
    if det.abs() < 1e-12 * n * n {
        return Err(Error::Conditioning(
            "sin 2φ is constant over the samples".into(),
        ));
    }
    let alpha = (ss * y1 - s1 * sy) / det;
    let beta = (n * sy - s1 * y1) / det;
    let residual = (s
        .iter()
        .zip(&y)
        .map(|(si, yi)| (yi - alpha - beta * si).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(SoCoefficients {
        alpha,
        beta,
        g_iso: G0,
        residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SublatticeFraction {
    pub p_a: f64,
}

/// Monolayer index `m = floor(z_s / (a₀/4))`; even `m` terminates on
/// sublattice A. Returns the envelope-weighted share of A terminations.
pub fn sublattice_fraction(env: &Envelope2D, surface: &RoughSurface) -> SublatticeFraction {
    let mut p = 0.0;
    for (i, j, w) in env.surface_weights(surface) {
        let m = (surface.at(i, j) / MONOLAYER).floor() as i64;
        if m.rem_euclid(2) == 0 {
            p += w;
        }
    }
    SublatticeFraction {
        p_a: p.clamp(0.0, 1.0),
    }
}

/// β = β_max·(2p_A − 1).
pub fn dresselhaus_from_fraction(p: SublatticeFraction, beta_max: f64) -> Result<f64> {
    if !(beta_max > 0.0 && beta_max.is_finite()) {
        return Err(Error::param("beta_max", "must be positive"));
    }
    Ok(beta_max * (2.0 * p.p_a.clamp(0.0, 1.0) - 1.0))
}

/// Dresselhaus bound as a linear function of vertical field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BetaMaxModel {
    /// dβ_max/dE_z, per (meV/nm).
    pub slope_per_mev_nm: f64,
    pub offset: f64,
}

impl Default for BetaMaxModel {
    fn default() -> Self {
        Self {
            slope_per_mev_nm: 1e-4,
            offset: 0.0,
        }
    }
}

impl BetaMaxModel {
    pub fn at(&self, e_z: f64) -> f64 {
        self.offset + self.slope_per_mev_nm * e_z
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const AXES: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

    #[test]
    fn isotropic_recovery() {
        let eff = AXES.map(|b| b.map(|v| v * G0));
        let g = assemble_g_matrix(&AXES, &eff).unwrap();
        for d in [[1.0, 0.0, 0.0], [0.6, 0.8, 0.0], [0.0, 0.0, -1.0]] {
            assert!((g_factor(&g, d).unwrap() - G0).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_recovery() {
        let d = 0.003;
        let eff = [[G0 + d, 0.0, 0.0], [0.0, G0 - d, 0.0], [0.0, 0.0, G0]];
        let g = assemble_g_matrix(&AXES, &eff).unwrap();
        assert!((g.g[0][0] - (G0 + d)).abs() < 1e-14);
        assert!((g.g[1][1] - (G0 - d)).abs() < 1e-14);
        assert!(g.g[0][1].abs() < 1e-15);
    }

    #[test]
    fn singular_fields_rejected() {
        let fields = [[1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 0.0, 1.0]];
        assert!(matches!(
            assemble_g_matrix(&fields, &AXES),
            Err(Error::Conditioning(_))
        ));
    }

    #[test]
    fn frequency_per_tesla() {
        let f = larmor_ghz(G0, 1.0);
        assert!((f / 27.9 - 1.0).abs() < 0.005);
    }

    #[test]
    fn non_unit_direction() {
        assert!(g_factor(&GTensor::isotropic(G0), [1.0, 1.0, 0.0]).is_err());
    }

    #[test]
    fn exact_sinusoid_fit() {
        let phis: Vec<f64> = (0..8)
            .map(|i| i as f64 * std::f64::consts::PI / 8.0 * 1.9)
            .collect();
        let g: Vec<f64> = phis
            .iter()
            .map(|p| G0 + 0.001 + 0.004 * (2.0 * p).sin())
            .collect();
        let c = fit_sinusoid(&phis, &g).unwrap();
        assert!((c.alpha - 0.001).abs() < 1e-12);
        assert!((c.beta - 0.004).abs() < 1e-12);
        let flat = fit_sinusoid(&phis, &vec![G0; 8]).unwrap();
        assert!(flat.alpha.abs() < 1e-15 && flat.beta.abs() < 1e-15);
    }

    #[test]
    fn narrow_span_rejected() {
        assert!(fit_sinusoid(&[0.0, 0.2, 0.4], &[G0; 3]).is_err());
    }

    #[test]
    fn dresselhaus_limits() {
        let b = |p| dresselhaus_from_fraction(SublatticeFraction { p_a: p }, 0.002).unwrap();
        assert_eq!(b(1.0), 0.002);
        assert_eq!(b(0.5), 0.0);
        assert_eq!(b(0.0), -0.002);
    }
}
