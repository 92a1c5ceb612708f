use serde::{Deserialize, Serialize};

use super::{apply_gate, GateResponse, GateSlope, HarmonicDot};
use crate::{Error, Result};

/// How the two single-dot parabolas are joined into one landscape.
///
/// Lateral potential:
/// `V(x, y) = smin_s(V_L, V_R) + B(v_j)·exp(−(x − x_m)²/(2w²))` with
/// `smin_s(a, b) = −s·ln(e^{−a/s} + e^{−b/s})`, `x_m` the midpoint between
/// the gate-shifted centers and `B(v_j) = barrier_mev − barrier_slope·v_j`.
/// The vertical field is interpolated with the soft-min weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MergeRule {
    /// Smooth-min width s, meV.
    pub softness_mev: f64,
    /// Ridge height at v_j = 0, meV.
    pub barrier_mev: f64,
    /// Ridge lowering per volt on the barrier gate, meV/V.
    pub barrier_slope_mev_per_v: f64,
    /// Ridge Gaussian width, nm.
    pub barrier_width_nm: f64,
}

impl Default for MergeRule {
    fn default() -> Self {
        Self {
            softness_mev: 2.0,
            barrier_mev: 0.0,
            barrier_slope_mev_per_v: 20.0,
            barrier_width_nm: 5.0,
        }
    }
}

impl MergeRule {
    /// Plain smooth-min without a ridge term.
    pub fn smooth_min(softness_mev: f64) -> Self {
        Self {
            softness_mev,
            barrier_mev: 0.0,
            barrier_slope_mev_per_v: 0.0,
            barrier_width_nm: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.softness_mev > 0.0 && self.softness_mev.is_finite()) {
            return Err(Error::param("merge_rule.softness_mev", "must be positive"));
        }
        if !(self.barrier_width_nm > 0.0 && self.barrier_width_nm.is_finite()) {
            return Err(Error::param(
                "merge_rule.barrier_width_nm",
                "must be positive",
            ));
        }
        if !(self.barrier_mev.is_finite() && self.barrier_slope_mev_per_v.is_finite()) {
            return Err(Error::param("merge_rule", "non-finite ridge parameters"));
        }
        Ok(())
    }

    pub fn ridge_height(&self, v_j: f64) -> f64 {
        self.barrier_mev - self.barrier_slope_mev_per_v * v_j
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoubleDotPotential {
    /// Dots after the barrier-gate shift.
    pub left: HarmonicDot,
    pub right: HarmonicDot,
    pub v_j: f64,
    /// Lateral potential at the midpoint, meV.
    pub barrier_height: f64,
    pub merge_rule: MergeRule,
    pub j_gate: String,
    pub j_gate_coupling: [GateSlope; 2],
    /// Energy offset: +ε/2 on the left well, −ε/2 on the right, meV.
    pub detuning: f64,
    ridge: f64,
    midpoint: (f64, f64),
}

impl DoubleDotPotential {
    pub fn separation(&self) -> f64 {
        self.right.x_c - self.left.x_c
    }

    pub fn midpoint(&self) -> (f64, f64) {
        self.midpoint
    }

    pub fn with_detuning(mut self, detuning: f64) -> Self {
        self.detuning = detuning;
        self.barrier_height = self.lateral(self.midpoint.0, self.midpoint.1);
        self
    }

    fn wells(&self, x: f64, y: f64) -> (f64, f64) {
        (
            self.left.lateral(x, y) + 0.5 * self.detuning,
            self.right.lateral(x, y) - 0.5 * self.detuning,
        )
    }

    /// Smooth-min value and left-well weight.
    fn merge(&self, a: f64, b: f64) -> (f64, f64) {
        let s = self.merge_rule.softness_mev;
        let m = a.min(b);
        let ea = (-(a - m) / s).exp();
        let eb = (-(b - m) / s).exp();
        (m - s * (ea + eb).ln(), ea / (ea + eb))
    }

    /// Lateral potential (no field term), meV.
    pub fn lateral(&self, x: f64, y: f64) -> f64 {
        let (a, b) = self.wells(x, y);
        let (v, _) = self.merge(a, b);
        let w = self.merge_rule.barrier_width_nm;
        v + self.ridge * (-(x - self.midpoint.0).powi(2) / (2.0 * w * w)).exp()
    }

    /// Vertical field at `(x, y)`, interpolated between the two dots.
    pub fn field(&self, x: f64, y: f64) -> f64 {
        let (a, b) = self.wells(x, y);
        let (_, wl) = self.merge(a, b);
        wl * self.left.e_z + (1.0 - wl) * self.right.e_z
    }

    pub fn eval(&self, x: f64, y: f64, z: f64) -> f64 {
        let (a, b) = self.wells(x, y);
        let (v, wl) = self.merge(a, b);
        let w = self.merge_rule.barrier_width_nm;
        let ridge = self.ridge * (-(x - self.midpoint.0).powi(2) / (2.0 * w * w)).exp();
        v + ridge + z * (wl * self.left.e_z + (1.0 - wl) * self.right.e_z)
    }

    /// Mirror image about the midplane x = x_m (left and right exchanged).
    pub fn mirrored(&self) -> Self {
        let xm = self.midpoint.0;
        let flip = |d: &HarmonicDot| HarmonicDot {
            x_c: 2.0 * xm - d.x_c,
            ..*d
        };
        let mut out = self.clone();
        out.left = flip(&self.right);
        out.right = flip(&self.left);
        out.detuning = -self.detuning;
        out
    }
}

/// Shift both dots by the barrier gate at `v_j` and merge them.
pub fn build_double_dot(
    left: &HarmonicDot,
    right: &HarmonicDot,
    v_j: f64,
    response: &GateResponse,
    j_gate: &str,
    merge_rule: MergeRule,
) -> Result<DoubleDotPotential> {
    left.validate()?;
    right.validate()?;
    merge_rule.validate()?;
    if !v_j.is_finite() {
        return Err(Error::param("v_j", "must be finite"));
    }
    if right.x_c - left.x_c <= 10.0 {
        return Err(Error::Geometry(format!(
            "dots must start more than 10 nm apart (left at {} nm, right at {} nm)",
            left.x_c, right.x_c
        )));
    }
    let coupling = [response.slope(j_gate, 1)?, response.slope(j_gate, 2)?];
    let l = apply_gate(left, response, j_gate, 1, v_j)?;
    let r = apply_gate(right, response, j_gate, 2, v_j)?;
    if r.x_c - l.x_c < 2.0 {
        return Err(Error::Geometry(format!(
            "dots overlap at v_j = {v_j} V (separation {:.3} nm)",
            r.x_c - l.x_c
        )));
    }
    let midpoint = (0.5 * (l.x_c + r.x_c), 0.5 * (l.y_c + r.y_c));
    let mut pot = DoubleDotPotential {
        left: l,
        right: r,
        v_j,
        barrier_height: 0.0,
        merge_rule,
        j_gate: j_gate.to_string(),
        j_gate_coupling: coupling,
        detuning: 0.0,
        ridge: merge_rule.ridge_height(v_j),
        midpoint,
    };
    pot.barrier_height = pot.lateral(midpoint.0, midpoint.1);
    Ok(pot)
}

pub fn eval_double_dot(pot: &DoubleDotPotential, x: f64, y: f64, z: f64) -> f64 {
    pot.eval(x, y, z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(sep: f64) -> (HarmonicDot, HarmonicDot) {
        (
            HarmonicDot::isotropic(-sep / 2.0, 0.0, 0.3, 20.0).unwrap(),
            HarmonicDot::isotropic(sep / 2.0, 0.0, 0.3, 20.0).unwrap(),
        )
    }

    #[test]
    fn gate_shrinks_separation() {
        let (l, r) = pair(50.0);
        let resp = GateResponse::default();
        let total = 6.88 + 3.57;
        let v = 10.0 / total;
        let p = build_double_dot(&l, &r, v, &resp, "J1", MergeRule::default()).unwrap();
        assert!((p.separation() - 40.0).abs() < 1e-9);
        let p0 = build_double_dot(&l, &r, 0.0, &resp, "J1", MergeRule::default()).unwrap();
        assert!((p0.separation() - 50.0).abs() < 1e-12);
    }

    #[test]
    fn value_at_left_center() {
        let (l, r) = pair(50.0);
        let resp = GateResponse::default();
        let p = build_double_dot(&l, &r, 0.0, &resp, "J1", MergeRule::default())
            .unwrap()
            .with_detuning(0.4);
        assert!((p.eval(l.x_c, 0.0, 0.0) - 0.2).abs() < 1e-6);
    }

    #[test]
    fn symmetric_and_closed_form_midpoint() {
        let (l, r) = pair(40.0);
        let resp = GateResponse::symmetric_barrier("J1", 5.0);
        let rule = MergeRule::default();
        let p = build_double_dot(&l, &r, 1.0, &resp, "J1", rule).unwrap();
        for x in [0.5, 3.0, 11.0, 29.0] {
            for z in [0.0, 1.3] {
                assert!((p.eval(x, 0.7, z) - p.eval(-x, 0.7, z)).abs() < 1e-9);
            }
        }
        let half = p.separation() / 2.0;
        let expect = 0.3 * half * half - rule.softness_mev * 2f64.ln() + rule.ridge_height(1.0);
        assert!((p.barrier_height - expect).abs() < 1e-9);
    }

    #[test]
    fn overlapping_dots_rejected() {
        let (l, r) = pair(12.0);
        let resp = GateResponse::default();
        assert!(matches!(
            build_double_dot(&l, &r, 1.0, &resp, "J1", MergeRule::default()),
            Err(Error::Geometry(_))
        ));
        let (l, r) = pair(8.0);
        assert!(build_double_dot(&l, &r, 0.0, &resp, "J1", MergeRule::default()).is_err());
    }
}
