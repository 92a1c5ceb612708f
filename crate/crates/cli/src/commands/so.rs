use serde_json::json;

use rough_dot::spinorbit::{assemble_g_matrix, fit_sinusoid, g_factor};

use super::{emit_json, read_columns, Outcome};
use crate::args::{SoFitArgs, SoGmatrixArgs};
use crate::error::CliError;
use crate::specs::{read_json, FieldsSpec, FIELDS_SCHEMA};

pub fn fit(a: &SoFitArgs) -> Result<Outcome, CliError> {
    let mut outcome = Outcome::new(a.out.as_deref());
    outcome.input(&a.angles);
    let cols = read_columns(&a.angles, &["phi_rad", "g"])?;
    let c = fit_sinusoid(&cols[0], &cols[1])?;
    let value =
        json!({ "alpha": c.alpha, "beta": c.beta, "residual": c.residual, "g_iso": c.g_iso });
    emit_json(&value, a.out.as_deref(), &mut outcome)?;
    Ok(outcome)
}

/// In-plane sweep samples of the tensor, 36 angles over a half turn.
const SWEEP_ANGLES: usize = 36;

pub fn gmatrix(a: &SoGmatrixArgs) -> Result<Outcome, CliError> {
    let mut outcome = Outcome::new(a.out.as_deref());
    outcome.input(&a.fields);
    let spec: FieldsSpec = read_json(&a.fields, "fields file")?;
    if let Some(s) = &spec.schema {
        if s != FIELDS_SCHEMA {
            return Err(CliError::param(format!(
                "schema: expected `{FIELDS_SCHEMA}`, found `{s}`"
            )));
        }
    }
    let g = assemble_g_matrix(&spec.applied_t, &spec.effective_t)?;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let phis: Vec<f64> = (0..SWEEP_ANGLES)
        .map(|i| i as f64 * std::f64::consts::PI / SWEEP_ANGLES as f64)
        .collect();
    let gs: Vec<f64> = phis
        .iter()
        .map(|p| g_factor(&g, [p.cos(), p.sin(), 0.0]))
        .collect::<Result<_, _>>()?;
    let c = fit_sinusoid(&phis, &gs)?;
    let value = json!({
        "g": g.g,
        "singular_values": g.singular_values(),
        "g_100": g_factor(&g, [1.0, 0.0, 0.0])?,
        "g_010": g_factor(&g, [0.0, 1.0, 0.0])?,
        "g_001": g_factor(&g, [0.0, 0.0, 1.0])?,
        "g_110": g_factor(&g, [r, r, 0.0])?,
        "alpha": c.alpha,
        "beta": c.beta,
        "residual": c.residual,
    });
    emit_json(&value, a.out.as_deref(), &mut outcome)?;
    Ok(outcome)
}
