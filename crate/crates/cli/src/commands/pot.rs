use rough_dot::electrostatics::{build_double_dot, fit_harmonic, FitWindow, PotentialGrid};

use super::{csv_writer, emit_json, Outcome};
use crate::args::{PotFitArgs, PotSweepArgs};
use crate::error::CliError;
use crate::specs::{is_csv, read_double_dot, read_response, DoubleDotSpec};

pub fn fit(a: &PotFitArgs) -> Result<Outcome, CliError> {
    let mut outcome = Outcome::new(a.out.as_deref());
    outcome.input(&a.grid);
    let grid = if is_csv(&a.grid) {
        PotentialGrid::read_csv(&a.grid)?
    } else {
        PotentialGrid::read_binary(&a.grid)?
    };
    let w = &a.window;
    if w.len() != 6 {
        return Err(CliError::param(
            "--window takes six values x0,x1,y0,y1,z0,z1",
        ));
    }
    let window = FitWindow {
        x: (w[0], w[1]),
        y: (w[2], w[3]),
        z: (w[4], w[5]),
    };
    let result = fit_harmonic(&grid, &window)?;
    emit_json(&result, a.out.as_deref(), &mut outcome)?;
    if !result.confining {
        eprintln!("warning: fitted curvature is not confining in both lateral directions");
    }
    Ok(outcome)
}

/// Loads a double-dot file; `--response` wins over the table it names.
pub fn load_double_dot(
    pot: Option<&std::path::Path>,
    response: Option<&std::path::Path>,
    outcome: &mut Outcome,
) -> Result<(DoubleDotSpec, rough_dot::electrostatics::GateResponse), CliError> {
    let (spec, table) = match pot {
        Some(p) => {
            outcome.input(p);
            read_double_dot(p)?
        }
        None => (DoubleDotSpec::default(), None),
    };
    let table = response.map(|p| p.to_path_buf()).or(table);
    if let Some(t) = &table {
        outcome.input(t);
    }
    Ok((spec, read_response(table.as_deref())?))
}

pub fn sweep(a: &PotSweepArgs) -> Result<Outcome, CliError> {
    if a.steps < 2 {
        return Err(CliError::param("--steps must be at least 2"));
    }
    let mut outcome = Outcome::new(Some(&a.out));
    let (spec, response) = load_double_dot(a.pot.as_deref(), a.response.as_deref(), &mut outcome)?;
    let (left, right) = (spec.left.dot()?, spec.right.dot()?);
    let rule = spec.merge_rule();
    let mut w = csv_writer(&a.out)?;
    w.write_record([
        "v",
        "x_left_nm",
        "x_right_nm",
        "ez_left_mev_nm",
        "ez_right_mev_nm",
        "separation_nm",
        "barrier_mev",
    ])?;
    for i in 0..a.steps {
        let v = a.from + (a.to - a.from) * i as f64 / (a.steps - 1) as f64;
        let p = build_double_dot(&left, &right, v, &response, &a.gate, rule)?;
        w.write_record(
            [
                v,
                p.left.x_c,
                p.right.x_c,
                p.left.e_z,
                p.right.e_z,
                p.separation(),
                p.barrier_height,
            ]
            .map(|x| x.to_string()),
        )?;
    }
    w.flush()?;
    outcome.output(&a.out);
    Ok(outcome)
}
