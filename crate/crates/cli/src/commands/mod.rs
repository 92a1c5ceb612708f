//! Subcommand implementations. Each returns an [`Outcome`] listing the
//! files it read and wrote so the caller can record a manifest.

mod pimc;
mod pot;
mod report;
mod so;
mod surface;
mod valley;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::args::{Command, PimcCmd, PotCmd, SoCmd, SurfaceCmd, ValleyCmd};
use crate::error::CliError;

#[derive(Debug, Default)]
pub struct Outcome {
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    /// The `--out` location, used to place the manifest and to make output
    /// paths relocatable.
    pub out: Option<PathBuf>,
    pub seeds: Vec<u64>,
    /// Results were written but a numerical check failed.
    pub failed: bool,
}

impl Outcome {
    fn new(out: Option<&Path>) -> Self {
        Self {
            out: out.map(Path::to_path_buf),
            ..Self::default()
        }
    }

    fn input(&mut self, p: &Path) {
        self.inputs.push(p.to_path_buf());
    }

    fn output(&mut self, p: &Path) {
        self.outputs.push(p.to_path_buf());
    }
}

pub fn execute(cmd: &Command) -> Result<Outcome, CliError> {
    match cmd {
        Command::Surface(SurfaceCmd::Gen(a)) => surface::generate(a),
        Command::Surface(SurfaceCmd::Psd(a)) => surface::psd(a),
        Command::Surface(SurfaceCmd::Rms(a)) => surface::rms(a),
        Command::Pot(PotCmd::Fit(a)) => pot::fit(a),
        Command::Pot(PotCmd::Sweep(a)) => pot::sweep(a),
        Command::Valley(ValleyCmd::Grid(a)) => valley::grid(a),
        Command::Valley(ValleyCmd::Phase(a)) => valley::phase(a),
        Command::So(SoCmd::Fit(a)) => so::fit(a),
        Command::So(SoCmd::Gmatrix(a)) => so::gmatrix(a),
        Command::Pimc(PimcCmd::Exchange(a)) => pimc::exchange(a),
        Command::Pimc(PimcCmd::Validate(a)) => pimc::validate(a),
        Command::Report(a) => report::run(a),
        Command::Replay(_) => Err(CliError::param("replay is handled by the dispatcher")),
    }
}

/// Pretty JSON on stdout, and in `out` when given.
fn emit_json<T: Serialize>(
    value: &T,
    out: Option<&Path>,
    outcome: &mut Outcome,
) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    if let Some(p) = out {
        create_parent(p)?;
        fs::write(p, &text)?;
        outcome.output(p);
    }
    std::io::stdout().write_all(text.as_bytes())?;
    Ok(())
}

fn create_parent(p: &Path) -> Result<(), CliError> {
    if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(())
}

fn csv_writer(p: &Path) -> Result<csv::Writer<fs::File>, CliError> {
    create_parent(p)?;
    Ok(csv::Writer::from_path(p)?)
}

/// Least-squares slope and intercept of `y` against `x`.
fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len() as f64;
    if x.len() < 2 {
        return None;
    }
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Plain CSV of named `f64` columns.
fn read_columns(path: &Path, names: &[&str]) -> Result<Vec<Vec<f64>>, CliError> {
    let mut r = csv::Reader::from_path(path)
        .map_err(|e| CliError::param(format!("{}: {e}", path.display())))?;
    let header = r.headers()?.clone();
    let idx: Vec<usize> = names
        .iter()
        .map(|n| {
            header
                .iter()
                .position(|h| h.trim() == *n)
                .ok_or_else(|| CliError::param(format!("{}: missing column `{n}`", path.display())))
        })
        .collect::<Result<_, _>>()?;
    let mut cols = vec![Vec::new(); names.len()];
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        for (c, &i) in idx.iter().enumerate() {
            let v: f64 = rec
                .get(i)
                .and_then(|s| s.trim().parse().ok())
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| {
                    CliError::param(format!(
                        "{}: bad value on data line {}",
                        path.display(),
                        line + 1
                    ))
                })?;
            cols[c].push(v);
        }
    }
    Ok(cols)
}
