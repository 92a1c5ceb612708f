use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::grid::DotObservables;
use super::vod::{exchange_vod, vod, TunabilityInput};
use crate::error::Result;
use crate::stats::{circular_variance, histogram, mean, std_dev, Histogram};

pub const REPORT_SCHEMA: &str = "rough-dot/report-v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSummary {
    pub name: String,
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub histogram: Histogram,
}

impl ParameterSummary {
    pub fn of(name: &str, values: &[f64]) -> Self {
        let v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
        Self {
            name: name.to_string(),
            n: v.len(),
            mean: mean(&v),
            std: if v.is_empty() { f64::NAN } else { std_dev(&v) },
            min: v.iter().copied().fold(f64::INFINITY, f64::min),
            max: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            histogram: histogram(&v, 12),
        }
    }
}

/// Circular variance of φ_v among the largest and smallest splittings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseQuartiles {
    pub per_quartile: usize,
    pub top_circular_variance: f64,
    pub bottom_circular_variance: f64,
}

impl PhaseQuartiles {
    pub fn of(rows: &[DotObservables]) -> Option<Self> {
        let mut pairs: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.ok())
            .filter_map(|r| r.phase.map(|p| (r.splitting, p)))
            .collect();
        let q = pairs.len() / 4;
        if q < 2 {
            return None;
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let phases = |s: &[(f64, f64)]| s.iter().map(|p| p.1).collect::<Vec<_>>();
        Some(Self {
            per_quartile: q,
            bottom_circular_variance: circular_variance(&phases(&pairs[..q])),
            top_circular_variance: circular_variance(&phases(&pairs[pairs.len() - q..])),
        })
    }
}

/// Published VOD values for comparison, volts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceVod {
    pub valley_splitting: f64,
    pub g_110: f64,
    pub g_100: f64,
    pub exchange: f64,
}

impl Default for ReferenceVod {
    fn default() -> Self {
        Self {
            valley_splitting: 0.58,
            g_110: 9.1,
            g_100: 0.23,
            exchange: 0.09,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VodTable {
    /// VOD of the valley splitting with the ensemble-mean lever arm, V.
    pub valley_splitting: Option<f64>,
    /// Same with each dot's own lever arm, V.
    pub valley_splitting_per_dot: Option<f64>,
    /// Mean dVS/dV over dots with reliable gradients, meV/V.
    pub vs_tunability: Option<f64>,
    /// VOD of g along [110]; depends on the β_max calibration, V.
    pub g_110: Option<f64>,
    /// g along [100] carries no roughness dependence in this model.
    pub g_100: Option<f64>,
    pub exchange: Option<f64>,
    pub notes: Vec<String>,
    pub reference: ReferenceVod,
}

/// Exchange couplings supplied from separate path-integral runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExchangeInput {
    pub j_uev: Vec<f64>,
    /// `d log₁₀J / dV` on the exchange gate at the operating point.
    pub dlog10j_dv: f64,
    /// Interdot distance per realization, nm.
    #[serde(default)]
    pub distances: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariabilityReport {
    pub schema: String,
    pub n_dots: usize,
    pub n_failed: usize,
    pub summaries: Vec<ParameterSummary>,
    pub phase_quartiles: Option<PhaseQuartiles>,
    /// `log₁₀(VS_max/VS_min)` over non-degenerate dots.
    pub splitting_decades: f64,
    pub vod: VodTable,
    pub exchange: Option<ExchangeInput>,
    pub rows: Vec<DotObservables>,
}

impl VariabilityReport {
    pub fn summary(&self, name: &str) -> Option<&ParameterSummary> {
        self.summaries.iter().find(|s| s.name == name)
    }
}

fn column(rows: &[&DotObservables], f: impl Fn(&DotObservables) -> f64) -> Vec<f64> {
    rows.iter().map(|r| f(r)).collect()
}

pub fn build_report(
    rows: Vec<DotObservables>,
    exchange: Option<ExchangeInput>,
) -> Result<VariabilityReport> {
    let good: Vec<&DotObservables> = rows.iter().filter(|r| r.ok()).collect();
    let split_ok: Vec<&DotObservables> = good.iter().copied().filter(|r| !r.degenerate).collect();
    let vs = column(&good, |r| r.splitting);
    let mut summaries = vec![
        ParameterSummary::of("displacement_x", &column(&good, |r| r.displacement_x)),
        ParameterSummary::of("displacement_y", &column(&good, |r| r.displacement_y)),
        ParameterSummary::of("displacement", &column(&good, |r| r.displacement)),
        ParameterSummary::of("spread_x", &column(&good, |r| r.spread_x)),
        ParameterSummary::of("spread_y", &column(&good, |r| r.spread_y)),
        ParameterSummary::of("splitting", &vs),
        ParameterSummary::of(
            "log10_splitting",
            &column(&split_ok, |r| r.splitting.log10()),
        ),
        ParameterSummary::of("phase", &column(&split_ok, |r| r.phase.unwrap_or(f64::NAN))),
        ParameterSummary::of("p_a", &column(&good, |r| r.p_a)),
        ParameterSummary::of("beta", &column(&good, |r| r.beta)),
        ParameterSummary::of("g_110", &column(&good, |r| r.g_110)),
        ParameterSummary::of("energy", &column(&good, |r| r.energy)),
    ];
    if let Some(ex) = &exchange {
        let logs: Vec<f64> = ex.j_uev.iter().map(|j| j.log10()).collect();
        summaries.push(ParameterSummary::of("log10_j_uev", &logs));
    }
    let logs = column(&split_ok, |r| r.splitting.log10());
    let splitting_decades = if logs.is_empty() {
        0.0
    } else {
        logs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            - logs.iter().copied().fold(f64::INFINITY, f64::min)
    };

    let mut notes = vec![
        "g_110 depends on the beta_max calibration".to_string(),
        "g_100 carries no roughness dependence without a Rashba model".to_string(),
    ];
    let reliable: Vec<&DotObservables> = good
        .iter()
        .copied()
        .filter(|r| !r.gradient_unreliable && r.dvs_dv.is_some())
        .collect();
    let vs_tunability =
        (!reliable.is_empty()).then(|| mean(&column(&reliable, |r| r.dvs_dv.unwrap_or(f64::NAN))));
    let valley_splitting = match vs_tunability {
        Some(t) if t != 0.0 && !vs.is_empty() => Some(vod(&vs, TunabilityInput::Scalar(t))?),
        _ => None,
    };
    let per_dot: Option<Vec<f64>> = good.iter().map(|r| r.dvs_dv).collect();
    let valley_splitting_per_dot = per_dot.and_then(|t| vod(&vs, TunabilityInput::PerDot(&t)).ok());
    let beta_t: Vec<f64> = good.iter().filter_map(|r| r.dbeta_dv).collect();
    let g_110 = if beta_t.len() == good.len() && !beta_t.is_empty() {
        let t = mean(&beta_t);
        if t != 0.0 {
            Some(vod(
                &column(&good, |r| r.g_110),
                TunabilityInput::Scalar(t),
            )?)
        } else {
            notes.push("g_110 lever arm vanishes; VOD undefined".to_string());
            None
        }
    } else {
        None
    };
    let exchange_v = match &exchange {
        Some(ex) if !ex.j_uev.is_empty() => Some(exchange_vod(&ex.j_uev, ex.dlog10j_dv)?),
        _ => None,
    };
    if good.len() < rows.len() {
        notes.push(format!(
            "{} dots failed and are excluded",
            rows.len() - good.len()
        ));
    }
    Ok(VariabilityReport {
        schema: REPORT_SCHEMA.to_string(),
        n_dots: rows.len(),
        n_failed: rows.len() - good.len(),
        summaries,
        phase_quartiles: PhaseQuartiles::of(&rows),
        splitting_decades,
        vod: VodTable {
            valley_splitting,
            valley_splitting_per_dot,
            vs_tunability,
            g_110,
            g_100: None,
            exchange: exchange_v,
            notes,
            reference: ReferenceVod::default(),
        },
        exchange,
        rows,
    })
}

pub fn write_dots_csv(path: &Path, rows: &[DotObservables]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `report.json` and `dots.csv` into `dir`.
pub fn write_report(dir: &Path, report: &VariabilityReport) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(
        dir.join("report.json"),
        serde_json::to_string_pretty(report)?,
    )?;
    write_dots_csv(&dir.join("dots.csv"), &report.rows)
}
