//! Standalone SVG charts. Every chart is written next to the CSV that
//! holds its data.

use std::path::Path;

use plotters::coord::ranged1d::{AsRangedCoord, ValueFormatter};
use plotters::prelude::*;

use crate::error::CliError;

const SIZE: (u32, u32) = (720, 480);

fn fail(e: impl std::fmt::Display) -> CliError {
    CliError::param(format!("plot: {e}"))
}

fn finite(values: &[f64]) -> Vec<f64> {
    values.iter().copied().filter(|v| v.is_finite()).collect()
}

fn span(values: &[f64]) -> (f64, f64) {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        let pad = lo.abs().max(1.0) * 0.05;
        (lo - pad, hi + pad)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

pub fn histogram(
    path: &Path,
    title: &str,
    x_label: &str,
    values: &[f64],
    bins: usize,
) -> Result<(), CliError> {
    let v = finite(values);
    if v.is_empty() || bins == 0 {
        return Ok(());
    }
    let (lo, hi) = span(&v);
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for x in &v {
        counts[(((x - lo) / width) as usize).min(bins - 1)] += 1;
    }
    let top = *counts.iter().max().unwrap_or(&1) as f64 * 1.1;
    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(fail)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 22))
        .margin(12)
        .x_label_area_size(45)
        .y_label_area_size(55)
        .build_cartesian_2d(lo..hi, 0.0..top)
        .map_err(fail)?;
    chart
        .configure_mesh()
        .x_desc(x_label)
        .y_desc("dots")
        .draw()
        .map_err(fail)?;
    chart
        .draw_series(counts.iter().enumerate().map(|(i, &c)| {
            let a = lo + i as f64 * width;
            Rectangle::new([(a, 0.0), (a + width, c as f64)], BLUE.mix(0.55).filled())
        }))
        .map_err(fail)?;
    root.present().map_err(fail)
}

fn scatter_on<X, Y>(
    path: &Path,
    title: &str,
    labels: (&str, &str),
    x: X,
    y: Y,
    pts: &[(f64, f64)],
    joined: bool,
) -> Result<(), CliError>
where
    X: AsRangedCoord<Value = f64>,
    Y: AsRangedCoord<Value = f64>,
    X::CoordDescType: ValueFormatter<f64>,
    Y::CoordDescType: ValueFormatter<f64>,
{
    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(fail)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 22))
        .margin(12)
        .x_label_area_size(45)
        .y_label_area_size(65)
        .build_cartesian_2d(x, y)
        .map_err(fail)?;
    chart
        .configure_mesh()
        .x_desc(labels.0)
        .y_desc(labels.1)
        .draw()
        .map_err(fail)?;
    if joined {
        chart
            .draw_series(LineSeries::new(pts.iter().copied(), &BLUE))
            .map_err(fail)?;
    }
    chart
        .draw_series(pts.iter().map(|&p| Circle::new(p, 3, RED.filled())))
        .map_err(fail)?;
    root.present().map_err(fail)
}

fn usable(pts: &[(f64, f64)], log_x: bool, log_y: bool) -> Vec<(f64, f64)> {
    pts.iter()
        .copied()
        .filter(|&(x, y)| {
            x.is_finite() && y.is_finite() && (!log_x || x > 0.0) && (!log_y || y > 0.0)
        })
        .collect()
}

fn log_span(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = values.collect();
    let (lo, hi) = (
        v.iter().copied().fold(f64::INFINITY, f64::min),
        v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    );
    if hi > lo {
        (lo / 1.5, hi * 1.5)
    } else {
        (lo / 2.0, lo * 2.0)
    }
}

/// Scatter plot, optionally with a logarithmic y axis.
pub fn scatter(
    path: &Path,
    title: &str,
    labels: (&str, &str),
    pts: &[(f64, f64)],
    log_y: bool,
) -> Result<(), CliError> {
    let p = usable(pts, false, log_y);
    if p.is_empty() {
        return Ok(());
    }
    let xs: Vec<f64> = p.iter().map(|q| q.0).collect();
    let (x0, x1) = span(&xs);
    if log_y {
        let (y0, y1) = log_span(p.iter().map(|q| q.1));
        scatter_on(path, title, labels, x0..x1, (y0..y1).log_scale(), &p, false)
    } else {
        let ys: Vec<f64> = p.iter().map(|q| q.1).collect();
        let (y0, y1) = span(&ys);
        scatter_on(path, title, labels, x0..x1, y0..y1, &p, false)
    }
}

/// Joined points on a log-log or semi-log grid.
pub fn curve(
    path: &Path,
    title: &str,
    labels: (&str, &str),
    pts: &[(f64, f64)],
    log_x: bool,
) -> Result<(), CliError> {
    let p = usable(pts, log_x, true);
    if p.is_empty() {
        return Ok(());
    }
    let (y0, y1) = log_span(p.iter().map(|q| q.1));
    if log_x {
        let (x0, x1) = log_span(p.iter().map(|q| q.0));
        scatter_on(
            path,
            title,
            labels,
            (x0..x1).log_scale(),
            (y0..y1).log_scale(),
            &p,
            true,
        )
    } else {
        let xs: Vec<f64> = p.iter().map(|q| q.0).collect();
        let (x0, x1) = span(&xs);
        scatter_on(path, title, labels, x0..x1, (y0..y1).log_scale(), &p, true)
    }
}
