use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::RoughSurface;
use crate::stats::linear_fit;
use crate::{Error, Result};

/// Binning and fitting controls for spectral estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsdOptions {
    /// Wavelength window (nm) used for the power-law fit.
    pub fit_range: (f64, f64),
    pub bins_per_decade: usize,
}

impl Default for PsdOptions {
    fn default() -> Self {
        Self {
            fit_range: (2.0, 100.0),
            bins_per_decade: 10,
        }
    }
}

/// Power law `C(q) = c0 · q^exponent` with `exponent = −1 − 2·hurst`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub hurst: f64,
    pub c0: f64,
    pub exponent: f64,
    pub n_bins: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdEstimate {
    /// Bin wavelengths, nm, descending.
    pub wavelengths: Vec<f64>,
    /// Bin-averaged spectrum, nm³.
    pub psd1d: Vec<f64>,
    /// `None` when the spectrum vanishes or too few bins fall in range.
    pub fit: Option<PowerLawFit>,
    pub fit_range: (f64, f64),
    /// Unbinned periodogram at `q_k = 2πk/L`, `k = 1..=N/2`.
    pub q_raw: Vec<f64>,
    pub psd_raw: Vec<f64>,
    pub n_samples: usize,
}

impl PsdEstimate {
    /// Profile variance recovered from the raw periodogram (both signs of q).
    pub fn total_power(&self) -> f64 {
        if self.q_raw.is_empty() {
            return 0.0;
        }
        let dq = self.q_raw[0];
        let n = self.n_samples;
        let mut sum = 0.0;
        for (k, p) in self.psd_raw.iter().enumerate() {
            let weight = if n % 2 == 0 && k + 1 == n / 2 {
                1.0
            } else {
                2.0
            };
            sum += weight * p;
        }
        sum * dq / (2.0 * PI).powi(3)
    }

    pub fn fit_hurst(&self) -> Option<f64> {
        self.fit.map(|f| f.hurst)
    }

    pub fn fit_c0(&self) -> Option<f64> {
        self.fit.map(|f| f.c0)
    }
}

/// Which grid lines enter a surface-averaged spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axes {
    Rows,
    Columns,
    Both,
}

struct Accumulator {
    n: usize,
    dx: f64,
    fft: std::sync::Arc<dyn rustfft::Fft<f64>>,
    buf: Vec<Complex64>,
    sum: Vec<f64>,
    lines: usize,
}

impl Accumulator {
    fn new(n: usize, dx: f64) -> Self {
        let mut planner = FftPlanner::<f64>::new();
        Self {
            n,
            dx,
            fft: planner.plan_fft_forward(n),
            buf: vec![Complex64::new(0.0, 0.0); n],
            sum: vec![0.0; n / 2],
            lines: 0,
        }
    }

    fn add(&mut self, line: &[f64]) {
        let mean = line.iter().sum::<f64>() / self.n as f64;
        for (b, z) in self.buf.iter_mut().zip(line) {
            *b = Complex64::new(z - mean, 0.0);
        }
        self.fft.process(&mut self.buf);
        let scale = 4.0 * PI * PI * self.dx / self.n as f64;
        for k in 1..=self.n / 2 {
            self.sum[k - 1] += scale * self.buf[k].norm_sqr();
        }
        self.lines += 1;
    }

    fn finish(self, opts: &PsdOptions) -> PsdEstimate {
        let lines = self.lines.max(1) as f64;
        let psd_raw: Vec<f64> = self.sum.iter().map(|s| s / lines).collect();
        let l = self.n as f64 * self.dx;
        let q_raw: Vec<f64> = (1..=self.n / 2).map(|k| 2.0 * PI * k as f64 / l).collect();
        bin_and_fit(q_raw, psd_raw, self.n, self.dx, opts)
    }
}

fn bin_and_fit(
    q_raw: Vec<f64>,
    psd_raw: Vec<f64>,
    n: usize,
    dx: f64,
    opts: &PsdOptions,
) -> PsdEstimate {
    let bpd = opts.bins_per_decade.max(1) as f64;
    let log_min = (2.0 * dx).log10();
    let nbins = (((n as f64 * dx).log10() - log_min) * bpd).ceil().max(1.0) as usize + 1;
    let mut log_lambda = vec![0.0; nbins];
    let mut power = vec![0.0; nbins];
    let mut count = vec![0usize; nbins];
    for (q, p) in q_raw.iter().zip(&psd_raw) {
        let lam = 2.0 * PI / q;
        let b = (((lam.log10() - log_min) * bpd).floor().max(0.0) as usize).min(nbins - 1);
        log_lambda[b] += lam.log10();
        power[b] += p;
        count[b] += 1;
    }
    let mut wavelengths = Vec::new();
    let mut psd1d = Vec::new();
    for b in (0..nbins).rev() {
        if count[b] > 0 {
            wavelengths.push(10f64.powf(log_lambda[b] / count[b] as f64));
            psd1d.push(power[b] / count[b] as f64);
        }
    }

    let (lo, hi) = opts.fit_range;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (lam, p) in wavelengths.iter().zip(&psd1d) {
        if *lam >= lo && *lam <= hi && *p > 0.0 {
            xs.push((2.0 * PI / lam).log10());
            ys.push(p.log10());
        }
    }
    let fit = if xs.len() >= 2 {
        linear_fit(&xs, &ys).map(|f| PowerLawFit {
            hurst: (-f.slope - 1.0) / 2.0,
            c0: 10f64.powf(f.intercept),
            exponent: f.slope,
            n_bins: xs.len(),
        })
    } else {
        None
    };

    PsdEstimate {
        wavelengths,
        psd1d,
        fit,
        fit_range: opts.fit_range,
        q_raw,
        psd_raw,
        n_samples: n,
    }
}

fn check_options(opts: &PsdOptions) -> Result<()> {
    let (lo, hi) = opts.fit_range;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::param(
            "fit_range",
            format!("({lo}, {hi}) is not an increasing positive range"),
        ));
    }
    if opts.bins_per_decade == 0 {
        return Err(Error::param("bins_per_decade", "must be at least 1"));
    }
    Ok(())
}

/// Mean-subtracted periodogram of a single profile, log-binned, with a
/// log-log least-squares power-law fit inside `opts.fit_range`.
pub fn estimate_psd_1d(profile: &[f64], dx: f64, opts: &PsdOptions) -> Result<PsdEstimate> {
    if profile.len() < 32 {
        return Err(Error::param(
            "profile",
            format!("{} samples; at least 32 required", profile.len()),
        ));
    }
    if !(dx > 0.0 && dx.is_finite()) {
        return Err(Error::param("dx", "grid spacing must be positive"));
    }
    if profile.iter().any(|z| !z.is_finite()) {
        return Err(Error::param("profile", "non-finite height"));
    }
    check_options(opts)?;
    let mut acc = Accumulator::new(profile.len(), dx);
    acc.add(profile);
    Ok(acc.finish(opts))
}

/// Periodogram averaged over `n_lines` evenly spaced rows and/or columns.
pub fn estimate_psd_2d_average(
    surface: &RoughSurface,
    n_lines: usize,
    axes: Axes,
    opts: &PsdOptions,
) -> Result<PsdEstimate> {
    if n_lines == 0 {
        return Err(Error::param("n_lines", "must be at least 1"));
    }
    check_options(opts)?;
    let (nx, ny) = (surface.nx(), surface.ny());
    let use_rows = matches!(axes, Axes::Rows | Axes::Both);
    let use_cols = matches!(axes, Axes::Columns | Axes::Both);
    if use_rows && n_lines > ny || use_cols && n_lines > nx {
        return Err(Error::param(
            "n_lines",
            format!("{n_lines} exceeds the number of grid lines"),
        ));
    }
    if use_cols && use_rows && nx != ny {
        return Err(Error::param("axes", "rows and columns differ in length"));
    }
    let len = if use_rows { nx } else { ny };
    if len < 32 {
        return Err(Error::param("surface", "lines shorter than 32 samples"));
    }
    let mut acc = Accumulator::new(len, surface.dx());
    if use_rows {
        for i in 0..n_lines {
            acc.add(surface.row(i * ny / n_lines));
        }
    }
    if use_cols {
        for i in 0..n_lines {
            acc.add(&surface.column(i * nx / n_lines));
        }
    }
    Ok(acc.finish(opts))
}
