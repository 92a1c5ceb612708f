use serde::{Deserialize, Serialize};

use super::RoughSurface;
use crate::{Error, Result};

/// Windowed RMS as a function of window width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmsCurve {
    pub lambdas: Vec<f64>,
    pub rms: Vec<f64>,
    /// Standard error of each mean, from the spread of window RMS values.
    pub std_err: Vec<f64>,
    pub n_windows: Vec<usize>,
}

/// Anything that can be traversed as a set of equally spaced 1D lines.
pub trait LineSource {
    fn spacing(&self) -> f64;
    /// Length of the longest line, in samples.
    fn line_len(&self) -> usize;
    fn for_each_line(&self, f: &mut dyn FnMut(&[f64]));
}

/// A single height profile.
#[derive(Debug, Clone, Copy)]
pub struct Profile<'a> {
    pub z: &'a [f64],
    pub dx: f64,
}

impl LineSource for Profile<'_> {
    fn spacing(&self) -> f64 {
        self.dx
    }
    fn line_len(&self) -> usize {
        self.z.len()
    }
    fn for_each_line(&self, f: &mut dyn FnMut(&[f64])) {
        f(self.z)
    }
}

/// Every row and every column of the grid.
impl LineSource for RoughSurface {
    fn spacing(&self) -> f64 {
        self.dx()
    }
    fn line_len(&self) -> usize {
        self.nx().max(self.ny())
    }
    fn for_each_line(&self, f: &mut dyn FnMut(&[f64])) {
        for iy in 0..self.ny() {
            f(self.row(iy));
        }
        let mut col = vec![0.0; self.ny()];
        for ix in 0..self.nx() {
            for (iy, c) in col.iter_mut().enumerate() {
                *c = self.at(ix, iy);
            }
            f(&col);
        }
    }
}

/// Window start offsets tiling `len` samples with width `w`; a final window
/// is aligned to the end when `w` does not divide `len`.
fn window_starts(len: usize, w: usize) -> Vec<usize> {
    let mut starts: Vec<usize> = (0..).map(|k| k * w).take_while(|s| s + w <= len).collect();
    if let Some(&last) = starts.last() {
        if last + w < len {
            starts.push(len - w);
        }
    }
    starts
}

fn window_rms(z: &[f64]) -> f64 {
    // Referencing the first sample keeps constant windows exactly zero.
    let r = z[0];
    let n = z.len() as f64;
    let m = z.iter().map(|v| v - r).sum::<f64>() / n;
    (z.iter().map(|v| (v - r - m).powi(2)).sum::<f64>() / n).sqrt()
}

/// Mean RMS of mean-subtracted, non-overlapping windows of width λ.
///
/// A window of width λ holds `round(λ/dx)` samples.
pub fn rms_of_segments(data: &dyn LineSource, lambdas: &[f64]) -> Result<RmsCurve> {
    let dx = data.spacing();
    let extent = data.line_len() as f64 * dx;
    let mut widths = Vec::with_capacity(lambdas.len());
    for (i, &lam) in lambdas.iter().enumerate() {
        if !(lam >= 2.0 * dx * (1.0 - 1e-9) && lam <= extent * (1.0 + 1e-9)) {
            return Err(Error::param(
                &format!("lambdas[{i}]"),
                format!("{lam} nm outside [{}, {}] nm", 2.0 * dx, extent),
            ));
        }
        widths.push(((lam / dx).round() as usize).max(2));
    }

    let k = lambdas.len();
    let mut sum = vec![0.0; k];
    let mut sum_sq = vec![0.0; k];
    let mut count = vec![0usize; k];
    data.for_each_line(&mut |line: &[f64]| {
        for (j, &w) in widths.iter().enumerate() {
            if w > line.len() {
                continue;
            }
            for s in window_starts(line.len(), w) {
                let r = window_rms(&line[s..s + w]);
                sum[j] += r;
                sum_sq[j] += r * r;
                count[j] += 1;
            }
        }
    });

    let mut rms = Vec::with_capacity(k);
    let mut std_err = Vec::with_capacity(k);
    for j in 0..k {
        let n = count[j].max(1) as f64;
        let m = sum[j] / n;
        let var = (sum_sq[j] / n - m * m).max(0.0);
        rms.push(m);
        std_err.push(if count[j] > 1 {
            (var / (n - 1.0)).sqrt()
        } else {
            m
        });
    }
    Ok(RmsCurve {
        lambdas: lambdas.to_vec(),
        rms,
        std_err,
        n_windows: count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiling_covers_domain() {
        assert_eq!(window_starts(10, 5), vec![0, 5]);
        assert_eq!(window_starts(11, 5), vec![0, 5, 6]);
        assert_eq!(window_starts(4, 5), Vec::<usize>::new());
    }

    #[test]
    fn flat_gives_zero() {
        let z = vec![1.7; 200];
        let c = rms_of_segments(&Profile { z: &z, dx: 0.1 }, &[1.0, 5.0, 20.0]).unwrap();
        assert!(c.rms.iter().all(|&r| r == 0.0));
    }

    #[test]
    fn out_of_range_lambda() {
        let z = vec![0.0; 100];
        let p = Profile { z: &z, dx: 0.1 };
        assert!(rms_of_segments(&p, &[0.1]).is_err());
        assert!(rms_of_segments(&p, &[10.5]).is_err());
        assert!(rms_of_segments(&p, &[10.0]).is_ok());
    }

    #[test]
    fn linear_ramp_window_rms() {
        // RMS of a ramp of slope g over w samples: g·dx·sqrt((w²−1)/12).
        let dx = 0.5;
        let z: Vec<f64> = (0..100).map(|i| 0.2 * i as f64 * dx).collect();
        let c = rms_of_segments(&Profile { z: &z, dx }, &[5.0]).unwrap();
        let expect = 0.2 * dx * ((100.0 - 1.0) / 12.0f64).sqrt();
        assert!((c.rms[0] - expect).abs() < 1e-12);
    }
}
