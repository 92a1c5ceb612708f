//! Small statistics helpers shared by the analysis modules.

use serde::{Deserialize, Serialize};

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population standard deviation (divides by n).
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64).sqrt()
}

/// Sample standard deviation (divides by n - 1).
pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Ordinary least-squares line `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope; zero for two points.
    pub slope_err: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let mx = mean(x);
    let my = mean(y);
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_err = if n > 2 {
        let ss: f64 = x
            .iter()
            .zip(y)
            .map(|(a, b)| (b - intercept - slope * a).powi(2))
            .sum();
        (ss / (n - 2) as f64 / sxx).sqrt()
    } else {
        0.0
    };
    Some(LineFit {
        slope,
        intercept,
        slope_err,
    })
}

/// Pearson correlation coefficient; `None` when either input is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let mx = mean(x);
    let my = mean(y);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// Circular variance `1 - |<e^{iφ}>|` in [0, 1].
pub fn circular_variance(phases: &[f64]) -> f64 {
    if phases.is_empty() {
        return f64::NAN;
    }
    let (s, c) = phases
        .iter()
        .fold((0.0, 0.0), |(s, c), p| (s + p.sin(), c + p.cos()));
    let n = phases.len() as f64;
    1.0 - ((s / n).powi(2) + (c / n).powi(2)).sqrt()
}

/// Wrap an angle into (-π, π].
pub fn wrap_phase(phi: f64) -> f64 {
    use std::f64::consts::PI;
    let mut p = phi.rem_euclid(2.0 * PI);
    if p > PI {
        p -= 2.0 * PI;
    }
    p
}

/// Mean and standard error from non-overlapping block averages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub n_blocks: usize,
    /// Integrated autocorrelation time in samples, from the block variance
    /// relative to the naive variance.
    pub tau_int: f64,
}

pub fn block_average(samples: &[f64], n_blocks: usize) -> BlockEstimate {
    let n_blocks = n_blocks.max(2).min(samples.len().max(2));
    let len = samples.len() / n_blocks;
    if len == 0 {
        return BlockEstimate {
            mean: mean(samples),
            std_err: f64::NAN,
            n_blocks: 0,
            tau_int: f64::NAN,
        };
    }
    let blocks: Vec<f64> = samples.chunks_exact(len).take(n_blocks).map(mean).collect();
    let used = &samples[..len * n_blocks];
    let m = mean(used);
    let block_var = sample_std(&blocks).powi(2);
    let naive_var = sample_std(used).powi(2);
    let tau_int = if naive_var > 0.0 {
        0.5 * len as f64 * block_var / naive_var
    } else {
        0.5
    };
    BlockEstimate {
        mean: m,
        std_err: (block_var / n_blocks as f64).sqrt(),
        n_blocks,
        tau_int,
    }
}

/// Equal-width histogram over [min, max] of the data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

pub fn histogram(xs: &[f64], n_bins: usize) -> Histogram {
    let finite: Vec<f64> = xs.iter().copied().filter(|x| x.is_finite()).collect();
    let n_bins = n_bins.max(1);
    if finite.is_empty() {
        return Histogram {
            edges: vec![],
            counts: vec![],
        };
    }
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        hi = lo + 1.0;
    }
    let w = (hi - lo) / n_bins as f64;
    let edges = (0..=n_bins).map(|i| lo + w * i as f64).collect();
    let mut counts = vec![0; n_bins];
    for x in finite {
        let k = (((x - lo) / w) as usize).min(n_bins - 1);
        counts[k] += 1;
    }
    Histogram { edges, counts }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_line() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.5 * v).collect();
        let f = linear_fit(&x, &y).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-12);
        assert!((f.intercept - 2.0).abs() < 1e-12);
        assert!((pearson(&x, &y).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn circular_variance_limits() {
        assert!(circular_variance(&[0.3, 0.3, 0.3]) < 1e-12);
        assert!((circular_variance(&[0.0, std::f64::consts::PI]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wrap_is_half_open() {
        use std::f64::consts::PI;
        assert!((wrap_phase(PI) - PI).abs() < 1e-12);
        assert!((wrap_phase(-PI) - PI).abs() < 1e-12);
        assert!((wrap_phase(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn blocks_of_iid_data() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 7919) % 1000) as f64).collect();
        let b = block_average(&xs, 10);
        assert!((b.mean - 499.5).abs() < 1e-9);
        assert_eq!(b.n_blocks, 10);
    }
}
