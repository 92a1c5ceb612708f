use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::HarmonicDot;
use crate::{Error, Result};

const GRID_MAGIC: &[u8; 8] = b"RDPOT001";

/// Potential values (meV) on a uniform axis-aligned 3D grid, x fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialGrid {
    pub shape: [usize; 3],
    pub origin: [f64; 3],
    pub spacing: [f64; 3],
    pub values: Vec<f64>,
}

/// Axis-aligned fitting box, nm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitWindow {
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub z: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicFit {
    pub dot: HarmonicDot,
    /// Constant offset of the fitted model, meV.
    pub offset: f64,
    /// RMS residual over the window, meV.
    pub residual_rms: f64,
    /// False when a fitted curvature is not positive.
    pub confining: bool,
    pub n_points: usize,
}

impl PotentialGrid {
    pub fn new(
        shape: [usize; 3],
        origin: [f64; 3],
        spacing: [f64; 3],
        values: Vec<f64>,
    ) -> Result<Self> {
        if shape.iter().any(|&n| n < 2) {
            return Err(Error::param("shape", "each axis needs at least two nodes"));
        }
        if values.len() != shape[0] * shape[1] * shape[2] {
            return Err(Error::param("values", "length does not match shape"));
        }
        if spacing.iter().any(|&d| !(d > 0.0 && d.is_finite())) {
            return Err(Error::param("spacing", "must be positive"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("values", "non-finite potential"));
        }
        Ok(Self {
            shape,
            origin,
            spacing,
            values,
        })
    }

    pub fn from_fn(
        shape: [usize; 3],
        origin: [f64; 3],
        spacing: [f64; 3],
        f: impl Fn(f64, f64, f64) -> f64,
    ) -> Result<Self> {
        let mut v = Vec::with_capacity(shape[0] * shape[1] * shape[2]);
        for k in 0..shape[2] {
            for j in 0..shape[1] {
                for i in 0..shape[0] {
                    let (x, y, z) = (
                        origin[0] + i as f64 * spacing[0],
                        origin[1] + j as f64 * spacing[1],
                        origin[2] + k as f64 * spacing[2],
                    );
                    v.push(f(x, y, z));
                }
            }
        }
        Self::new(shape, origin, spacing, v)
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.origin[axis] + i as f64 * self.spacing[axis]
    }

    pub fn at(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[(k * self.shape[1] + j) * self.shape[0] + i]
    }

    /// Trilinear interpolation; errors outside the grid.
    pub fn eval(&self, x: f64, y: f64, z: f64) -> Result<f64> {
        let p = [x, y, z];
        let mut idx = [0usize; 3];
        let mut t = [0.0; 3];
        for a in 0..3 {
            let f = (p[a] - self.origin[a]) / self.spacing[a];
            let last = (self.shape[a] - 1) as f64;
            if !(f >= -1e-9 && f <= last + 1e-9) {
                return Err(Error::OutOfBounds { x, y });
            }
            let f = f.clamp(0.0, last);
            idx[a] = (f.floor() as usize).min(self.shape[a] - 2);
            t[a] = f - idx[a] as f64;
        }
        let mut v = 0.0;
        for dk in 0..2 {
            for dj in 0..2 {
                for di in 0..2 {
                    let w = (if di == 1 { t[0] } else { 1.0 - t[0] })
                        * (if dj == 1 { t[1] } else { 1.0 - t[1] })
                        * (if dk == 1 { t[2] } else { 1.0 - t[2] });
                    v += w * self.at(idx[0] + di, idx[1] + dj, idx[2] + dk);
                }
            }
        }
        Ok(v)
    }

    /// CSV with header `x_nm,y_nm,z_nm,V_meV`, any row order.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let headers = r.headers()?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| Error::Format(format!("missing column `{name}`")))
        };
        let cols = [col("x_nm")?, col("y_nm")?, col("z_nm")?, col("V_meV")?];
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let mut v = [0.0; 4];
            for (a, &c) in cols.iter().enumerate() {
                v[a] = rec[c]
                    .trim()
                    .parse()
                    .map_err(|e| Error::Format(format!("{}: {e}", headers[c].trim())))?;
            }
            rows.push(v);
        }
        let mut shape = [0; 3];
        let mut origin = [0.0; 3];
        let mut spacing = [0.0; 3];
        for a in 0..3 {
            let mut vals: Vec<f64> = rows.iter().map(|r| r[a]).collect();
            vals.sort_by(f64::total_cmp);
            vals.dedup_by(|p, q| (*p - *q).abs() < 1e-9);
            if vals.len() < 2 {
                return Err(Error::Format(format!(
                    "axis {a} has fewer than two coordinates"
                )));
            }
            let d = (vals[vals.len() - 1] - vals[0]) / (vals.len() - 1) as f64;
            if vals
                .iter()
                .enumerate()
                .any(|(i, v)| (v - vals[0] - i as f64 * d).abs() > 1e-6 * d.max(1.0))
            {
                return Err(Error::Format(format!("axis {a} is not uniformly spaced")));
            }
            shape[a] = vals.len();
            origin[a] = vals[0];
            spacing[a] = d;
        }
        if rows.len() != shape[0] * shape[1] * shape[2] {
            return Err(Error::Format("potential grid is incomplete".into()));
        }
        let mut values = vec![f64::NAN; rows.len()];
        for r in &rows {
            let i = ((r[0] - origin[0]) / spacing[0]).round() as usize;
            let j = ((r[1] - origin[1]) / spacing[1]).round() as usize;
            let k = ((r[2] - origin[2]) / spacing[2]).round() as usize;
            values[(k * shape[1] + j) * shape[0] + i] = r[3];
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::Format(
                "potential grid has duplicate or missing nodes".into(),
            ));
        }
        Self::new(shape, origin, spacing, values)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["x_nm", "y_nm", "z_nm", "V_meV"])?;
        for k in 0..self.shape[2] {
            for j in 0..self.shape[1] {
                for i in 0..self.shape[0] {
                    w.write_record(&[
                        self.coord(0, i).to_string(),
                        self.coord(1, j).to_string(),
                        self.coord(2, k).to_string(),
                        self.at(i, j, k).to_string(),
                    ])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Binary layout: magic `RDPOT001`, three `u64` sizes, three `f64`
    /// origins, three `f64` spacings, then values (x fastest), all LE.
    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(GRID_MAGIC)?;
        for n in self.shape {
            w.write_all(&(n as u64).to_le_bytes())?;
        }
        for v in self.origin.iter().chain(&self.spacing).chain(&self.values) {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_binary(path: &Path) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != GRID_MAGIC {
            return Err(Error::Format(format!(
                "{}: not a potential grid",
                path.display()
            )));
        }
        let mut b = [0u8; 8];
        let mut shape = [0usize; 3];
        for s in shape.iter_mut() {
            r.read_exact(&mut b)?;
            *s = u64::from_le_bytes(b) as usize;
        }
        let mut head = [0.0; 6];
        for h in head.iter_mut() {
            r.read_exact(&mut b)?;
            *h = f64::from_le_bytes(b);
        }
        let n = shape[0] * shape[1] * shape[2];
        let mut bytes = vec![0u8; n * 8];
        r.read_exact(&mut bytes)?;
        let values = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Self::new(
            shape,
            [head[0], head[1], head[2]],
            [head[3], head[4], head[5]],
            values,
        )
    }
}

/// Least-squares fit of `c_x(x−x_c)² + c_y(y−y_c)² + E_z z + offset` to the
/// grid nodes inside `window`.
pub fn fit_harmonic(grid: &PotentialGrid, window: &FitWindow) -> Result<HarmonicFit> {
    let ranges = [window.x, window.y, window.z];
    let mut axis_nodes: [Vec<usize>; 3] = Default::default();
    for a in 0..3 {
        let (lo, hi) = ranges[a];
        axis_nodes[a] = (0..grid.shape[a])
            .filter(|&i| {
                let c = grid.coord(a, i);
                c >= lo - 1e-9 && c <= hi + 1e-9
            })
            .collect();
    }
    let counts = [
        axis_nodes[0].len(),
        axis_nodes[1].len(),
        axis_nodes[2].len(),
    ];
    if counts[0] < 5 || counts[1] < 5 || counts[2] < 3 {
        return Err(Error::param(
            "window",
            format!(
                "contains {}x{}x{} nodes; at least 5x5x3 required",
                counts[0], counts[1], counts[2]
            ),
        ));
    }
    let xm = 0.5 * (window.x.0 + window.x.1);
    let ym = 0.5 * (window.y.0 + window.y.1);
    let zm = 0.5 * (window.z.0 + window.z.1);
    let n = counts[0] * counts[1] * counts[2];
    let mut a = DMatrix::<f64>::zeros(n, 6);
    let mut b = DVector::<f64>::zeros(n);
    let mut row = 0;
    for &k in &axis_nodes[2] {
        for &j in &axis_nodes[1] {
            for &i in &axis_nodes[0] {
                let u = grid.coord(0, i) - xm;
                let v = grid.coord(1, j) - ym;
                let w = grid.coord(2, k) - zm;
                a[(row, 0)] = u * u;
                a[(row, 1)] = u;
                a[(row, 2)] = v * v;
                a[(row, 3)] = v;
                a[(row, 4)] = w;
                a[(row, 5)] = 1.0;
                b[row] = grid.at(i, j, k);
                row += 1;
            }
        }
    }
    // Column-scaled Householder QR keeps the fit exact to rounding.
    let scales: Vec<f64> = (0..6).map(|c| a.column(c).norm()).collect();
    if scales.iter().any(|&s| s == 0.0) {
        return Err(Error::Fit("singular normal equations".into()));
    }
    let mut scaled = a.clone();
    for (c, s) in scales.iter().enumerate() {
        scaled.column_mut(c).unscale_mut(*s);
    }
    let qr = scaled.qr();
    let r = qr.r();
    let diag: Vec<f64> = (0..6).map(|i| r[(i, i)].abs()).collect();
    let dmax = diag.iter().copied().fold(0.0, f64::max);
    let dmin = diag.iter().copied().fold(f64::INFINITY, f64::min);
    if !(dmin > 1e-10 * dmax) {
        return Err(Error::Fit("singular normal equations".into()));
    }
    let qtb = qr.q().transpose() * &b;
    let mut p = r
        .solve_upper_triangular(&qtb)
        .ok_or_else(|| Error::Fit("singular normal equations".into()))?;
    for (c, s) in scales.iter().enumerate() {
        p[c] /= s;
    }
    let resid = &a * &p - &b;
    let residual_rms = (resid.norm_squared() / n as f64).sqrt();
    let (cx, cy) = (p[0], p[2]);
    let confining = cx > 0.0 && cy > 0.0;
    let x_c = if cx != 0.0 {
        xm - p[1] / (2.0 * cx)
    } else {
        f64::NAN
    };
    let y_c = if cy != 0.0 {
        ym - p[3] / (2.0 * cy)
    } else {
        f64::NAN
    };
    let e_z = p[4];
    // Constant in the original coordinates, after completing the squares.
    let offset = p[5] - cx * (x_c - xm).powi(2) - cy * (y_c - ym).powi(2) - e_z * zm;
    Ok(HarmonicFit {
        dot: HarmonicDot {
            x_c,
            y_c,
            c_x: cx,
            c_y: cy,
            e_z,
        },
        offset,
        residual_rms,
        confining,
        n_points: n,
    })
}
