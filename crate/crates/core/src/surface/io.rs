//! Surface and profile file formats.
//!
//! Binary layout (little endian): 8-byte magic `RDSURF01`, `nx: u64`,
//! `ny: u64`, `dx: f64`, `x0: f64`, `y0: f64`, then `nx·ny` heights as `f64`
//! in row-major order (x fastest). A JSON sidecar next to the binary file
//! (`<file>.json`) records the generation parameters.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{FractalParams, RoughSurface};
use crate::{Error, Result};

pub const SURFACE_MAGIC: &[u8; 8] = b"RDSURF01";
pub const SURFACE_SCHEMA: &str = "rough-dot/surface-v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSidecar {
    pub schema: String,
    #[serde(rename = "H")]
    pub hurst: Option<f64>,
    pub c0_nm3: Option<f64>,
    pub lambda_min_nm: Option<f64>,
    pub lambda_max_nm: Option<f64>,
    pub dx_nm: f64,
    pub seed: u64,
    pub extent_nm: [f64; 2],
    pub nx: usize,
    pub ny: usize,
}

impl SurfaceSidecar {
    pub fn describe(s: &RoughSurface) -> Self {
        let p = s.params();
        let (ex, ey) = s.extent();
        Self {
            schema: SURFACE_SCHEMA.to_string(),
            hurst: p.map(|p| p.hurst),
            c0_nm3: p.map(|p| p.c0),
            lambda_min_nm: p.map(|p| p.lambda_min),
            lambda_max_nm: p.map(|p| p.lambda_max),
            dx_nm: s.dx(),
            seed: s.seed(),
            extent_nm: [ex, ey],
            nx: s.nx(),
            ny: s.ny(),
        }
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(".json");
    PathBuf::from(p)
}

/// Write the binary surface and its JSON sidecar.
pub fn write_surface(surface: &RoughSurface, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(SURFACE_MAGIC)?;
    w.write_all(&(surface.nx() as u64).to_le_bytes())?;
    w.write_all(&(surface.ny() as u64).to_le_bytes())?;
    w.write_all(&surface.dx().to_le_bytes())?;
    w.write_all(&surface.origin().0.to_le_bytes())?;
    w.write_all(&surface.origin().1.to_le_bytes())?;
    for h in surface.heights() {
        w.write_all(&h.to_le_bytes())?;
    }
    w.flush()?;
    let side = serde_json::to_string_pretty(&SurfaceSidecar::describe(surface))?;
    std::fs::write(sidecar_path(path), side + "\n")?;
    Ok(())
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    Ok(f64::from_bits(read_u64(r)?))
}

/// Read a binary surface; the sidecar is used when present.
pub fn read_surface(path: &Path) -> Result<RoughSurface> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != SURFACE_MAGIC {
        return Err(Error::Format(format!(
            "{}: not a surface file",
            path.display()
        )));
    }
    let nx = read_u64(&mut r)? as usize;
    let ny = read_u64(&mut r)? as usize;
    let dx = read_f64(&mut r)?;
    let x0 = read_f64(&mut r)?;
    let y0 = read_f64(&mut r)?;
    let count = nx
        .checked_mul(ny)
        .ok_or_else(|| Error::Format("grid size overflow".into()))?;
    let mut bytes = vec![0u8; count * 8];
    r.read_exact(&mut bytes)?;
    let heights = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let mut s = RoughSurface::from_heights(heights, nx, ny, dx, (x0, y0))?;
    let side = sidecar_path(path);
    if side.exists() {
        let meta: SurfaceSidecar = serde_json::from_str(&std::fs::read_to_string(&side)?)?;
        if meta.schema != SURFACE_SCHEMA {
            return Err(Error::Format(format!(
                "unsupported sidecar schema `{}`",
                meta.schema
            )));
        }
        if let (Some(h), Some(c0), Some(lmin), Some(lmax)) = (
            meta.hurst,
            meta.c0_nm3,
            meta.lambda_min_nm,
            meta.lambda_max_nm,
        ) {
            let p = FractalParams {
                hurst: h,
                c0,
                lambda_min: lmin,
                lambda_max: lmax,
            };
            s = s.with_meta(meta.seed, p);
        }
    }
    Ok(s)
}

/// Grid CSV with header `x_nm,y_nm,z_nm`, one row per node.
pub fn write_surface_csv(surface: &RoughSurface, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x_nm", "y_nm", "z_nm"])?;
    let (x0, y0) = surface.origin();
    for iy in 0..surface.ny() {
        for ix in 0..surface.nx() {
            w.write_record(&[
                format!("{}", x0 + ix as f64 * surface.dx()),
                format!("{}", y0 + iy as f64 * surface.dx()),
                format!("{}", surface.at(ix, iy)),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn uniform_axis(mut values: Vec<f64>, name: &str) -> Result<(f64, f64, usize)> {
    values.sort_by(f64::total_cmp);
    values.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    if values.len() < 2 {
        return Err(Error::Format(format!(
            "{name}: need at least two distinct coordinates"
        )));
    }
    let step = (values[values.len() - 1] - values[0]) / (values.len() - 1) as f64;
    for (i, v) in values.iter().enumerate() {
        if (v - (values[0] + i as f64 * step)).abs() > 1e-6 * step.max(1.0) {
            return Err(Error::Format(format!(
                "{name}: coordinates are not uniformly spaced"
            )));
        }
    }
    Ok((values[0], step, values.len()))
}

/// Read a grid CSV written by [`write_surface_csv`] or any full uniform grid.
pub fn read_surface_csv(path: &Path) -> Result<RoughSurface> {
    let mut r = csv::Reader::from_path(path)?;
    let headers = r.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Format(format!("missing column `{name}`")))
    };
    let (cx, cy, cz) = (col("x_nm")?, col("y_nm")?, col("z_nm")?);
    let mut pts = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let parse = |i: usize| -> Result<f64> {
            rec[i].trim().parse::<f64>().map_err(|e| {
                Error::Format(format!("line {:?}: {e}", rec.position().map(|p| p.line())))
            })
        };
        pts.push((parse(cx)?, parse(cy)?, parse(cz)?));
    }
    let (x0, dxs, nx) = uniform_axis(pts.iter().map(|p| p.0).collect(), "x_nm")?;
    let (y0, dys, ny) = uniform_axis(pts.iter().map(|p| p.1).collect(), "y_nm")?;
    if (dxs - dys).abs() > 1e-6 * dxs {
        return Err(Error::Format("grid cells are not square".into()));
    }
    if pts.len() != nx * ny {
        return Err(Error::Format(format!(
            "expected {} nodes, found {}",
            nx * ny,
            pts.len()
        )));
    }
    let mut h = vec![f64::NAN; nx * ny];
    for (x, y, z) in pts {
        let ix = ((x - x0) / dxs).round() as usize;
        let iy = ((y - y0) / dxs).round() as usize;
        h[iy * nx + ix] = z;
    }
    if h.iter().any(|v| v.is_nan()) {
        return Err(Error::Format("grid has missing nodes".into()));
    }
    RoughSurface::from_heights(h, nx, ny, dxs, (x0, y0))
}

/// Read a 1D profile CSV with header `x_nm,z_nm`; returns heights and spacing.
pub fn read_profile_csv(path: &Path) -> Result<(Vec<f64>, f64)> {
    let mut r = csv::Reader::from_path(path)?;
    let headers = r.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Format(format!("missing column `{name}`")))
    };
    let (cx, cz) = (col("x_nm")?, col("z_nm")?);
    let mut pts = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let x: f64 = rec[cx]
            .trim()
            .parse()
            .map_err(|e| Error::Format(format!("x_nm: {e}")))?;
        let z: f64 = rec[cz]
            .trim()
            .parse()
            .map_err(|e| Error::Format(format!("z_nm: {e}")))?;
        pts.push((x, z));
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (_, dx, n) = uniform_axis(pts.iter().map(|p| p.0).collect(), "x_nm")?;
    if n != pts.len() {
        return Err(Error::Format("duplicate x_nm values".into()));
    }
    Ok((pts.into_iter().map(|p| p.1).collect(), dx))
}

pub fn write_profile_csv(z: &[f64], dx: f64, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x_nm", "z_nm"])?;
    for (i, v) in z.iter().enumerate() {
        w.write_record(&[format!("{}", i as f64 * dx), format!("{v}")])?;
    }
    w.flush()?;
    Ok(())
}
