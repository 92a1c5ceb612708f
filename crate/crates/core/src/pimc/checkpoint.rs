//! Resume files for long chains.
//!
//! Each checkpoint is a pair: `<name>.bin` holds the bead coordinates
//! (magic `RDPATH01`, then little-endian `u32` dimension, particle count and
//! slice count, then `f64` coordinates ordered particle, slice, axis), and
//! `<name>.bin.json` holds the RNG state, step sizes, counters and the work
//! samples recorded so far.

use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::sampler::{Acceptance, Chain, PathEnsemble, Sector};
use super::system::PathSystem;
use super::PimcConfig;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"RDPATH01";
pub const CHECKPOINT_SCHEMA: &str = "rough-dot/pimc-checkpoint-v1";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WindowProgress {
    pub sweeps: usize,
    pub up: Vec<f64>,
    pub down: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointMeta {
    pub schema: String,
    pub window: usize,
    /// Serialized configuration and closing parameter of the run.
    pub fingerprint: String,
    pub sector: Sector,
    pub rng: ChaCha8Rng,
    pub step_single: f64,
    pub step_whole: f64,
    pub acceptance: Acceptance,
    pub coincidences: u64,
    pub progress: WindowProgress,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint<const D: usize> {
    pub meta: CheckpointMeta,
    pub paths: PathEnsemble<D>,
}

/// Identity of a window run. The sweep count is left out so a finished run
/// can be extended from its checkpoints.
pub(crate) fn fingerprint(cfg: &PimcConfig, lambda: f64, dim: usize, particles: usize) -> String {
    let cfg = serde_json::to_string(&PimcConfig {
        n_sweeps: 0,
        ..cfg.clone()
    })
    .unwrap_or_default();
    format!("{cfg}|lambda={lambda:e}|dim={dim}|particles={particles}")
}

pub(crate) fn window_path(dir: &Path, k: usize) -> PathBuf {
    dir.join(format!("window_{k:04}.bin"))
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub(crate) fn exists(path: &Path) -> bool {
    path.exists() && sidecar(path).exists()
}

pub(crate) fn write_window<S: PathSystem<D>, const D: usize>(
    path: &Path,
    chain: &Chain<'_, S, D>,
    progress: &WindowProgress,
    fingerprint: &str,
    window: usize,
) -> Result<()> {
    let meta = CheckpointMeta {
        schema: CHECKPOINT_SCHEMA.to_string(),
        window,
        fingerprint: fingerprint.to_string(),
        sector: chain.paths().sector,
        rng: chain.rng.clone(),
        step_single: chain.step_single,
        step_whole: chain.step_whole,
        acceptance: chain.acceptance,
        coincidences: chain.coincidences,
        progress: progress.clone(),
    };
    write_checkpoint(
        path,
        &Checkpoint {
            meta,
            paths: chain.paths().clone(),
        },
    )
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut w = BufWriter::new(fs::File::create(&tmp)?);
        w.write_all(bytes)?;
        w.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_checkpoint<const D: usize>(path: &Path, cp: &Checkpoint<D>) -> Result<()> {
    let beads = &cp.paths.beads;
    let n_slices = cp.paths.n_slices();
    let mut bytes = Vec::with_capacity(20 + 8 * D * n_slices * beads.len());
    bytes.extend_from_slice(MAGIC);
    for v in [D, beads.len(), n_slices] {
        bytes.extend_from_slice(&(v as u32).to_le_bytes());
    }
    for line in beads {
        for r in line {
            for x in r {
                bytes.extend_from_slice(&x.to_le_bytes());
            }
        }
    }
    // Sidecar last: a checkpoint counts as present only once both exist.
    write_atomic(path, &bytes)?;
    write_atomic(&sidecar(path), serde_json::to_string(&cp.meta)?.as_bytes())
}

pub fn read_checkpoint<const D: usize>(path: &Path) -> Result<Checkpoint<D>> {
    let meta: CheckpointMeta =
        serde_json::from_reader(BufReader::new(fs::File::open(sidecar(path))?))?;
    if meta.schema != CHECKPOINT_SCHEMA {
        return Err(Error::Format(format!(
            "unknown checkpoint schema {}",
            meta.schema
        )));
    }
    let mut bytes = Vec::new();
    BufReader::new(fs::File::open(path)?).read_to_end(&mut bytes)?;
    if bytes.len() < 20 || &bytes[..8] != MAGIC {
        return Err(Error::Format("not a path checkpoint".into()));
    }
    let word =
        |i: usize| u32::from_le_bytes(bytes[8 + 4 * i..12 + 4 * i].try_into().unwrap()) as usize;
    let (dim, particles, n_slices) = (word(0), word(1), word(2));
    if dim != D {
        return Err(Error::Format(format!(
            "checkpoint has dimension {dim}, expected {D}"
        )));
    }
    if bytes.len() != 20 + 8 * dim * particles * n_slices {
        return Err(Error::Format("truncated path checkpoint".into()));
    }
    let mut values = bytes[20..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    let mut beads = Vec::with_capacity(particles);
    for _ in 0..particles {
        let mut line = Vec::with_capacity(n_slices);
        for _ in 0..n_slices {
            let mut r = [0.0; D];
            for x in r.iter_mut() {
                *x = values.next().unwrap_or(f64::NAN);
            }
            line.push(r);
        }
        beads.push(line);
    }
    Ok(Checkpoint {
        paths: PathEnsemble {
            beads,
            sector: meta.sector,
        },
        meta,
    })
}
