use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::checkpoint::{self, WindowProgress};
use super::sampler::{device_system, Acceptance, Chain, MoveCounter, Sector};
use super::system::PathSystem;
use super::PimcConfig;
use crate::electrostatics::DoubleDotPotential;
use crate::error::{Error, Result};
use crate::stats::{block_average, sample_std};
use crate::surface::RoughSurface;
use crate::valleymodel::{solve_envelope, EnvelopeOptions};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExchangeOptions {
    /// Number of closing-parameter intervals between the sectors; chosen
    /// from the dot separation when `None`.
    pub windows: Option<usize>,
    /// Directory for per-window checkpoints.
    pub checkpoint_dir: Option<PathBuf>,
    /// Sweeps between checkpoint writes.
    pub checkpoint_every: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExchangeEstimate {
    /// Exchange coupling, μeV.
    pub j_uev: f64,
    pub j_err_uev: f64,
    /// Action difference between exchange and identity sectors, ħ units.
    pub delta_s: f64,
    pub delta_s_err: f64,
    /// Production samples per window.
    pub n_samples: usize,
    pub n_windows: usize,
    pub acceptance: Acceptance,
    /// Largest integrated autocorrelation time of the window work series,
    /// in sweeps.
    pub tau_int: f64,
    /// The ratio `Z_X/Z_I` is not resolved from zero at 2σ.
    pub below_floor: bool,
    /// Two-sigma upper bound on J when below the floor, μeV.
    pub j_upper_uev: Option<f64>,
    pub coincidences: u64,
    /// β_T of the run, ps.
    pub beta_t: f64,
}

/// Reduced free-energy difference `f₁ − f₀` by Bennett acceptance ratio.
///
/// `forward` holds `S₁ − S₀` sampled in state 0, `reverse` holds `S₀ − S₁`
/// sampled in state 1.
pub fn bar_free_energy(forward: &[f64], reverse: &[f64]) -> Result<f64> {
    if forward.is_empty() || reverse.is_empty() {
        return Err(Error::Extraction(
            "BAR needs samples from both states".into(),
        ));
    }
    let shift = (forward.len() as f64 / reverse.len() as f64).ln();
    let fermi = |x: f64| {
        if x > 0.0 {
            let e = (-x).exp();
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + x.exp())
        }
    };
    let imbalance = |df: f64| {
        let a: f64 = forward.iter().map(|w| fermi(shift + w - df)).sum();
        let b: f64 = reverse.iter().map(|w| fermi(-shift + w + df)).sum();
        a - b
    };
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &w in forward {
        lo = lo.min(w);
        hi = hi.max(w);
    }
    for &w in reverse {
        lo = lo.min(-w);
        hi = hi.max(-w);
    }
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::Extraction("non-finite work values".into()));
    }
    lo -= 50.0;
    hi += 50.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if imbalance(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub(crate) struct WindowSamples {
    pub up: Vec<f64>,
    pub down: Vec<f64>,
    pub acceptance: Acceptance,
    pub coincidences: u64,
}

fn auto_windows<S: PathSystem<D>, const D: usize>(system: &S, cfg: &PimcConfig) -> usize {
    let start = system.initial_positions();
    if start.len() < 2 {
        return 1;
    }
    let tau_e = cfg.tau / crate::units::HBAR;
    let mut d2 = 0.0;
    for a in 0..D {
        // Free-particle spread of one link along this axis.
        let var = 2.0 * crate::units::kinetic_prefactor(system.masses()[a]) * tau_e;
        d2 += (start[0][a] - start[1][a]).powi(2) / var;
    }
    ((1.5 * d2.sqrt()).ceil() as usize).clamp(4, 400)
}

fn run_window<S: PathSystem<D>, const D: usize>(
    system: &S,
    cfg: &PimcConfig,
    lambdas: &[f64],
    k: usize,
    opts: &ExchangeOptions,
) -> Result<WindowSamples> {
    let lam = lambdas[k];
    let fingerprint = checkpoint::fingerprint(cfg, lam, D, system.n_particles());
    let path = opts
        .checkpoint_dir
        .as_ref()
        .map(|d| checkpoint::window_path(d, k));
    let resumed = match &path {
        Some(p) if checkpoint::exists(p) => Some(checkpoint::read_checkpoint::<D>(p)?),
        _ => None,
    };
    let (mut chain, mut progress) = match resumed {
        Some(cp) => {
            if cp.meta.fingerprint != fingerprint {
                return Err(Error::Format(format!(
                    "checkpoint {} belongs to a different run",
                    path.as_ref()
                        .map(|p| p.display().to_string())
                        .unwrap_or_default()
                )));
            }
            if cp.meta.progress.sweeps > cfg.n_sweeps {
                return Err(Error::Format(format!(
                    "checkpoint for window {k} holds {} sweeps, more than the {} requested",
                    cp.meta.progress.sweeps, cfg.n_sweeps
                )));
            }
            let mut chain = Chain::from_state(system, cfg, cp.paths, cp.meta.rng.clone())?;
            chain.step_single = cp.meta.step_single;
            chain.step_whole = cp.meta.step_whole;
            chain.acceptance = cp.meta.acceptance;
            chain.coincidences = cp.meta.coincidences;
            (chain, cp.meta.progress)
        }
        None => {
            let mut chain = Chain::new(system, cfg, Sector::Closing(lam), k as u64)?;
            chain.burn_in(cfg.burn_in);
            (chain, WindowProgress::default())
        }
    };
    let up_lam = lambdas.get(k + 1).copied();
    let down_lam = k.checked_sub(1).map(|j| lambdas[j]);
    let every = if opts.checkpoint_every == 0 {
        usize::MAX
    } else {
        opts.checkpoint_every
    };
    while progress.sweeps < cfg.n_sweeps {
        chain.sweep();
        let here = chain.closing_action(lam);
        if let Some(l) = up_lam {
            progress.up.push(chain.closing_action(l) - here);
        }
        if let Some(l) = down_lam {
            progress.down.push(chain.closing_action(l) - here);
        }
        progress.sweeps += 1;
        if let Some(p) = &path {
            if progress.sweeps % every == 0 || progress.sweeps == cfg.n_sweeps {
                checkpoint::write_window(p, &chain, &progress, &fingerprint, k)?;
            }
        }
    }
    chain.check_acceptance()?;
    Ok(WindowSamples {
        up: progress.up,
        down: progress.down,
        acceptance: chain.acceptance(),
        coincidences: chain.coincidences,
    })
}

fn chained_bar(
    windows: &[WindowSamples],
    range: impl Fn(usize) -> std::ops::Range<usize>,
) -> Result<f64> {
    let mut total = 0.0;
    for k in 0..windows.len() - 1 {
        let f = &windows[k].up;
        let r = &windows[k + 1].down;
        total += bar_free_energy(&f[range(f.len())], &r[range(r.len())])?;
    }
    Ok(total)
}

fn merge(a: &mut MoveCounter, b: &MoveCounter) {
    a.attempted += b.attempted;
    a.accepted += b.accepted;
}

/// Exchange coupling of a two-particle system by multistage BAR between
/// the identity and exchange closing conditions.
pub fn estimate_exchange_for<S: PathSystem<D>, const D: usize>(
    system: &S,
    cfg: &PimcConfig,
    opts: &ExchangeOptions,
) -> Result<ExchangeEstimate> {
    cfg.validate()?;
    if system.n_particles() != 2 {
        return Err(Error::param("system", "exchange needs two particles"));
    }
    let n_int = opts
        .windows
        .unwrap_or_else(|| auto_windows(system, cfg))
        .max(1);
    let lambdas: Vec<f64> = (0..=n_int).map(|k| k as f64 / n_int as f64).collect();
    if let Some(dir) = &opts.checkpoint_dir {
        std::fs::create_dir_all(dir)?;
    }
    let windows: Vec<WindowSamples> = (0..lambdas.len())
        .into_par_iter()
        .map(|k| run_window(system, cfg, &lambdas, k, opts))
        .collect::<Result<_>>()?;

    let delta_s = chained_bar(&windows, |n| 0..n)?;
    let nb = cfg.n_blocks;
    let blocks: Vec<f64> = (0..nb)
        .map(|b| chained_bar(&windows, |n| (b * n / nb)..((b + 1) * n / nb)))
        .collect::<Result<_>>()?;
    let delta_s_err = sample_std(&blocks) / (nb as f64).sqrt();

    let mut acceptance = Acceptance::default();
    let mut coincidences = 0;
    let mut tau_int: f64 = 0.0;
    for w in &windows {
        merge(&mut acceptance.staging, &w.acceptance.staging);
        merge(&mut acceptance.single, &w.acceptance.single);
        merge(&mut acceptance.whole, &w.acceptance.whole);
        coincidences += w.coincidences;
        for series in [&w.up, &w.down] {
            if series.len() >= 2 * nb {
                let t = block_average(series, nb).tau_int;
                if t.is_finite() {
                    tau_int = tau_int.max(t);
                }
            }
        }
    }

    let beta = cfg.beta();
    let j_uev = 1000.0 * 2.0 / beta * (-delta_s).exp();
    let below_floor = !(delta_s_err < 0.5);
    Ok(ExchangeEstimate {
        j_uev,
        j_err_uev: j_uev * delta_s_err,
        delta_s,
        delta_s_err,
        n_samples: cfg.n_sweeps,
        n_windows: n_int,
        acceptance,
        tau_int,
        below_floor,
        j_upper_uev: below_floor.then(|| j_uev * (2.0 * delta_s_err).exp()),
        coincidences,
        beta_t: cfg.beta_t(),
    })
}

/// Exchange coupling of two electrons in the rough-interface double dot.
pub fn estimate_exchange(
    pot: &DoubleDotPotential,
    surface: &RoughSurface,
    cfg: &PimcConfig,
    opts: &ExchangeOptions,
) -> Result<ExchangeEstimate> {
    let system = device_system(pot, surface, cfg);
    estimate_exchange_for(&system, cfg, opts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceExchange {
    pub index: usize,
    pub estimate: ExchangeEstimate,
    /// Envelope centers of the left and right dot on this surface, nm.
    pub left_center: (f64, f64),
    pub right_center: (f64, f64),
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceExchangeTable {
    pub rows: Vec<SurfaceExchange>,
    /// `log₁₀(J_max/J_min)` over the realizations.
    pub spread_decades: f64,
    pub log10_j_std: f64,
}

/// Exchange on each surface realization at fixed gate voltages, with the
/// envelope-derived interdot distance of every realization.
pub fn exchange_vs_surface(
    pot: &DoubleDotPotential,
    surfaces: &[RoughSurface],
    cfg: &PimcConfig,
    opts: &ExchangeOptions,
) -> Result<SurfaceExchangeTable> {
    if surfaces.len() < 5 {
        return Err(Error::param("surfaces", "need at least five realizations"));
    }
    let env_opts = EnvelopeOptions::default();
    let mut rows = Vec::with_capacity(surfaces.len());
    for (index, surface) in surfaces.iter().enumerate() {
        let mut o = opts.clone();
        if let Some(d) = &opts.checkpoint_dir {
            o.checkpoint_dir = Some(d.join(format!("surface_{index:03}")));
        }
        let estimate = estimate_exchange(pot, surface, cfg, &o)?;
        let l = solve_envelope(&pot.left, surface, &env_opts)?;
        let r = solve_envelope(&pot.right, surface, &env_opts)?;
        let distance =
            ((r.center.0 - l.center.0).powi(2) + (r.center.1 - l.center.1).powi(2)).sqrt();
        rows.push(SurfaceExchange {
            index,
            estimate,
            left_center: l.center,
            right_center: r.center,
            distance,
        });
    }
    let logs: Vec<f64> = rows.iter().map(|r| r.estimate.j_uev.log10()).collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = logs.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(SurfaceExchangeTable {
        spread_decades: max - min,
        log10_j_std: crate::stats::std_dev(&logs),
        rows,
    })
}
