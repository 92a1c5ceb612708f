use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::system::{DeviceSystem, PathSystem, SoftCoulomb};
use super::{PimcConfig, COINCIDENCE_RADIUS};
use crate::electrostatics::DoubleDotPotential;
use crate::error::{Error, Result};
use crate::stats::{block_average, BlockEstimate};
use crate::surface::RoughSurface;
use crate::units::kinetic_prefactor;

/// Boundary condition closing the world-lines at imaginary time β.
///
/// `Closing(λ)` ends particle 1 on `(1−λ)r₁(0) + λr₂(0)` and particle 2 on
/// `(1−λ)r₂(0) + λr₁(0)`; λ = 0 is the identity and λ = 1 the exchange.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Sector {
    Identity,
    Exchange,
    Closing(f64),
}

impl Sector {
    pub fn lambda(self) -> f64 {
        match self {
            Sector::Identity => 0.0,
            Sector::Exchange => 1.0,
            Sector::Closing(l) => l,
        }
    }
}

/// Moves attempted per particle per sweep. `staging = 0` picks `2M/L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoveMix {
    pub staging: usize,
    pub single: usize,
    pub whole: usize,
}

impl Default for MoveMix {
    fn default() -> Self {
        Self {
            staging: 0,
            single: 4,
            whole: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MoveCounter {
    pub attempted: u64,
    pub accepted: u64,
}

impl MoveCounter {
    pub fn rate(&self) -> f64 {
        if self.attempted == 0 {
            f64::NAN
        } else {
            self.accepted as f64 / self.attempted as f64
        }
    }

    fn record(&mut self, accepted: bool) {
        self.attempted += 1;
        self.accepted += accepted as u64;
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Acceptance {
    pub staging: MoveCounter,
    pub single: MoveCounter,
    pub whole: MoveCounter,
}

impl Acceptance {
    /// Acceptance over all move types.
    pub fn overall(&self) -> f64 {
        let a = self.staging.attempted + self.single.attempted + self.whole.attempted;
        let b = self.staging.accepted + self.single.accepted + self.whole.accepted;
        if a == 0 {
            f64::NAN
        } else {
            b as f64 / a as f64
        }
    }

    pub fn lowest(&self) -> f64 {
        [self.staging, self.single, self.whole]
            .iter()
            .filter(|c| c.attempted > 0)
            .map(MoveCounter::rate)
            .fold(f64::INFINITY, f64::min)
    }
}

/// World-lines of all particles, `beads[particle][slice]`, in nm.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble<const D: usize> {
    pub beads: Vec<Vec<[f64; D]>>,
    pub sector: Sector,
}

impl<const D: usize> PathEnsemble<D> {
    pub fn n_slices(&self) -> usize {
        self.beads.first().map_or(0, Vec::len)
    }

    /// Bead that particle `i` must reach at imaginary time β.
    pub fn target(&self, i: usize) -> [f64; D] {
        let lam = self.sector.lambda();
        let own = self.beads[i][0];
        if self.beads.len() < 2 || lam == 0.0 {
            return own;
        }
        let other = self.beads[1 - i][0];
        let mut t = [0.0; D];
        for a in 0..D {
            t[a] = (1.0 - lam) * own[a] + lam * other[a];
        }
        t
    }

    /// Paths running in a straight line from `positions` to their closing
    /// targets.
    pub fn interpolated(positions: &[[f64; D]], n_slices: usize, sector: Sector) -> Self {
        let mut paths = Self::constant(positions, n_slices, sector);
        for i in 0..positions.len() {
            let t = paths.target(i);
            for (m, r) in paths.beads[i].iter_mut().enumerate() {
                let f = m as f64 / n_slices as f64;
                for a in 0..D {
                    r[a] += f * (t[a] - r[a]);
                }
            }
        }
        paths
    }

    /// Straight paths sitting at `positions`.
    pub fn constant(positions: &[[f64; D]], n_slices: usize, sector: Sector) -> Self {
        Self {
            beads: positions.iter().map(|p| vec![*p; n_slices]).collect(),
            sector,
        }
    }
}

/// Link action coefficients `m_a/(2τħ)` per axis, nm⁻².
fn link_coefficients<const D: usize>(masses: [f64; D], tau_e: f64) -> [f64; D] {
    let mut k = [0.0; D];
    for a in 0..D {
        k[a] = 1.0 / (4.0 * kinetic_prefactor(masses[a]) * tau_e);
    }
    k
}

#[inline]
fn link<const D: usize>(k: &[f64; D], a: &[f64; D], b: &[f64; D]) -> f64 {
    let mut s = 0.0;
    for ax in 0..D {
        let d = a[ax] - b[ax];
        s += k[ax] * d * d;
    }
    s
}

/// Kinetic part of the action, ħ units.
fn kinetic_action<const D: usize>(paths: &PathEnsemble<D>, k: &[f64; D]) -> f64 {
    let mut s = 0.0;
    for (i, line) in paths.beads.iter().enumerate() {
        for w in line.windows(2) {
            s += link(k, &w[0], &w[1]);
        }
        s += link(k, &line[line.len() - 1], &paths.target(i));
    }
    s
}

/// Total Euclidean action of a path ensemble in units of ħ.
pub fn system_action<S: PathSystem<D>, const D: usize>(
    system: &S,
    paths: &PathEnsemble<D>,
    tau_e: f64,
) -> f64 {
    let k = link_coefficients(system.masses(), tau_e);
    let mut pot = 0.0;
    let m = paths.n_slices();
    for s in 0..m {
        for line in &paths.beads {
            pot += system.external(&line[s]);
        }
        if paths.beads.len() == 2 {
            pot += system.pair(&paths.beads[0][s], &paths.beads[1][s]);
        }
    }
    kinetic_action(paths, &k) + tau_e * pot
}

/// Action of two electrons in the rough-interface double dot, ħ units.
pub fn action(
    paths: &PathEnsemble<3>,
    pot: &DoubleDotPotential,
    surface: &RoughSurface,
    cfg: &PimcConfig,
) -> f64 {
    let system = device_system(pot, surface, cfg);
    system_action(&system, paths, cfg.tau / crate::units::HBAR)
}

pub(crate) fn device_system<'a>(
    pot: &'a DoubleDotPotential,
    surface: &'a RoughSurface,
    cfg: &PimcConfig,
) -> DeviceSystem<'a> {
    DeviceSystem {
        pot,
        surface,
        masses: cfg.masses,
        v_step: cfg.v_step,
        coulomb: SoftCoulomb::silicon(cfg.core_radius, cfg.eps_r),
        start_depth: cfg.start_depth,
    }
}

/// Estimators accumulated over the production sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    /// Centroid-virial energy, meV. Only sampled in the identity sector.
    pub energy_virial: Option<BlockEstimate>,
    /// Primitive thermodynamic energy, meV. Identity sector only.
    pub energy_thermo: Option<BlockEstimate>,
    /// `⟨r_a²⟩` per axis averaged over beads and particles, nm².
    pub second_moments: Vec<BlockEstimate>,
    /// Mean bead position per particle and axis, nm.
    pub mean_positions: Vec<Vec<f64>>,
    pub acceptance: Acceptance,
    /// Slices on which the two electrons came within the coincidence radius.
    pub coincidences: u64,
    pub n_samples: usize,
    /// Raw virial energy samples, for split-half checks.
    pub energy_samples: Vec<f64>,
}

/// A single Markov chain over path configurations.
pub struct Chain<'s, S: PathSystem<D>, const D: usize> {
    system: &'s S,
    paths: PathEnsemble<D>,
    ext: Vec<Vec<f64>>,
    pair: Vec<f64>,
    k: [f64; D],
    sigma: [f64; D],
    tau_e: f64,
    staging_len: usize,
    moves: MoveMix,
    pub(crate) rng: ChaCha8Rng,
    pub(crate) step_single: f64,
    pub(crate) step_whole: f64,
    pub(crate) acceptance: Acceptance,
    pub(crate) coincidences: u64,
}

impl<'s, S: PathSystem<D>, const D: usize> Chain<'s, S, D> {
    /// Chain started from straight paths at the system's initial positions.
    pub fn new(system: &'s S, cfg: &PimcConfig, sector: Sector, stream: u64) -> Result<Self> {
        cfg.validate()?;
        let start = system.initial_positions();
        if start.len() != system.n_particles() || start.is_empty() || start.len() > 2 {
            return Err(Error::param("system", "one or two particles required"));
        }
        let paths = PathEnsemble::interpolated(&start, cfg.n_slices, sector);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(stream);
        Self::from_state(system, cfg, paths, rng)
    }

    pub(crate) fn from_state(
        system: &'s S,
        cfg: &PimcConfig,
        paths: PathEnsemble<D>,
        rng: ChaCha8Rng,
    ) -> Result<Self> {
        let tau_e = cfg.tau / crate::units::HBAR;
        let k = link_coefficients(system.masses(), tau_e);
        let mut sigma = [0.0; D];
        for a in 0..D {
            sigma[a] = (0.5 / k[a]).sqrt();
        }
        let step = sigma.iter().copied().fold(f64::INFINITY, f64::min);
        let mut chain = Self {
            system,
            paths,
            ext: Vec::new(),
            pair: Vec::new(),
            k,
            sigma,
            tau_e,
            staging_len: cfg.staging_len,
            moves: cfg.moves,
            rng,
            step_single: step,
            step_whole: 0.5 * step,
            acceptance: Acceptance::default(),
            coincidences: 0,
        };
        chain.refresh();
        if !chain.potential_total().is_finite() {
            return Err(Error::param(
                "paths",
                "initial configuration has infinite action",
            ));
        }
        Ok(chain)
    }

    fn refresh(&mut self) {
        let sys = self.system;
        self.ext = self
            .paths
            .beads
            .iter()
            .map(|line| line.iter().map(|r| sys.external(r)).collect())
            .collect();
        self.pair = if self.paths.beads.len() == 2 {
            (0..self.paths.n_slices())
                .map(|m| sys.pair(&self.paths.beads[0][m], &self.paths.beads[1][m]))
                .collect()
        } else {
            Vec::new()
        };
    }

    pub fn paths(&self) -> &PathEnsemble<D> {
        &self.paths
    }

    pub fn acceptance(&self) -> Acceptance {
        self.acceptance
    }

    pub fn tau_e(&self) -> f64 {
        self.tau_e
    }

    fn potential_total(&self) -> f64 {
        self.ext.iter().flatten().sum::<f64>() + self.pair.iter().sum::<f64>()
    }

    /// Current action in ħ units.
    pub fn action(&self) -> f64 {
        kinetic_action(&self.paths, &self.k) + self.tau_e * self.potential_total()
    }

    /// Sum of the closing links under closing parameter `lam`.
    pub fn closing_action(&self, lam: f64) -> f64 {
        let beads = &self.paths.beads;
        let m = self.paths.n_slices();
        match beads.len() {
            1 => link(&self.k, &beads[0][m - 1], &beads[0][0]),
            _ => {
                let (a, b) = (beads[0][0], beads[1][0]);
                let mut t0 = [0.0; D];
                let mut t1 = [0.0; D];
                for ax in 0..D {
                    t0[ax] = (1.0 - lam) * a[ax] + lam * b[ax];
                    t1[ax] = (1.0 - lam) * b[ax] + lam * a[ax];
                }
                link(&self.k, &beads[0][m - 1], &t0) + link(&self.k, &beads[1][m - 1], &t1)
            }
        }
    }

    fn closing_total(&self) -> f64 {
        self.closing_action(self.paths.sector.lambda())
    }

    fn accept(&mut self, delta: f64) -> bool {
        if !delta.is_finite() {
            return false;
        }
        delta <= 0.0 || self.rng.random::<f64>() < (-delta).exp()
    }

    fn pair_at(&self, i: usize, m: usize, r: &[f64; D]) -> f64 {
        if self.paths.beads.len() < 2 {
            0.0
        } else {
            self.system.pair(r, &self.paths.beads[1 - i][m])
        }
    }

    /// Lévy-bridge regrowth of `staging_len − 1` interior beads.
    fn staging_move(&mut self, i: usize) {
        let m_tot = self.paths.n_slices();
        let len = self.staging_len;
        let start = self.rng.random_range(0..=m_tot - len);
        let end = if start + len == m_tot {
            self.paths.target(i)
        } else {
            self.paths.beads[i][start + len]
        };
        let mut prev = self.paths.beads[i][start];
        let mut new = Vec::with_capacity(len - 1);
        let mut delta = 0.0;
        for j in 1..len {
            let rest = (len - j) as f64;
            let mut r = [0.0; D];
            for a in 0..D {
                let mean = prev[a] + (end[a] - prev[a]) / (rest + 1.0);
                let sd = self.sigma[a] * (rest / (rest + 1.0)).sqrt();
                let z: f64 = self.rng.sample(StandardNormal);
                r[a] = mean + sd * z;
            }
            let m = start + j;
            let v = self.system.external(&r);
            if !v.is_finite() {
                self.acceptance.staging.record(false);
                return;
            }
            let p = self.pair_at(i, m, &r);
            delta += v - self.ext[i][m] + p - self.pair.get(m).copied().unwrap_or(0.0);
            new.push((r, v, p));
            prev = r;
        }
        let ok = self.accept(self.tau_e * delta);
        self.acceptance.staging.record(ok);
        if ok {
            let two = self.paths.beads.len() == 2;
            for (j, (r, v, p)) in new.into_iter().enumerate() {
                let m = start + 1 + j;
                self.paths.beads[i][m] = r;
                self.ext[i][m] = v;
                if two {
                    self.pair[m] = p;
                }
            }
        }
    }

    /// Links touching bead `(i, m)`; slice 0 also moves the closing targets.
    fn local_kinetic(&self, i: usize, m: usize) -> f64 {
        let line = &self.paths.beads[i];
        let last = line.len() - 1;
        let mut s = 0.0;
        if m == 0 {
            s += link(&self.k, &line[0], &line[1]);
            s += self.closing_total();
        } else {
            s += link(&self.k, &line[m - 1], &line[m]);
            s += if m == last {
                link(&self.k, &line[m], &self.paths.target(i))
            } else {
                link(&self.k, &line[m], &line[m + 1])
            };
        }
        s
    }

    fn single_move(&mut self, i: usize, m: usize) {
        let old = self.paths.beads[i][m];
        let mut r = old;
        for a in 0..D {
            r[a] += self.step_single * (2.0 * self.rng.random::<f64>() - 1.0);
        }
        let v = self.system.external(&r);
        if !v.is_finite() {
            self.acceptance.single.record(false);
            return;
        }
        let p = self.pair_at(i, m, &r);
        let kin_old = self.local_kinetic(i, m);
        self.paths.beads[i][m] = r;
        let kin_new = self.local_kinetic(i, m);
        let p_old = self.pair.get(m).copied().unwrap_or(0.0);
        let delta = kin_new - kin_old + self.tau_e * (v - self.ext[i][m] + p - p_old);
        let ok = self.accept(delta);
        self.acceptance.single.record(ok);
        if ok {
            self.ext[i][m] = v;
            if !self.pair.is_empty() {
                self.pair[m] = p;
            }
        } else {
            self.paths.beads[i][m] = old;
        }
    }

    fn whole_move(&mut self, i: usize) {
        let mut shift = [0.0; D];
        for a in 0..D {
            shift[a] = self.step_whole * (2.0 * self.rng.random::<f64>() - 1.0);
        }
        let n = self.paths.n_slices();
        let mut ext = Vec::with_capacity(n);
        let mut pair = Vec::with_capacity(self.pair.len());
        let mut dv = 0.0;
        for m in 0..n {
            let mut r = self.paths.beads[i][m];
            for a in 0..D {
                r[a] += shift[a];
            }
            let v = self.system.external(&r);
            if !v.is_finite() {
                self.acceptance.whole.record(false);
                return;
            }
            dv += v - self.ext[i][m];
            ext.push(v);
            if !self.pair.is_empty() {
                let p = self.pair_at(i, m, &r);
                dv += p - self.pair[m];
                pair.push(p);
            }
        }
        let close_old = self.closing_total();
        self.translate(i, &shift, 1.0);
        let close_new = self.closing_total();
        let ok = self.accept(close_new - close_old + self.tau_e * dv);
        self.acceptance.whole.record(ok);
        if ok {
            self.ext[i] = ext;
            if !pair.is_empty() {
                self.pair = pair;
            }
        } else {
            self.translate(i, &shift, -1.0);
        }
    }

    fn translate(&mut self, i: usize, shift: &[f64; D], sign: f64) {
        for r in &mut self.paths.beads[i] {
            for a in 0..D {
                r[a] += sign * shift[a];
            }
        }
    }

    /// One sweep: staging, single-bead and whole-path moves for every particle.
    pub fn sweep(&mut self) {
        let n = self.paths.n_slices();
        let n_stage = if self.moves.staging == 0 {
            (2 * n / self.staging_len).max(1)
        } else {
            self.moves.staging
        };
        for i in 0..self.paths.beads.len() {
            for _ in 0..n_stage {
                self.staging_move(i);
            }
            // Half the single-bead moves go to slice 0, which staging never
            // touches.
            for k in 0..self.moves.single {
                let m = if k % 2 == 0 {
                    0
                } else {
                    self.rng.random_range(0..n)
                };
                self.single_move(i, m);
            }
            for _ in 0..self.moves.whole {
                self.whole_move(i);
            }
        }
        if self.paths.beads.len() == 2 {
            let r2 = COINCIDENCE_RADIUS * COINCIDENCE_RADIUS;
            for m in 0..n {
                let (a, b) = (&self.paths.beads[0][m], &self.paths.beads[1][m]);
                let d2: f64 = (0..D).map(|ax| (a[ax] - b[ax]).powi(2)).sum();
                if d2 < r2 {
                    self.coincidences += 1;
                }
            }
        }
    }

    /// Burn-in sweeps with step-size adaptation towards ~40 % acceptance.
    pub fn burn_in(&mut self, sweeps: usize) {
        let mut last = self.acceptance;
        for s in 0..sweeps {
            self.sweep();
            if (s + 1) % 20 == 0 {
                let now = self.acceptance;
                self.step_single = adapt(self.step_single, delta_rate(&now.single, &last.single));
                self.step_whole = adapt(self.step_whole, delta_rate(&now.whole, &last.whole));
                last = now;
            }
        }
        self.acceptance = Acceptance::default();
        self.refresh();
    }

    /// Fails when some move type stopped being accepted.
    pub fn check_acceptance(&self) -> Result<()> {
        let low = self.acceptance.lowest();
        if low < 0.01 {
            return Err(Error::Sampler(format!(
                "acceptance fell to {low:.4}; step-size adaptation failed"
            )));
        }
        Ok(())
    }

    /// Centroid-virial and primitive energies of the current configuration.
    pub fn energies(&self, beta: f64) -> (f64, f64) {
        let n = self.paths.n_slices();
        let np = self.paths.beads.len();
        let mut centroids = vec![[0.0; D]; np];
        for (i, line) in self.paths.beads.iter().enumerate() {
            for r in line {
                for a in 0..D {
                    centroids[i][a] += r[a] / n as f64;
                }
            }
        }
        let mut virial = 0.0;
        for m in 0..n {
            for i in 0..np {
                let r = &self.paths.beads[i][m];
                let mut g = self.system.external_gradient(r);
                if np == 2 {
                    let gp = self.system.pair_gradient(r, &self.paths.beads[1 - i][m]);
                    for a in 0..D {
                        g[a] += gp[a];
                    }
                }
                for a in 0..D {
                    virial += 0.5 * (r[a] - centroids[i][a]) * g[a];
                }
            }
        }
        let v_mean = self.potential_total() / n as f64;
        let dof = (np * D) as f64;
        let e_vir = dof / (2.0 * beta) + virial / n as f64 + v_mean;
        let kin = kinetic_action(&self.paths, &self.k);
        let e_th = dof * n as f64 / (2.0 * beta) - kin / beta + v_mean;
        (e_vir, e_th)
    }
}

fn delta_rate(now: &MoveCounter, last: &MoveCounter) -> f64 {
    let att = now.attempted - last.attempted;
    if att == 0 {
        return 0.4;
    }
    (now.accepted - last.accepted) as f64 / att as f64
}

fn adapt(step: f64, rate: f64) -> f64 {
    let f = if rate > 0.5 {
        1.25
    } else if rate < 0.3 {
        0.8
    } else {
        1.0
    };
    (step * f).clamp(1e-6, 50.0)
}

/// Samples `system` in `sector` and returns block-averaged estimators.
pub fn sample_system<S: PathSystem<D>, const D: usize>(
    system: &S,
    cfg: &PimcConfig,
    sector: Sector,
) -> Result<SampleStats> {
    let mut chain = Chain::new(system, cfg, sector, 0)?;
    chain.burn_in(cfg.burn_in);
    let beta = cfg.beta();
    let identity = sector.lambda() == 0.0;
    let np = system.n_particles();
    let n = cfg.n_slices;
    let mut e_vir = Vec::new();
    let mut e_th = Vec::new();
    let mut moments = vec![Vec::with_capacity(cfg.n_sweeps); D];
    let mut means = vec![vec![0.0; D]; np];
    for _ in 0..cfg.n_sweeps {
        chain.sweep();
        if identity {
            let (v, t) = chain.energies(beta);
            e_vir.push(v);
            e_th.push(t);
        }
        let mut acc = [0.0; D];
        for (i, line) in chain.paths.beads.iter().enumerate() {
            for r in line {
                for a in 0..D {
                    acc[a] += r[a] * r[a];
                    means[i][a] += r[a];
                }
            }
        }
        for a in 0..D {
            moments[a].push(acc[a] / (np * n) as f64);
        }
    }
    chain.check_acceptance()?;
    let total = (cfg.n_sweeps * n) as f64;
    for m in &mut means {
        for v in m.iter_mut() {
            *v /= total;
        }
    }
    Ok(SampleStats {
        energy_virial: identity.then(|| block_average(&e_vir, cfg.n_blocks)),
        energy_thermo: identity.then(|| block_average(&e_th, cfg.n_blocks)),
        second_moments: moments
            .iter()
            .map(|m| block_average(m, cfg.n_blocks))
            .collect(),
        mean_positions: means,
        acceptance: chain.acceptance,
        coincidences: chain.coincidences,
        n_samples: cfg.n_sweeps,
        energy_samples: e_vir,
    })
}

/// Samples the two-electron device in `sector`.
pub fn sample(
    pot: &DoubleDotPotential,
    surface: &RoughSurface,
    cfg: &PimcConfig,
    sector: Sector,
) -> Result<SampleStats> {
    let system = device_system(pot, surface, cfg);
    sample_system(&system, cfg, sector)
}
