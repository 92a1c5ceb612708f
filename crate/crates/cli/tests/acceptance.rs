//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line
//! followed by its measured quantities.
//!
//! Select criteria with positional arguments or `ROUGH_DOT_ACCEPTANCE`,
//! e.g. `cargo test --test acceptance -- 5 6`. A failing criterion is
//! reported but only turns the exit status non-zero when
//! `ROUGH_DOT_ACCEPTANCE_STRICT=1` is set.

use std::cell::OnceCell;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rough_dot::electrostatics::{
    build_double_dot, DoubleDotPotential, GateResponse, HarmonicDot, MergeRule,
};
use rough_dot::pimc::oracle::{exact_exchange_1d, OracleOptions};
use rough_dot::pimc::{
    estimate_exchange, estimate_exchange_for, exchange_vs_surface, sample_system, spring_for,
    DoubleWell1D, ExchangeOptions, HarmonicWell, PimcConfig, Sector,
};
use rough_dot::spinorbit::{assemble_g_matrix, fit_sinusoid, g_factor, larmor_ghz, GTensor};
use rough_dot::stats::{linear_fit, mean, pearson, std_dev, wrap_phase};
use rough_dot::surface::{
    estimate_psd_2d_average, generate_surface, rms_of_segments, Axes, FractalParams, PsdOptions,
    RoughSurface,
};
use rough_dot::units::{EPS_SI, G0, K0, MONOLAYER, M_TRANSVERSE};
use rough_dot::valleymodel::{extract_valley_phase, ZGrid};
use rough_dot::variability::{
    exchange_vod, run_grid, tunability_chain, vod, DotGridSpec, GridOptions, ParamGradients,
    TunabilityInput, VariabilityReport,
};

// Surface ensemble.
const HURST: f64 = 0.28;
const HURST_TOL: f64 = 0.05;
const C0: f64 = 1.4;
const C0_FACTOR: f64 = 2.0;
const EXTENT: f64 = 500.0;
const MONOLAYER_GRID: f64 = 0.13575;
const N_SEEDS: u64 = 10;
const SURFACE_BUDGET: Duration = Duration::from_secs(30);
const RMS_10: f64 = 0.136;
const RMS_50: f64 = 0.27;
const RMS_FACTOR: f64 = 2.0;

// Dot grid.
const DISPLACEMENT_STD: (f64, f64) = (0.7, 2.8);
const DISPLACEMENT_MAX: f64 = 7.0;
const SPLITTING_DECADES: f64 = 1.0;
const SPLITTING_RANGE: (f64, f64) = (0.01, 3.0);

// Valley phase.
const PHASE_TOL: f64 = 0.01;
const N_PHASES: usize = 100;

// g-tensor.
const SO_REL_TOL: f64 = 0.01;
const LARMOR_GHZ: f64 = 27.9;
const LARMOR_TOL: f64 = 0.005;

// Dresselhaus sweep.
const C0_SWEEP: [f64; 3] = [1.4, 0.7, 0.35];

// Path integrals.
const SIGMAS: f64 = 2.0;
const ORACLE_DISTANCES: [f64; 4] = [14.0, 18.0, 22.0, 26.0];
const ORACLE_SWEEPS: usize = 20_000;
const ORACLE_DECADES: f64 = 3.0;
const POINT_BUDGET: Duration = Duration::from_secs(600);
const DISTANCE_SWEEP: [f64; 5] = [20.0, 22.5, 25.0, 27.5, 30.0];
const MIN_CORRELATION: f64 = 0.9;
const GATE_SWEEP: [f64; 4] = [1.25, 1.5, 1.75, 2.0];
const GATE_SLOPE: (f64, f64) = (6.0, 10.0);
const N_REALIZATIONS: u64 = 10;
const REALIZATION_DECADES: f64 = 2.0;
const REALIZATION_VJ: f64 = 1.75;

// Voltage offsets.
const VS_VOD_REFERENCE: f64 = 0.58;
const VOD_FACTOR: f64 = 3.0;

// Pipeline.
const PIPELINE_BUDGET: Duration = Duration::from_secs(600);

struct Part {
    label: String,
    pass: bool,
    detail: String,
}

fn part(label: &str, pass: bool, detail: impl Into<String>) -> Part {
    Part {
        label: label.to_string(),
        pass,
        detail: detail.into(),
    }
}

fn error_part(label: &str, e: impl std::fmt::Display) -> Part {
    part(label, false, format!("error: {e}"))
}

fn within_factor(x: f64, target: f64, factor: f64) -> bool {
    x >= target / factor && x <= target * factor
}

fn snapped_spacing(extent: f64, dx: f64) -> f64 {
    extent / (extent / dx).round()
}

fn log10_span(values: &[f64]) -> f64 {
    let logs: Vec<f64> = values.iter().map(|v| v.log10()).collect();
    logs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - logs.iter().copied().fold(f64::INFINITY, f64::min)
}

struct Pipeline {
    dir: PathBuf,
    elapsed: Duration,
    status: Option<i32>,
    stderr: String,
}

impl Pipeline {
    fn report(&self) -> Result<VariabilityReport, String> {
        if self.status != Some(0) {
            return Err(format!(
                "report exited with {:?}: {}",
                self.status,
                self.stderr.trim()
            ));
        }
        let text =
            fs::read_to_string(self.dir.join("run/report.json")).map_err(|e| e.to_string())?;
        serde_json::from_str(&text).map_err(|e| e.to_string())
    }
}

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rough-dot"))
}

fn run_pipeline(root: &Path) -> Pipeline {
    let start = Instant::now();
    let out = binary()
        .current_dir(root)
        .args(["report", "--out", "run"])
        .output()
        .expect("spawn rough-dot");
    Pipeline {
        dir: root.to_path_buf(),
        elapsed: start.elapsed(),
        status: out.status.code(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

fn surface_ensemble() -> Vec<Part> {
    let dx = snapped_spacing(EXTENT, MONOLAYER_GRID);
    let (mut hursts, mut c0s, mut rms10, mut rms50) = (vec![], vec![], vec![], vec![]);
    let mut slowest = Duration::ZERO;
    for seed in 1..=N_SEEDS {
        let start = Instant::now();
        let surface = match generate_surface(
            FractalParams::full_band(HURST, C0, EXTENT, dx),
            EXTENT,
            dx,
            seed,
        ) {
            Ok(s) => s,
            Err(e) => return vec![error_part("generation", e)],
        };
        let fit = estimate_psd_2d_average(&surface, 64, Axes::Both, &PsdOptions::default())
            .ok()
            .and_then(|p| p.fit);
        slowest = slowest.max(start.elapsed());
        let Some(fit) = fit else {
            return vec![part(
                "fit",
                false,
                format!("no power-law fit for seed {seed}"),
            )];
        };
        hursts.push(fit.hurst);
        c0s.push(fit.c0.ln());
        match rms_of_segments(&surface, &[10.0, 50.0]) {
            Ok(c) => {
                rms10.push(c.rms[0]);
                rms50.push(c.rms[1]);
            }
            Err(e) => return vec![error_part("rms", e)],
        }
    }
    let h = mean(&hursts);
    let c0 = mean(&c0s).exp();
    let (r10, r50) = (mean(&rms10), mean(&rms50));
    vec![
        part(
            "hurst",
            (h - HURST).abs() <= HURST_TOL,
            format!("mean H {h:.3} over {N_SEEDS} seeds"),
        ),
        part(
            "c0",
            within_factor(c0, C0, C0_FACTOR),
            format!("geometric-mean C0 {c0:.3} nm^3"),
        ),
        part(
            "runtime",
            slowest < SURFACE_BUDGET,
            format!(
                "slowest seed {:.1} s (generate + fit)",
                slowest.as_secs_f64()
            ),
        ),
        part(
            "rms10",
            within_factor(r10, RMS_10, RMS_FACTOR),
            format!("RMS(10 nm) {r10:.3} nm"),
        ),
        part(
            "rms50",
            within_factor(r50, RMS_50, RMS_FACTOR),
            format!("RMS(50 nm) {r50:.3} nm"),
        ),
    ]
}

fn displacement(report: &VariabilityReport) -> Vec<Part> {
    let ok: Vec<_> = report.rows.iter().filter(|r| r.ok()).collect();
    let dx: Vec<f64> = ok.iter().map(|r| r.displacement_x).collect();
    let dy: Vec<f64> = ok.iter().map(|r| r.displacement_y).collect();
    let spread = (std_dev(&dx).powi(2) + std_dev(&dy).powi(2)).sqrt();
    let max = ok.iter().map(|r| r.displacement).fold(0.0, f64::max);
    vec![
        part(
            "std",
            spread >= DISPLACEMENT_STD.0 && spread <= DISPLACEMENT_STD.1,
            format!("displacement std {spread:.2} nm over {} dots", ok.len()),
        ),
        part(
            "max",
            max < DISPLACEMENT_MAX,
            format!("max displacement {max:.2} nm"),
        ),
    ]
}

fn valley_variability(report: &VariabilityReport) -> Vec<Part> {
    let vs: Vec<f64> = report
        .rows
        .iter()
        .filter(|r| r.ok())
        .map(|r| r.splitting)
        .collect();
    let lo = vs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let outside = vs
        .iter()
        .filter(|v| **v < SPLITTING_RANGE.0 || **v > SPLITTING_RANGE.1)
        .count();
    let mut parts = vec![
        part(
            "spread",
            report.splitting_decades >= SPLITTING_DECADES,
            format!("{:.2} decades", report.splitting_decades),
        ),
        part(
            "range",
            outside == 0 && !vs.is_empty(),
            format!(
                "VS in [{lo:.4}, {hi:.4}] meV, {outside} of {} outside",
                vs.len()
            ),
        ),
    ];
    parts.push(match &report.phase_quartiles {
        Some(q) => part(
            "phase",
            q.top_circular_variance < q.bottom_circular_variance,
            format!(
                "circular variance top {:.3} vs bottom {:.3} ({} dots each)",
                q.top_circular_variance, q.bottom_circular_variance, q.per_quartile
            ),
        ),
        None => part("phase", false, "too few dots with a phase"),
    });
    parts
}

/// Low-discrepancy stand-in for uniform draws on [0, 1).
fn golden(i: usize) -> f64 {
    (0.5 + i as f64 * 0.618_033_988_749_895).fract()
}

fn valley_phase() -> Vec<Part> {
    let grid = ZGrid {
        nz: 400,
        dz: MONOLAYER / 4.0,
        z0: 0.0,
    };
    let bin = 2.0 * PI / (grid.nz as f64 * grid.dz);
    let (mut worst_phase, mut worst_peak) = (0.0f64, 0.0f64);
    for i in 0..N_PHASES {
        let phi = -PI + 2.0 * PI * golden(i);
        let center = grid.z0 + grid.nz as f64 * grid.dz * (0.4 + 0.2 * golden(i + 1000));
        let width = 2.0 + 2.0 * golden(i + 2000);
        let (mut plus, mut minus) = (Vec::new(), Vec::new());
        for j in 0..grid.nz {
            let z = grid.z0 + j as f64 * grid.dz;
            let env = (-(z - center).powi(2) / (2.0 * width * width)).exp();
            let c = (2.0 * K0 * z + phi).cos();
            plus.push(env * (1.0 + c));
            minus.push(env * (1.0 - c));
        }
        match extract_valley_phase(&plus, &minus, &grid) {
            Ok(p) => {
                worst_phase = worst_phase.max(wrap_phase(p.phase - phi).abs());
                worst_peak = worst_peak.max((p.peak_bin_k - 2.0 * K0).abs() / bin);
            }
            Err(e) => return vec![error_part("extract", e)],
        }
    }
    vec![
        part(
            "phase",
            worst_phase <= PHASE_TOL,
            format!("worst phase error {worst_phase:.2e} rad"),
        ),
        part(
            "peak",
            worst_peak <= 1.0,
            format!("worst peak offset {worst_peak:.2} bins from 2k0"),
        ),
    ]
}

fn g_tensor() -> Vec<Part> {
    let axes = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let cases = [
        (0.0004, 0.0021),
        (-0.0012, 0.0006),
        (0.0025, -0.0031),
        (0.0009, 0.0001),
    ];
    let angles: Vec<f64> = (0..36).map(|i| i as f64 * PI / 36.0).collect();
    let mut worst: f64 = 0.0;
    for (alpha, beta) in cases {
        let truth = GTensor::in_plane(alpha, beta);
        let eff = axes.map(|b| truth.apply(b));
        let g = match assemble_g_matrix(&axes, &eff) {
            Ok(g) => g,
            Err(e) => return vec![error_part("assemble", e)],
        };
        let sweep: Vec<f64> = angles
            .iter()
            .map(|p| g_factor(&g, [p.cos(), p.sin(), 0.0]).unwrap())
            .collect();
        match fit_sinusoid(&angles, &sweep) {
            Ok(c) => {
                worst = worst
                    .max((c.alpha / alpha - 1.0).abs())
                    .max((c.beta / beta - 1.0).abs())
            }
            Err(e) => return vec![error_part("fit", e)],
        }
    }
    let iso = GTensor::isotropic(G0);
    let worst_iso = [[1.0, 0.0, 0.0], [0.0, 0.6, 0.8], [0.0, 0.0, -1.0]]
        .iter()
        .map(|d| (larmor_ghz(g_factor(&iso, *d).unwrap(), 1.0) / LARMOR_GHZ - 1.0).abs())
        .fold(0.0, f64::max);
    vec![
        part(
            "round-trip",
            worst <= SO_REL_TOL,
            format!("worst relative error in alpha, beta {worst:.2e}"),
        ),
        part(
            "isotropic",
            worst_iso <= LARMOR_TOL,
            format!("{:.3} GHz/T at 1 T", larmor_ghz(G0, 1.0)),
        ),
    ]
}

fn beta_variance(surface: &RoughSurface, opts: &GridOptions) -> Result<(f64, usize), String> {
    let spec = DotGridSpec::square(
        7,
        50.0,
        HarmonicDot::isotropic(0.0, 0.0, 0.3, 28.0).unwrap(),
    );
    let rows = run_grid(&spec, surface, opts).map_err(|e| e.to_string())?;
    let betas: Vec<f64> = rows.iter().filter(|r| r.ok()).map(|r| r.beta).collect();
    Ok((std_dev(&betas).powi(2), betas.len()))
}

fn dresselhaus(report: Option<&VariabilityReport>) -> Vec<Part> {
    let mut parts = Vec::new();
    match report {
        Some(report) => {
            let ok: Vec<_> = report.rows.iter().filter(|r| r.ok()).collect();
            let violations = ok
                .iter()
                .filter(|r| r.beta.abs() > r.beta_max * (1.0 + 1e-12))
                .count();
            parts.push(part(
                "bound",
                violations == 0 && !ok.is_empty(),
                format!("{violations} of {} dots exceed beta_max", ok.len()),
            ));
        }
        None => parts.push(part("bound", false, "pipeline report unavailable")),
    }

    let opts = GridOptions {
        gradients: None,
        ..GridOptions::default()
    };
    let flat = RoughSurface::flat(1500, 0.2, (0.0, 0.0), 0.0).unwrap();
    let spec = DotGridSpec::square(
        3,
        50.0,
        HarmonicDot::isotropic(0.0, 0.0, 0.3, 28.0).unwrap(),
    );
    parts.push(match run_grid(&spec, &flat, &opts) {
        Ok(rows) => {
            let off = rows
                .iter()
                .filter(|r| !r.ok() || (r.beta.abs() - r.beta_max).abs() > 1e-12 * r.beta_max)
                .count();
            part(
                "flat",
                off == 0,
                format!(
                    "{} of {} flat-surface dots at |beta| = beta_max",
                    rows.len() - off,
                    rows.len()
                ),
            )
        }
        Err(e) => error_part("flat", e),
    });

    let dx = snapped_spacing(EXTENT, MONOLAYER_GRID);
    let mut variances = Vec::new();
    for c0 in C0_SWEEP {
        let v = generate_surface(
            FractalParams::full_band(HURST, c0, EXTENT, dx),
            EXTENT,
            dx,
            1,
        )
        .map_err(|e| e.to_string())
        .and_then(|s| beta_variance(&s, &opts));
        match v {
            Ok((var, _)) => variances.push(var),
            Err(e) => {
                parts.push(error_part("c0 sweep", e));
                return parts;
            }
        }
    }
    let monotone = variances.windows(2).all(|w| w[1] < w[0]);
    let listing: Vec<String> = C0_SWEEP
        .iter()
        .zip(&variances)
        .map(|(c, v)| format!("C0 {c}: {v:.3e}"))
        .collect();
    parts.push(part(
        "c0 sweep",
        monotone,
        format!("var(beta) {}", listing.join(", ")),
    ));
    parts
}

fn oracle_config(sweeps: usize) -> PimcConfig {
    let mut cfg = PimcConfig::at_temperature(1.55, 256);
    cfg.n_sweeps = sweeps;
    cfg.burn_in = 500;
    cfg
}

fn path_integral_oracle() -> Vec<Part> {
    let mut parts = Vec::new();
    let cfg = oracle_config(ORACLE_SWEEPS);
    let (mut exact, mut rows, mut all_within, mut slowest) = (vec![], vec![], true, Duration::ZERO);
    for d in ORACLE_DISTANCES {
        let sys = DoubleWell1D::new(M_TRANSVERSE, 0.3, d, 4.0, EPS_SI);
        let start = Instant::now();
        let j = match exact_exchange_1d(
            &sys,
            &OracleOptions {
                n_grid: 1024,
                ..Default::default()
            },
        ) {
            Ok(x) => 1000.0 * x.j,
            Err(e) => return vec![error_part("oracle", e)],
        };
        let est = match estimate_exchange_for(&sys, &cfg, &ExchangeOptions::default()) {
            Ok(e) => e,
            Err(e) => return vec![error_part("oracle", e)],
        };
        slowest = slowest.max(start.elapsed());
        let target = (2000.0 / cfg.beta() / j).ln();
        let z = (est.delta_s - target) / est.delta_s_err;
        all_within &= z.abs() <= SIGMAS;
        exact.push(j);
        rows.push(format!(
            "{d} nm: {j:.3e} vs {:.3e} ueV ({z:+.2} sigma)",
            est.j_uev
        ));
    }
    let span = log10_span(&exact);
    parts.push(part("double well", all_within, rows.join("; ")));
    parts.push(part(
        "decades",
        span >= ORACLE_DECADES,
        format!("exact J spans {span:.2} decades"),
    ));

    let masses = [0.19, 0.19, 0.98];
    let omegas = [1.0, 1.0, 2.5];
    let sys = HarmonicWell {
        masses,
        springs: std::array::from_fn(|a| spring_for(masses[a], omegas[a])),
    };
    let mut cfg = PimcConfig::at_temperature(0.25, 128);
    cfg.n_sweeps = 3000;
    cfg.burn_in = 300;
    let energy = |cfg: &PimcConfig| {
        sample_system(&sys, cfg, Sector::Identity)
            .map_err(|e| e.to_string())
            .and_then(|s| {
                s.energy_virial
                    .ok_or_else(|| "no virial energy".to_string())
            })
    };
    let analytic: f64 = omegas
        .iter()
        .map(|w| 0.5 * w / (0.5 * cfg.beta() * w).tanh())
        .sum();
    let (a, b) = match (energy(&cfg), energy(&cfg.trotter_halved())) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => {
            parts.push(error_part("harmonic", e));
            return parts;
        }
    };
    parts.push(part(
        "harmonic",
        (a.mean - analytic).abs() <= SIGMAS * a.std_err,
        format!("E {:.4} +- {:.4} meV vs {analytic:.4}", a.mean, a.std_err),
    ));
    let shift = (a.mean - b.mean).abs() / (a.std_err.powi(2) + b.std_err.powi(2)).sqrt();
    let mut trotter = vec![format!("harmonic {shift:.2} sigma")];
    let mut trotter_ok = shift < 1.0;

    let sys = DoubleWell1D::new(M_TRANSVERSE, 0.3, 18.0, 4.0, EPS_SI);
    let cfg = oracle_config(ORACLE_SWEEPS / 2);
    let start = Instant::now();
    match (
        estimate_exchange_for(&sys, &cfg, &ExchangeOptions::default()),
        estimate_exchange_for(&sys, &cfg.trotter_halved(), &ExchangeOptions::default()),
    ) {
        (Ok(a), Ok(b)) => {
            let s = (a.delta_s - b.delta_s).abs()
                / (a.delta_s_err.powi(2) + b.delta_s_err.powi(2)).sqrt();
            trotter.push(format!(
                "exchange at 18 nm {s:.2} sigma (dS {:.3} +- {:.3} vs {:.3} +- {:.3})",
                a.delta_s, a.delta_s_err, b.delta_s, b.delta_s_err
            ));
            trotter_ok &= s < 1.0;
        }
        (Err(e), _) | (_, Err(e)) => {
            trotter.push(format!("exchange error: {e}"));
            trotter_ok = false;
        }
    }
    slowest = slowest.max(start.elapsed() / 2);
    parts.push(part("trotter", trotter_ok, trotter.join(", ")));
    parts.push(part(
        "runtime",
        slowest < POINT_BUDGET,
        format!("slowest point {:.0} s", slowest.as_secs_f64()),
    ));
    parts
}

fn device_pair(
    separation: f64,
    center: (f64, f64),
    v_j: f64,
) -> rough_dot::Result<DoubleDotPotential> {
    let l = HarmonicDot::isotropic(center.0 - separation / 2.0, center.1, 0.3, 28.0)?;
    let r = HarmonicDot::isotropic(center.0 + separation / 2.0, center.1, 0.3, 28.0)?;
    build_double_dot(
        &l,
        &r,
        v_j,
        &GateResponse::default(),
        "J1",
        MergeRule::default(),
    )
}

fn device_config(sweeps: usize) -> PimcConfig {
    let mut cfg = PimcConfig::default();
    cfg.n_sweeps = sweeps;
    cfg.burn_in = 500;
    cfg
}

fn exchange_phenomenology() -> Vec<Part> {
    let mut parts = Vec::new();
    let flat = RoughSurface::flat(1000, 0.2, (-100.0, -100.0), 0.0).unwrap();
    let opts = ExchangeOptions::default();

    let cfg = device_config(2000);
    let (mut dist, mut logj) = (vec![], vec![]);
    for d in DISTANCE_SWEEP {
        match device_pair(d, (0.0, 0.0), 0.0)
            .and_then(|p| estimate_exchange(&p, &flat, &cfg, &opts))
        {
            Ok(e) => {
                dist.push(d);
                logj.push(e.j_uev.log10());
            }
            Err(e) => {
                parts.push(error_part("distance", e));
                break;
            }
        }
    }
    if dist.len() == DISTANCE_SWEEP.len() {
        let r = pearson(&dist, &logj).unwrap_or(0.0);
        let listing: Vec<String> = dist
            .iter()
            .zip(&logj)
            .map(|(d, l)| format!("{d}: {l:.2}"))
            .collect();
        parts.push(part(
            "distance",
            r.abs() > MIN_CORRELATION,
            format!("r = {r:.3}; log10 J [ueV] at {}", listing.join(", ")),
        ));
    }

    let cfg = device_config(4000);
    let (mut volts, mut logj) = (vec![], vec![]);
    for v in GATE_SWEEP {
        match device_pair(50.0, (0.0, 0.0), v)
            .and_then(|p| estimate_exchange(&p, &flat, &cfg, &opts))
        {
            Ok(e) => {
                volts.push(v);
                logj.push(e.j_uev.log10());
            }
            Err(e) => {
                parts.push(error_part("gate", e));
                break;
            }
        }
    }
    if volts.len() == GATE_SWEEP.len() {
        let slope = linear_fit(&volts, &logj)
            .map(|f| f.slope)
            .unwrap_or(f64::NAN);
        parts.push(part(
            "gate",
            slope >= GATE_SLOPE.0 && slope <= GATE_SLOPE.1,
            format!("d log10 J / dV_J = {slope:.2} decades/V"),
        ));
    }

    let extent = 200.0;
    let dx = snapped_spacing(extent, MONOLAYER_GRID);
    let surfaces: Result<Vec<RoughSurface>, _> = (0..N_REALIZATIONS)
        .map(|i| {
            generate_surface(
                FractalParams::full_band(HURST, C0, extent, dx),
                extent,
                dx,
                200 + i,
            )
        })
        .collect();
    let cfg = device_config(2000);
    let table = surfaces.and_then(|s| {
        let pot = device_pair(50.0, (extent / 2.0, extent / 2.0), REALIZATION_VJ)?;
        exchange_vs_surface(&pot, &s, &cfg, &opts)
    });
    parts.push(match table {
        Ok(t) => {
            let d: Vec<f64> = t.rows.iter().map(|r| r.distance).collect();
            part(
                "realizations",
                t.spread_decades >= REALIZATION_DECADES,
                format!(
                    "{} surfaces at V_J = {REALIZATION_VJ} V: J spread {:.2} decades, distance {:.1}..{:.1} nm",
                    t.rows.len(),
                    t.spread_decades,
                    d.iter().copied().fold(f64::INFINITY, f64::min),
                    d.iter().copied().fold(f64::NEG_INFINITY, f64::max)
                ),
            )
        }
        Err(e) => error_part("realizations", e),
    });
    parts
}

fn voltage_offsets(report: Option<&VariabilityReport>) -> Vec<Part> {
    let mut arithmetic = Vec::new();
    arithmetic.push(vod(&[0.2, 0.2, 0.2], TunabilityInput::Scalar(0.1)).ok() == Some(0.0));
    let v = vod(&[0.09, 0.11, 0.09, 0.11], TunabilityInput::Scalar(0.1)).unwrap_or(f64::NAN);
    arithmetic.push((v - 0.1).abs() < 1e-12);
    arithmetic.push(vod(&[0.09, 0.11], TunabilityInput::PerDot(&[0.1, 0.0])).is_err());
    arithmetic.push(exchange_vod(&[3.0; 5], 8.0).ok() == Some(0.0));
    let unit = tunability_chain(
        &ParamGradients::new(1.0, 1.0),
        &GateResponse::default(),
        "P1",
        1,
    );
    arithmetic.push(
        unit.map(|t| (t.combined - 6.68).abs() < 1e-12)
            .unwrap_or(false),
    );
    let n_ok = arithmetic.iter().filter(|b| **b).count();
    let mut parts = vec![part(
        "arithmetic",
        n_ok == arithmetic.len(),
        format!("{n_ok} of {} examples", arithmetic.len()),
    )];
    match report.and_then(|r| r.vod.valley_splitting.map(|v| (v, r.vod.reference))) {
        Some((v, reference)) => {
            let g110 = report.and_then(|r| r.vod.g_110);
            let exch = report.and_then(|r| r.vod.exchange);
            let fmt = |x: Option<f64>| x.map_or("n/a".to_string(), |v| format!("{v:.3}"));
            parts.push(part(
                "pipeline",
                within_factor(v, VS_VOD_REFERENCE, VOD_FACTOR),
                format!(
                    "VS {v:.3} V (reference {}), g[110] {} (reference {}), g[100] reference {}, exchange {} (reference {})",
                    reference.valley_splitting,
                    fmt(g110),
                    reference.g_110,
                    reference.g_100,
                    fmt(exch),
                    reference.exchange
                ),
            ));
        }
        None => parts.push(part(
            "pipeline",
            false,
            "no valley-splitting VOD in the report",
        )),
    }
    parts
}

fn reproducibility(pipeline: &Pipeline) -> Vec<Part> {
    let mut parts = vec![part(
        "runtime",
        pipeline.status == Some(0) && pipeline.elapsed < PIPELINE_BUDGET,
        format!(
            "default pipeline {:.0} s, exit {:?}",
            pipeline.elapsed.as_secs_f64(),
            pipeline.status
        ),
    )];
    let replay = binary()
        .current_dir(&pipeline.dir)
        .args(["replay", "run/manifest.json", "--out", "again"])
        .output()
        .expect("spawn rough-dot");
    let same = ["report.json", "dots.csv", "valley_splitting.svg"]
        .iter()
        .all(|f| {
            let a = fs::read(pipeline.dir.join("run").join(f));
            let b = fs::read(pipeline.dir.join("again").join(f));
            matches!((a, b), (Ok(a), Ok(b)) if a == b)
        });
    parts.push(part(
        "replay",
        replay.status.code() == Some(0) && same,
        format!(
            "replay exit {:?}, outputs identical: {same}",
            replay.status.code()
        ),
    ));
    parts
}

fn selected() -> Vec<u8> {
    let mut picks: Vec<u8> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    if let Ok(v) = std::env::var("ROUGH_DOT_ACCEPTANCE") {
        picks.extend(v.split(',').filter_map(|a| a.trim().parse::<u8>().ok()));
    }
    if picks.is_empty() {
        (1..=11).collect()
    } else {
        picks
    }
}

fn main() {
    let picks = selected();
    let wants = |id: u8| picks.contains(&id);
    let workdir = tempfile::tempdir().expect("temporary directory");
    let pipeline: OnceCell<Pipeline> = OnceCell::new();
    let pipeline = || pipeline.get_or_init(|| run_pipeline(workdir.path()));
    let report = || pipeline().report();

    let mut results: Vec<(u8, &str, Vec<Part>)> = Vec::new();
    let mut record = |id: u8, title: &'static str, parts: Vec<Part>| {
        let pass = parts.iter().all(|p| p.pass);
        println!(
            "criterion {id:>2} {} {title}",
            if pass { "PASS" } else { "FAIL" }
        );
        for p in &parts {
            println!(
                "    [{}] {}: {}",
                if p.pass { "ok" } else { "fail" },
                p.label,
                p.detail
            );
        }
        results.push((id, title, parts));
    };

    if wants(1) || wants(2) {
        let parts = surface_ensemble();
        let (psd, rms): (Vec<Part>, Vec<Part>) =
            parts.into_iter().partition(|p| !p.label.starts_with("rms"));
        if wants(1) {
            record(1, "fractal round-trip", psd);
        }
        if wants(2) {
            let rms = if rms.is_empty() {
                vec![part("rms", false, "ensemble failed")]
            } else {
                rms
            };
            record(2, "windowed RMS", rms);
        }
    }
    if wants(3) {
        let parts = report()
            .map(|r| displacement(&r))
            .unwrap_or_else(|e| vec![error_part("report", e)]);
        record(3, "dot displacement", parts);
    }
    if wants(4) {
        let parts = report()
            .map(|r| valley_variability(&r))
            .unwrap_or_else(|e| vec![error_part("report", e)]);
        record(4, "valley variability", parts);
    }
    if wants(5) {
        record(5, "valley phase extraction", valley_phase());
    }
    if wants(6) {
        record(6, "g-matrix and sinusoid", g_tensor());
    }
    if wants(7) {
        record(7, "Dresselhaus bound", dresselhaus(report().ok().as_ref()));
    }
    if wants(8) {
        record(8, "path-integral oracle", path_integral_oracle());
    }
    if wants(9) {
        record(9, "exchange phenomenology", exchange_phenomenology());
    }
    if wants(10) {
        record(
            10,
            "voltage offset deviation",
            voltage_offsets(report().ok().as_ref()),
        );
    }
    if wants(11) {
        record(11, "reproducibility", reproducibility(pipeline()));
    }

    let failed: Vec<String> = results
        .iter()
        .filter(|(_, _, parts)| !parts.iter().all(|p| p.pass))
        .map(|(id, _, _)| id.to_string())
        .collect();
    println!(
        "acceptance: {} of {} criteria pass{}",
        results.len() - failed.len(),
        results.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!("; failing: {}", failed.join(", "))
        }
    );
    let strict = std::env::var("ROUGH_DOT_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if strict && !failed.is_empty() {
        std::process::exit(1);
    }
}
