use rough_dot::electrostatics::{build_double_dot, GateResponse, HarmonicDot, MergeRule};
use rough_dot::pimc::oracle::{exact_exchange_1d, OracleOptions};
use rough_dot::pimc::*;
use rough_dot::surface::RoughSurface;
use rough_dot::units::{kinetic_prefactor, HBAR};

/// Constant potential per particle, no interaction.
struct Plateau;

impl PathSystem<1> for Plateau {
    fn masses(&self) -> [f64; 1] {
        [0.19]
    }
    fn n_particles(&self) -> usize {
        2
    }
    fn external(&self, r: &[f64; 1]) -> f64 {
        if r[0] < 0.0 {
            1.5
        } else {
            2.5
        }
    }
    fn initial_positions(&self) -> Vec<[f64; 1]> {
        vec![[-1.0], [1.0]]
    }
}

fn static_paths(sector: Sector, m: usize) -> PathEnsemble<1> {
    PathEnsemble::constant(&[[-1.0], [1.0]], m, sector)
}

#[test]
fn static_paths_carry_potential_action_only() {
    let tau_e = 0.01;
    let m = 64;
    let s = system_action(&Plateau, &static_paths(Sector::Identity, m), tau_e);
    assert!((s - tau_e * m as f64 * (1.5 + 2.5)).abs() < 1e-12);
}

#[test]
fn exchange_closure_adds_two_links() {
    let tau_e = 0.01;
    let m = 64;
    let ident = system_action(&Plateau, &static_paths(Sector::Identity, m), tau_e);
    let exch = system_action(&Plateau, &static_paths(Sector::Exchange, m), tau_e);
    let k = 1.0 / (4.0 * kinetic_prefactor(0.19) * tau_e);
    assert!((exch - ident - 2.0 * k * 4.0).abs() < 1e-9 * exch);
    let half = system_action(&Plateau, &static_paths(Sector::Closing(0.5), m), tau_e);
    assert!((half - ident - 2.0 * k * 1.0).abs() < 1e-9 * half);
}

#[test]
fn free_link_action() {
    let tau_e = 0.02;
    let paths = PathEnsemble {
        beads: vec![vec![[0.0], [0.3]]],
        sector: Sector::Identity,
    };
    struct Free;
    impl PathSystem<1> for Free {
        fn masses(&self) -> [f64; 1] {
            [0.98]
        }
        fn n_particles(&self) -> usize {
            1
        }
        fn external(&self, _: &[f64; 1]) -> f64 {
            0.0
        }
        fn initial_positions(&self) -> Vec<[f64; 1]> {
            vec![[0.0]]
        }
    }
    let k = 1.0 / (4.0 * kinetic_prefactor(0.98) * tau_e);
    assert!((system_action(&Free, &paths, tau_e) - 2.0 * k * 0.09).abs() < 1e-12);
}

#[test]
fn interface_step_is_half_at_the_interface() {
    assert!((interface_step(0.0) - 0.5).abs() < 1e-15);
    assert!(interface_step(1.0) > 0.999);
    assert!(interface_step(-1.0) < 0.001);
}

fn harmonic_energy(omegas: [f64; 3], beta: f64) -> f64 {
    omegas
        .iter()
        .map(|w| 0.5 * w / (0.5 * beta * w).tanh())
        .sum()
}

fn anisotropic() -> (HarmonicWell<3>, [f64; 3]) {
    let masses = [0.19, 0.19, 0.98];
    let omegas = [1.0, 1.0, 2.5];
    let springs = std::array::from_fn(|a| spring_for(masses[a], omegas[a]));
    (HarmonicWell { masses, springs }, omegas)
}

fn harmonic_cfg(kt: f64, slices: usize) -> PimcConfig {
    let mut cfg = PimcConfig::at_temperature(kt, slices);
    cfg.n_sweeps = 3000;
    cfg.burn_in = 300;
    cfg
}

#[test]
fn anisotropic_harmonic_energy_and_widths() {
    let (sys, omegas) = anisotropic();
    let cfg = harmonic_cfg(0.25, 128);
    let st = sample_system(&sys, &cfg, Sector::Identity).unwrap();
    let e = st.energy_virial.unwrap();
    let exact = harmonic_energy(omegas, cfg.beta());
    assert!(
        (e.mean - exact).abs() < 2.0 * e.std_err,
        "{} +- {} vs {exact}",
        e.mean,
        e.std_err
    );
    for a in 0..3 {
        let p = kinetic_prefactor(sys.masses[a]);
        let expect = p / omegas[a] / (0.5 * cfg.beta() * omegas[a]).tanh();
        let got = &st.second_moments[a];
        assert!(
            (got.mean - expect).abs() < 3.0 * got.std_err + 0.01 * expect,
            "axis {a}: {} vs {expect}",
            got.mean
        );
    }
    let ratio = st.second_moments[2].mean / st.second_moments[0].mean;
    let width = |m: f64, w: f64| kinetic_prefactor(m) / w / (0.5 * cfg.beta() * w).tanh();
    let expect = width(0.98, 2.5) / width(0.19, 1.0);
    assert!((ratio / expect - 1.0).abs() < 0.1, "{ratio} vs {expect}");
}

#[test]
fn ground_energy_survives_doubling_beta() {
    let sys = HarmonicWell::<3>::isotropic(0.19, 2.0);
    let a = sample_system(&sys, &harmonic_cfg(0.2, 128), Sector::Identity)
        .unwrap()
        .energy_virial
        .unwrap();
    let b = sample_system(&sys, &harmonic_cfg(0.1, 256), Sector::Identity)
        .unwrap()
        .energy_virial
        .unwrap();
    let err = (a.std_err.powi(2) + b.std_err.powi(2)).sqrt();
    assert!(
        (a.mean - b.mean).abs() < 3.0 * err,
        "{} vs {}",
        a.mean,
        b.mean
    );
    assert!((b.mean - 3.0).abs() < 3.0 * b.std_err);
}

#[test]
fn trotter_halving_is_within_error() {
    let (sys, _) = anisotropic();
    let cfg = harmonic_cfg(0.25, 128);
    let a = sample_system(&sys, &cfg, Sector::Identity)
        .unwrap()
        .energy_virial
        .unwrap();
    let b = sample_system(&sys, &cfg.trotter_halved(), Sector::Identity)
        .unwrap()
        .energy_virial
        .unwrap();
    let err = (a.std_err.powi(2) + b.std_err.powi(2)).sqrt();
    assert!((a.mean - b.mean).abs() < 2.0 * err);
}

#[test]
fn halves_of_a_run_agree() {
    let sys = HarmonicWell::<3>::isotropic(0.19, 1.0);
    let st = sample_system(&sys, &harmonic_cfg(0.25, 128), Sector::Identity).unwrap();
    let n = st.energy_samples.len() / 2;
    let first = rough_dot::stats::block_average(&st.energy_samples[..n], 8);
    let second = rough_dot::stats::block_average(&st.energy_samples[n..], 8);
    let err = (first.std_err.powi(2) + second.std_err.powi(2)).sqrt();
    assert!((first.mean - second.mean).abs() < 3.0 * err);
}

#[test]
fn runs_are_deterministic() {
    let sys = HarmonicWell::<3>::isotropic(0.19, 1.0);
    let mut cfg = harmonic_cfg(0.25, 128);
    cfg.n_sweeps = 300;
    let a = sample_system(&sys, &cfg, Sector::Identity).unwrap();
    let b = sample_system(&sys, &cfg, Sector::Identity).unwrap();
    assert_eq!(a.energy_samples, b.energy_samples);
    cfg.seed += 1;
    let c = sample_system(&sys, &cfg, Sector::Identity).unwrap();
    assert_ne!(a.energy_samples, c.energy_samples);
}

#[test]
fn frozen_staging_is_reported() {
    // A very stiff well rejects every free-particle bridge.
    let sys = HarmonicWell::<1> {
        masses: [0.19],
        springs: [1e9],
    };
    let mut cfg = harmonic_cfg(1.0, 64);
    cfg.n_sweeps = 50;
    cfg.burn_in = 20;
    assert!(matches!(
        sample_system(&sys, &cfg, Sector::Identity),
        Err(rough_dot::Error::Sampler(_))
    ));
}

#[test]
fn bar_recovers_gaussian_free_energy() {
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};
    // Work distributions of two harmonic states with a known ΔF.
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let (mu, var): (f64, f64) = (1.3, 0.8);
    let fwd: Vec<f64> = Normal::new(mu + 0.5 * var, var.sqrt())
        .unwrap()
        .sample_iter(&mut rng)
        .take(20000)
        .collect();
    let rev: Vec<f64> = Normal::new(-mu + 0.5 * var, var.sqrt())
        .unwrap()
        .sample_iter(&mut rng)
        .take(20000)
        .collect();
    let df = bar_free_energy(&fwd, &rev).unwrap();
    assert!((df - mu).abs() < 0.03, "{df}");
    let back = bar_free_energy(&rev, &fwd).unwrap();
    assert!((df + back).abs() < 1e-9);
}

fn double_well(d: f64) -> DoubleWell1D {
    DoubleWell1D::new(0.19, 0.3, d, 4.0, 11.7)
}

#[test]
fn one_dimensional_exchange_matches_diagonalization() {
    let sys = double_well(14.0);
    let exact = exact_exchange_1d(
        &sys,
        &OracleOptions {
            n_grid: 400,
            ..Default::default()
        },
    )
    .unwrap();
    let mut cfg = PimcConfig::at_temperature(1.55, 256);
    cfg.n_sweeps = 6000;
    cfg.burn_in = 400;
    let est = estimate_exchange_for(&sys, &cfg, &ExchangeOptions::default()).unwrap();
    let j_exact = 1000.0 * exact.j;
    let target_ds = (2000.0 / cfg.beta() / j_exact).ln();
    // Slow label mixing at this distance: allow three reported errors.
    assert!(
        (est.delta_s - target_ds).abs() < 3.0 * est.delta_s_err,
        "dS {} +- {} vs {target_ds}",
        est.delta_s,
        est.delta_s_err
    );
    assert!(!est.below_floor);
}

#[test]
fn exchange_falls_with_distance() {
    let mut cfg = PimcConfig::at_temperature(1.55, 256);
    cfg.n_sweeps = 1500;
    cfg.burn_in = 300;
    let near =
        estimate_exchange_for(&double_well(12.0), &cfg, &ExchangeOptions::default()).unwrap();
    let far = estimate_exchange_for(&double_well(20.0), &cfg, &ExchangeOptions::default()).unwrap();
    assert!(
        near.j_uev > 10.0 * far.j_uev,
        "{} vs {}",
        near.j_uev,
        far.j_uev
    );
}

#[test]
fn resumed_run_is_bit_identical() {
    let sys = double_well(12.0);
    let mut cfg = PimcConfig::at_temperature(1.55, 128);
    cfg.n_sweeps = 240;
    cfg.burn_in = 100;
    let opts = ExchangeOptions {
        windows: Some(6),
        ..Default::default()
    };
    let fresh = estimate_exchange_for(&sys, &cfg, &opts).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let ck = ExchangeOptions {
        windows: Some(6),
        checkpoint_dir: Some(dir.path().to_path_buf()),
        checkpoint_every: 50,
    };
    let mut short = cfg.clone();
    short.n_sweeps = 120;
    estimate_exchange_for(&sys, &short, &ck).unwrap();
    let resumed = estimate_exchange_for(&sys, &cfg, &ck).unwrap();
    assert_eq!(fresh, resumed);

    let mut other = cfg.clone();
    other.seed += 1;
    assert!(matches!(
        estimate_exchange_for(&sys, &other, &ck),
        Err(rough_dot::Error::Format(_))
    ));
}

#[test]
fn checkpoint_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let sys = double_well(12.0);
    let mut cfg = PimcConfig::at_temperature(1.55, 64);
    cfg.n_sweeps = 20;
    cfg.burn_in = 10;
    let ck = ExchangeOptions {
        windows: Some(4),
        checkpoint_dir: Some(dir.path().to_path_buf()),
        checkpoint_every: 10,
    };
    estimate_exchange_for(&sys, &cfg, &ck).unwrap();
    let path = dir.path().join("window_0002.bin");
    let cp = read_checkpoint::<1>(&path).unwrap();
    assert_eq!(cp.meta.progress.sweeps, 20);
    assert_eq!(cp.paths.beads.len(), 2);
    let copy = dir.path().join("copy.bin");
    write_checkpoint(&copy, &cp).unwrap();
    assert_eq!(read_checkpoint::<1>(&copy).unwrap(), cp);
    assert!(read_checkpoint::<3>(&path).is_err());
}

fn device_cfg() -> PimcConfig {
    let mut cfg = PimcConfig::at_temperature(1.55, 64);
    cfg.n_sweeps = 200;
    cfg.burn_in = 100;
    cfg
}

#[test]
fn mirrored_device_gives_same_exchange() {
    let surf = RoughSurface::flat(600, 0.25, (-75.0, -75.0), 0.0).unwrap();
    let l = HarmonicDot::isotropic(-14.0, 0.0, 0.3, 28.0).unwrap();
    let r = HarmonicDot::isotropic(14.0, 0.0, 0.3, 28.0).unwrap();
    let pot = build_double_dot(
        &l,
        &r,
        0.0,
        &GateResponse::default(),
        "J1",
        MergeRule::default(),
    )
    .unwrap();
    let opts = ExchangeOptions {
        windows: Some(8),
        ..Default::default()
    };
    let a = estimate_exchange(&pot, &surf, &device_cfg(), &opts).unwrap();
    let b = estimate_exchange(&pot.mirrored(), &surf, &device_cfg(), &opts).unwrap();
    let err = (a.delta_s_err.powi(2) + b.delta_s_err.powi(2)).sqrt();
    assert!(
        (a.delta_s - b.delta_s).abs() < 3.0 * err + 0.05,
        "{} vs {}",
        a.delta_s,
        b.delta_s
    );
    assert_eq!(a.coincidences, 0);
}

#[test]
fn identical_flat_surfaces_show_no_spread() {
    let surf = RoughSurface::flat(600, 0.25, (-75.0, -75.0), 0.0).unwrap();
    let l = HarmonicDot::isotropic(-14.0, 0.0, 0.3, 28.0).unwrap();
    let r = HarmonicDot::isotropic(14.0, 0.0, 0.3, 28.0).unwrap();
    let pot = build_double_dot(
        &l,
        &r,
        0.0,
        &GateResponse::default(),
        "J1",
        MergeRule::default(),
    )
    .unwrap();
    let opts = ExchangeOptions {
        windows: Some(6),
        ..Default::default()
    };
    let mut cfg = device_cfg();
    cfg.n_sweeps = 80;
    let surfaces = vec![surf; 5];
    let table = exchange_vs_surface(&pot, &surfaces, &cfg, &opts).unwrap();
    let err = table.rows[0].estimate.delta_s_err / std::f64::consts::LN_10;
    assert!(table.log10_j_std <= err);
    assert!((table.rows[0].distance - 28.0).abs() < 1e-6);
    assert!(exchange_vs_surface(&pot, &surfaces[..4], &cfg, &opts).is_err());
}

#[test]
fn coarse_trotter_step_is_rejected() {
    let mut cfg = PimcConfig::at_temperature(0.1, 64);
    cfg.tau = 0.1 * HBAR;
    assert!(cfg.validate().is_err());
    assert!(PimcConfig::default().validate().is_ok());
}
