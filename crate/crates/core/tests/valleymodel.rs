use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rough_dot::electrostatics::HarmonicDot;
use rough_dot::stats::wrap_phase;
use rough_dot::surface::{generate_surface, FractalParams, RoughSurface};
use rough_dot::units::{kinetic_prefactor, A0, K0, MONOLAYER, M_TRANSVERSE};
use rough_dot::valleymodel::*;

fn synthetic(phase: f64, grid: &ZGrid) -> (Vec<f64>, Vec<f64>) {
    let center = grid.z0 + 0.5 * grid.nz as f64 * grid.dz;
    let env = |z: f64| (-(z - center).powi(2) / 8.0).exp();
    let (mut plus, mut minus) = (Vec::new(), Vec::new());
    for j in 0..grid.nz {
        let z = grid.z0 + j as f64 * grid.dz;
        let c = (2.0 * K0 * z + phase).cos();
        plus.push(env(z) * (1.0 + c));
        minus.push(env(z) * (1.0 - c));
    }
    (plus, minus)
}

#[test]
fn synthetic_phase_recovered_over_random_draws() {
    let grid = ZGrid {
        nz: 400,
        dz: MONOLAYER / 4.0,
        z0: 0.0,
    };
    let bin = 2.0 * PI / (grid.nz as f64 * grid.dz);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..100 {
        let phi = rng.random_range(-PI..PI);
        let (p, m) = synthetic(phi, &grid);
        let v = extract_valley_phase(&p, &m, &grid).unwrap();
        assert!(
            wrap_phase(v.phase - phi).abs() < 0.01,
            "{phi} -> {}",
            v.phase
        );
        assert!((v.peak_bin_k - 2.0 * K0).abs() <= bin);
    }
}

#[test]
fn interface_translation_rotates_phase() {
    for e_z in [8.0, 28.0] {
        let a = chain_valley_splitting(&build_chain(e_z, 0.0, 300).unwrap()).unwrap();
        let b = chain_valley_splitting(&build_chain(e_z, 4.0 * MONOLAYER, 300).unwrap()).unwrap();
        assert!((a.splitting - b.splitting).abs() < 1e-4 * a.splitting);
        let shift = wrap_phase(b.phase.unwrap() - a.phase.unwrap() + 2.0 * K0 * A0);
        assert!(shift.abs() < 0.02, "phase shift error {shift}");
    }
}

#[test]
fn hard_wall_states_oscillate_at_twice_k0() {
    let params = ChainParams {
        barrier: 1e5,
        interface_width: 0.005,
        n_oxide: 40,
    };
    let chain = build_chain_with(1e-3, 0.0, 300, params).unwrap();
    let bin = 2.0 * PI / (chain.n_sites as f64 * chain.a);
    let grid = ZGrid {
        nz: chain.n_sites,
        dz: chain.a,
        z0: chain.site_z(0),
    };
    let (_, dens) = chain_states(&chain).unwrap();
    let p = extract_valley_phase(&dens[0], &dens[1], &grid).unwrap();
    assert!((p.peak_bin_k - 2.0 * K0).abs() <= bin);
}

#[test]
fn splitting_converges_with_chain_length() {
    let a = chain_valley_splitting(&build_chain(28.0, 0.0, 300).unwrap()).unwrap();
    let b = chain_valley_splitting(&build_chain(28.0, 0.0, 600).unwrap()).unwrap();
    for i in 0..2 {
        assert!((a.energies[i] - b.energies[i]).abs() < 1e-3 * a.energies[i].abs().max(1.0));
    }
}

#[test]
fn splitting_grows_with_field_in_range() {
    let mut last = 0.0;
    for e_z in [8.0, 16.0, 24.0, 32.0, 40.0] {
        let v = chain_valley_splitting(&build_chain(e_z, 0.0, 300).unwrap()).unwrap();
        assert!(v.splitting > last, "E_z {e_z}: {} <= {last}", v.splitting);
        last = v.splitting;
    }
    let v = chain_valley_splitting(&build_chain(28.0, 0.0, 300).unwrap()).unwrap();
    assert!(v.splitting > 0.1 && v.splitting < 1.0, "{}", v.splitting);
}

fn flat() -> RoughSurface {
    RoughSurface::flat(201, 0.4, (-40.0, -40.0), 0.0).unwrap()
}

fn dot(x: f64, y: f64) -> HarmonicDot {
    HarmonicDot::isotropic(x, y, 0.3, 28.0).unwrap()
}

#[test]
fn flat_envelope_matches_oscillator() {
    let env = solve_envelope(&dot(0.0, 0.0), &flat(), &EnvelopeOptions::default()).unwrap();
    let p = kinetic_prefactor(M_TRANSVERSE);
    let sigma = (p / 0.3).powf(0.25) / 2f64.sqrt();
    assert!(env.center.0.abs() < 1e-9 && env.center.1.abs() < 1e-9);
    assert!(
        (env.spread.0 / sigma - 1.0).abs() < 0.01,
        "{} vs {sigma}",
        env.spread.0
    );
    assert!((env.energy / (2.0 * (p * 0.3).sqrt()) - 1.0).abs() < 0.01);
    let total: f64 = env.density.iter().sum::<f64>() * env.h * env.h;
    assert!((total - 1.0).abs() < 1e-9);
    assert!(!env.confinement_warning);
}

#[test]
fn tilted_interface_shifts_center() {
    let g = 0.01;
    let tilted = RoughSurface::from_fn(201, 201, 0.4, (-40.0, -40.0), |x, _| g * x).unwrap();
    let env = solve_envelope(&dot(0.0, 0.0), &tilted, &EnvelopeOptions::default()).unwrap();
    let expect = -28.0 * g / (2.0 * 0.3);
    assert!(
        (env.center.0 / expect - 1.0).abs() < 0.02,
        "{} vs {expect}",
        env.center.0
    );
    assert!(env.center.1.abs() < 1e-6);
}

fn rough(seed: u64) -> RoughSurface {
    let extent = 80.0;
    let n = 200;
    let dx = extent / n as f64;
    let s = generate_surface(
        FractalParams::full_band(0.28, 1.4, extent, dx),
        extent,
        dx,
        seed,
    )
    .unwrap();
    RoughSurface::from_heights(s.heights().to_vec(), n, n, dx, (-40.0, -40.0)).unwrap()
}

#[test]
fn rough_energy_obeys_variational_bound() {
    let s = rough(4);
    let opts = EnvelopeOptions::default();
    let d = dot(0.0, 0.0);
    let bare = solve_envelope(&d, &flat(), &opts).unwrap();
    let env = solve_envelope(&d, &s, &opts).unwrap();
    assert_eq!(bare.stride, 1);
    let cell = bare.h * bare.h;
    let mut trial = bare.energy;
    for iy in 0..bare.ny {
        for ix in 0..bare.nx {
            let (x, y) = bare.node(ix, iy);
            trial += 28.0 * bare.density[iy * bare.nx + ix] * cell * s.sample(x, y).unwrap();
        }
    }
    assert!(env.energy <= trial + 1e-6, "{} > {trial}", env.energy);
}

#[test]
fn dot_splitting_never_exceeds_chain() {
    let chain = chain_valley_splitting(&build_chain(28.0, 0.0, 300).unwrap()).unwrap();
    let s = rough(12);
    for &(x, y) in &[(0.0, 0.0), (-10.0, 8.0), (12.0, -5.0)] {
        let env = solve_envelope(&dot(x, y), &s, &EnvelopeOptions::default()).unwrap();
        let v = dot_valley_observables(&env, &s, &chain);
        assert!(v.splitting <= chain.splitting * (1.0 + 1e-12));
        assert!(v.suppression <= 1.0 + 1e-12);
    }
    let env = solve_envelope(&dot(0.0, 0.0), &flat(), &EnvelopeOptions::default()).unwrap();
    let v = dot_valley_observables(&env, &flat(), &chain);
    assert!((v.splitting - chain.splitting).abs() < 1e-12);
    assert!(wrap_phase(v.phase.unwrap() - chain.phase.unwrap()).abs() < 0.05);
}

#[test]
fn monolayer_step_under_half_the_dot_matches_closed_form() {
    let chain = chain_valley_splitting(&build_chain(28.0, 0.0, 300).unwrap()).unwrap();
    let step = RoughSurface::from_fn(201, 201, 0.4, (-40.0, -40.0), |x, _| {
        if x > 0.2 {
            MONOLAYER
        } else {
            0.0
        }
    })
    .unwrap();
    let env = solve_envelope(&dot(0.0, 0.0), &step, &EnvelopeOptions::default()).unwrap();
    let v = dot_valley_observables(&env, &step, &chain);
    let p: f64 = env
        .surface_weights(&step)
        .iter()
        .filter(|&&(ix, iy, _)| step.at(ix, iy) > 0.0)
        .map(|e| e.2)
        .sum();
    let theta = 2.0 * K0 * MONOLAYER;
    let expect = ((1.0 - p).powi(2) + p * p + 2.0 * p * (1.0 - p) * theta.cos()).sqrt();
    assert!((v.suppression - expect).abs() < 1e-9);
    assert!(p > 0.3 && p < 0.6, "step weight {p}");
}

#[test]
fn observables_follow_lateral_translation() {
    let chain = chain_valley_splitting(&build_chain(28.0, 0.0, 300).unwrap()).unwrap();
    let s = rough(21);
    let shift = 10;
    let moved = RoughSurface::from_fn(200, 200, s.dx(), (-40.0, -40.0), |x, y| {
        s.sample((x - shift as f64 * s.dx()).max(-40.0), y).unwrap()
    })
    .unwrap();
    let a = solve_envelope(&dot(-5.0, 0.0), &s, &EnvelopeOptions::default()).unwrap();
    let b = solve_envelope(
        &dot(-5.0 + shift as f64 * s.dx(), 0.0),
        &moved,
        &EnvelopeOptions::default(),
    )
    .unwrap();
    assert!((a.energy - b.energy).abs() < 1e-7);
    assert!((b.center.0 - a.center.0 - shift as f64 * s.dx()).abs() < 1e-6);
    let va = dot_valley_observables(&a, &s, &chain);
    let vb = dot_valley_observables(&b, &moved, &chain);
    assert!((va.splitting - vb.splitting).abs() < 1e-7);
}
