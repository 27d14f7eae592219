use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use revqe::dynamics::{
    birkhoff_average, check_evolvred, hamiltonian, integrate, integrate_with, reduce, reduced_flow, reduced_period,
    sample_states, space_average_reduced_shell, Branch, IntegratorConfig, PhaseState, ReducedState,
};
use revqe::geometry::{build_profile, ProfileCurve, SurfaceSpec};
use revqe::quad::GaussRule;

fn sphere() -> ProfileCurve {
    build_profile(&SurfaceSpec::round_sphere(400)).unwrap()
}

fn ellipsoid() -> ProfileCurve {
    build_profile(&SurfaceSpec::ellipsoid(2.0, 400)).unwrap()
}

/// (1/L)∫₀^L f dθ by composite Gauss–Legendre, independent of the library's quadrature.
fn meridian_mean(curve: &ProfileCurve, f: impl Fn(f64) -> f64) -> f64 {
    let rule = GaussRule::new(20);
    let l = curve.length();
    let pieces = 64;
    (0..pieces)
        .map(|k| rule.integrate(&f, l * k as f64 / pieces as f64, l * (k + 1) as f64 / pieces as f64))
        .sum::<f64>()
        / l
}

#[test]
fn energy_and_momentum_over_a_thousand_steps() {
    for curve in [sphere(), ellipsoid()] {
        for s0 in sample_states(&curve, 5, 3, false) {
            let rep = integrate(&curve, &s0, 1.0, 1e-3).unwrap();
            assert_eq!(rep.steps, 1000);
            assert!(rep.energy_drift < 1e-8, "{}", rep.energy_drift);
            assert!(rep.p_phi_drift < 1e-12);
        }
    }
}

#[test]
fn energy_drift_over_long_run() {
    let s0 = PhaseState::new(1.0, 0.0, 0.6, 0.5);
    let rep = integrate(&ellipsoid(), &s0, 100.0, 1e-3).unwrap();
    assert!(rep.energy_drift < 1e-8, "{}", rep.energy_drift);
}

#[test]
fn forward_then_backward_returns() {
    let curve = ellipsoid();
    for s0 in sample_states(&curve, 4, 11, false) {
        let there = integrate(&curve, &s0, 3.0, 1e-3).unwrap().final_state();
        let back = integrate(&curve, &there, -3.0, 1e-3).unwrap().final_state();
        assert!((back.theta - s0.theta).abs() < 1e-8);
        assert!((back.p_theta - s0.p_theta).abs() < 1e-8);
        let dphi = (back.phi - s0.phi + PI).rem_euclid(2.0 * PI) - PI;
        assert!(dphi.abs() < 1e-8);
    }
}

#[test]
fn equatorial_orbit_stays_on_the_equator() {
    let curve = ellipsoid();
    let eq = curve.length() / 2.0;
    let rep = integrate(&curve, &PhaseState::new(eq, 0.0, 0.0, 1.5), 20.0, 1e-2).unwrap();
    assert!(rep.samples.iter().all(|s| (s.state.theta - eq).abs() < 1e-10));
}

#[test]
fn rotations_commute_with_the_flow() {
    let curve = ellipsoid();
    let s0 = PhaseState::new(1.2, 0.4, -0.3, 0.45);
    let a = integrate(&curve, &s0.rotated(2.1), 2.0, 1e-3).unwrap().final_state();
    let b = integrate(&curve, &s0, 2.0, 1e-3).unwrap().final_state().rotated(2.1);
    assert_eq!((a.theta, a.p_theta, a.p_phi), (b.theta, b.p_theta, b.p_phi));
    assert!((a.phi - b.phi).abs() < 1e-12);
}

#[test]
fn reduction_commutes_with_the_flow() {
    for curve in [sphere(), ellipsoid()] {
        for s0 in sample_states(&curve, 5, 5, true) {
            let r0 = reduce(&s0).unwrap();
            let mut cfg = IntegratorConfig::new(1e-3);
            cfg.sample_every = 100;
            let full = integrate_with(&curve, &s0, 4.0, &cfg).unwrap();
            let reduced = reduced_flow(&curve, &r0, 4.0, full.samples.len() - 1).unwrap();
            for (s, (t, r)) in full.samples.iter().zip(&reduced.samples) {
                assert!((s.t - t).abs() < 1e-12);
                let img = reduce(&s.state).unwrap();
                assert!((img.theta - r.theta).abs() < 1e-9, "t = {t}");
                assert_eq!(img.p_theta, r.p_theta);
                assert_eq!(img.branch, r.branch);
            }
        }
    }
}

#[test]
fn meridian_visits_both_branches() {
    let curve = ellipsoid();
    let s0 = PhaseState::new(0.7, 0.0, 1.0, 0.0);
    let mut cfg = IntegratorConfig::new(1e-2);
    cfg.sample_every = 5;
    let rep = integrate_with(&curve, &s0, reduced_period(&curve, 1.0).unwrap(), &cfg).unwrap();
    let branches: Vec<_> = rep.samples.iter().map(|s| reduce(&s.state).unwrap().branch).collect();
    assert!(branches.contains(&Branch::Up) && branches.contains(&Branch::Down));
    let end = rep.final_state();
    assert!((end.theta - s0.theta).abs() < 1e-10 && end.p_theta == 1.0);
    assert!(reduced_flow(&curve, &reduce(&s0).unwrap(), 10.0, 50).unwrap().visits_both_branches());
}

#[test]
fn birkhoff_equals_space_average_equals_meridian_mean() {
    let fs: [(&str, fn(f64) -> f64); 4] =
        [("one", |_| 1.0), ("theta", |t| t), ("cos", f64::cos), ("theta2", |t| t * t)];
    for curve in [sphere(), ellipsoid()] {
        let r0 = ReducedState::new(0.37 * curve.length(), -1.0);
        let period = reduced_period(&curve, 1.0).unwrap();
        for (name, f) in fs {
            let g = move |t: f64, _p: f64| f(t);
            let time = birkhoff_average(&curve, &g, &r0, period).unwrap();
            let space = space_average_reduced_shell(&curve, &g, 1.0).unwrap().mean;
            let oracle = meridian_mean(&curve, f);
            assert!((time - space).abs() < 1e-8, "{name}: {time} vs {space}");
            assert!((space - oracle).abs() < 1e-8, "{name}: {space} vs {oracle}");
        }
    }
}

#[test]
fn birkhoff_equals_space_average_for_random_functions() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let curve = ellipsoid();
    for _ in 0..5 {
        let coeffs: Vec<(f64, f64, f64)> =
            (0..4).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(0.0..3.0), rng.gen_range(-1.0..1.0))).collect();
        let f = move |t: f64, p: f64| {
            coeffs.iter().map(|&(a, w, b)| a * (w * t).sin() + b * p * (w * t).cos()).sum::<f64>()
        };
        let c: f64 = rng.gen_range(0.3..2.0);
        let r0 = ReducedState::new(rng.gen_range(0.1..2.0), -c.sqrt());
        let period = reduced_period(&curve, c).unwrap();
        let time = birkhoff_average(&curve, &f, &r0, period).unwrap();
        let space = space_average_reduced_shell(&curve, &f, c).unwrap().mean;
        assert!((time - space).abs() < 1e-8);
    }
}

#[test]
fn shell_volume_on_the_unit_sphere() {
    let shell = space_average_reduced_shell(&sphere(), &|_, _| 1.0, 1.0).unwrap();
    assert!((shell.mean - 1.0).abs() < 1e-14);
    assert!((shell.volume - PI).abs() < 1e-12);
}

#[test]
fn averaging_commutes_with_time_evolution() {
    let curve = ellipsoid();
    let samples = sample_states(&curve, 20, 0, false);
    let cfg = IntegratorConfig::new(1e-3);
    let a = |s: &PhaseState| s.phi.cos() * (1.0 + s.theta * s.theta);
    let worst = check_evolvred(&curve, &a, 0.7, &samples, &cfg, 16).unwrap();
    assert!(worst < 1e-6, "{worst}");
    // invariant observables see no discrepancy at all
    let inv = |s: &PhaseState| s.theta.sin() + s.p_theta * s.p_phi;
    assert!(check_evolvred(&curve, &inv, 0.7, &samples[..4], &cfg, 8).unwrap() < 1e-12);
}

#[test]
fn trajectory_csv_has_expected_header() {
    let curve = sphere();
    let rep = integrate(&curve, &PhaseState::new(1.0, 0.0, 0.2, 0.3), 0.01, 1e-3).unwrap();
    let mut buf = Vec::new();
    rep.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("t,theta,phi,p_theta,p_phi,H\n"));
    assert_eq!(text.lines().count(), rep.samples.len() + 1);
    assert!((hamiltonian(&curve, &rep.samples[0].state).unwrap() - 0.04 - 0.09 / 1f64.sin().powi(2)).abs() < 1e-14);

    let red = reduced_flow(&curve, &ReducedState::new(1.0, 1.0), 1.0, 4).unwrap();
    let mut buf = Vec::new();
    red.write_csv(&mut buf).unwrap();
    assert!(String::from_utf8(buf).unwrap().starts_with("t,theta,p_theta,branch\n"));
}
