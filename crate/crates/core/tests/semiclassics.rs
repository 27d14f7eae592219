use std::f64::consts::PI;

use proptest::prelude::*;
use revqe::geometry::{build_profile, ProfileCurve, SurfaceSpec};
use revqe::semiclassics::*;
use revqe::spectral::{closed_form_sphere, closed_form_sphere_range, solve_modes};

fn sphere(n: usize) -> ProfileCurve {
    build_profile(&SurfaceSpec::round_sphere(n)).unwrap()
}

fn jj1(n: usize) -> Vec<f64> {
    (1..=n).map(|j| (j * (j + 1)) as f64).collect()
}

#[test]
fn example_partition_prefixes() {
    let part = partition(&jj1(200), 1.0 / 6.0).unwrap();
    assert_eq!(part.jk[..7], [1, 2, 3, 5, 7, 10, 14]);
    assert_eq!(part.p[..10], [1, 2, 3, 3, 5, 5, 7, 7, 7, 10]);
    assert!(part.bracket_holds(&jj1(200)));
}

proptest! {
    #[test]
    fn partition_bracket_on_random_sequences(
        steps in prop::collection::vec(0.0f64..3.0, 1..200),
        start in 0.1f64..10.0,
        beta in 0.05f64..3.0,
    ) {
        let a: Vec<f64> = steps.iter().scan(start, |acc, s| { *acc += s; Some(*acc) }).collect();
        let part = partition(&a, beta).unwrap();
        prop_assert_eq!(part.jk[0], 1);
        prop_assert!(part.jk.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(part.p.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(part.bracket_holds(&a));
        // each block start is the first index beyond the previous threshold
        for w in part.jk.windows(2) {
            let base = a[w[0] - 1];
            let threshold = base * (1.0 + base.powf(-beta / 2.0));
            prop_assert!(a[w[1] - 1] > threshold);
            prop_assert!(a[w[1] - 2] <= threshold);
        }
    }

    #[test]
    fn growing_family_cardinality(vartheta in 0.0f64..1.5, h in 1e-4f64..1.0) {
        let fam = CharacterFamily::growing(vartheta);
        let members = fam.members(h);
        prop_assert_eq!(members.len(), fam.cardinality(h));
        prop_assert_eq!(members.len() % 2, 1);
        let bound = *members.last().unwrap() as f64;
        prop_assert!(bound <= h.powf(-vartheta) * (1.0 + 1e-12));
        prop_assert!(bound + 1.0 > h.powf(-vartheta));
    }
}

#[test]
fn quantum_limit_of_the_constant_is_exact() {
    let c = sphere(1200);
    let pairs = closed_form_sphere_range(1, 1, 100, &c).unwrap();
    let report = quantum_limit(&c, &pairs, &TestFunction::One).unwrap();
    assert!(report.max_deviation() < 1e-10);
}

#[test]
fn matrix_elements_are_linear_and_bounded() {
    let c = build_profile(&SurfaceSpec::ellipsoid(2.0, 1000)).unwrap();
    let spectra = solve_modes(&c, &[0, 3], 1000, 20).unwrap();
    let f = |t: f64| t.sin() + 0.3;
    let g = |t: f64| (2.0 * t).cos() * t;
    for pair in spectra.iter().flat_map(|s| &s.pairs) {
        let lhs = matrix_element(pair, &|t| 2.5 * f(t) - 1.5 * g(t)).unwrap();
        let rhs = 2.5 * matrix_element(pair, &f).unwrap() - 1.5 * matrix_element(pair, &g).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
        assert!((matrix_element(pair, &|_| 1.0).unwrap() - 1.0).abs() < 1e-10);
        let sup = 1.3;
        assert!(matrix_element(pair, &f).unwrap().abs() <= sup);
    }
}

#[test]
fn parity_null_on_symmetric_profiles() {
    for curve in [sphere(1000), build_profile(&SurfaceSpec::ellipsoid(2.0, 1000)).unwrap()] {
        let half = curve.length() / 2.0;
        let odd = move |t: f64| (t - half) * (1.0 + (t - half).powi(2));
        let spectra = solve_modes(&curve, &[0, 1, -2], 1000, 15).unwrap();
        for pair in spectra.iter().flat_map(|s| &s.pairs) {
            let v = matrix_element(pair, &odd).unwrap();
            assert!(v.abs() < 1e-10, "m = {}, k = {}: {v:e}", pair.m, pair.k);
        }
    }
    let c = sphere(2000);
    for l in [0, 5, 40, 101] {
        let p = closed_form_sphere(l, 0, &c).unwrap();
        assert!(matrix_element(&p, &|t| t.cos()).unwrap().abs() < 1e-10);
    }
}

#[test]
fn large_degree_matrix_element_is_near_the_limit() {
    let c = sphere(4000);
    let p = closed_form_sphere(200, 0, &c).unwrap();
    let mu = matrix_element(&p, &|t| t).unwrap();
    assert!((mu - PI / 2.0).abs() < 0.02);
}

#[test]
fn theta_density_examples() {
    let c = sphere(2000);
    let d = theta_density(&closed_form_sphere(0, 0, &c).unwrap()).unwrap();
    assert!(d.iter().all(|v| (v - 1.0 / (4.0 * PI)).abs() < 1e-10));
    let p = closed_form_sphere(5, 2, &c).unwrap();
    let d = theta_density(&p).unwrap();
    let total: f64 = p.weights().iter().zip(&d).map(|(w, v)| w * v).sum();
    assert!((total - 1.0).abs() < 1e-12);
    let p = closed_form_sphere(30, 30, &c).unwrap();
    let d = theta_density(&p).unwrap();
    let peak = d.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
    assert!((p.theta()[peak] - PI / 2.0).abs() < 2.0 * c.step());
    // density equals the rotation average of |f e^{imφ}|²
    for (v, f) in d.iter().zip(p.f()) {
        let avg: f64 =
            (0..8).map(|j| (f * (j as f64).cos()).powi(2) + (f * (j as f64).sin()).powi(2)).sum::<f64>() / 8.0;
        assert!((v - avg).abs() < 1e-15 * (1.0 + v));
    }
}

#[test]
fn numeric_and_closed_form_windows_agree() {
    let c = sphere(4000);
    let modes = [-1, 0, 1];
    let spectra = solve_modes(&c, &modes, 4000, 70).unwrap();
    let numeric = SpectrumSource::numeric(c, spectra);
    let closed = SpectrumSource::closed_form_sphere(8).unwrap();
    let family = CharacterFamily::fixed(modes);
    for h in [1.0 / 30.0, 1.0 / 45.0, 0.05] {
        let a = numeric.window(1.0, 1.0 / 6.0, h, &family).unwrap();
        let b = closed.window(1.0, 1.0 / 6.0, h, &family).unwrap();
        let key = |w: &SpectralWindow| w.entries.iter().map(|e| (e.m, e.l_label)).collect::<Vec<_>>();
        assert!(!a.is_empty());
        assert_eq!(key(&a), key(&b), "h = {h}");
    }
    // a window reaching past the solved pairs is refused
    assert!(numeric.window(1.0, 1.0 / 6.0, 0.01, &family).is_err());
}

#[test]
fn statistic_vanishes_for_constants_and_odd_symbols() {
    let src = SpectrumSource::closed_form_sphere(12).unwrap();
    let family = CharacterFamily::fixed([0]);
    let series = integrated_qe_statistic(&src, &TestFunction::One, 1.0, 1.0 / 6.0, &family, &[0.1, 0.02]).unwrap();
    assert!(series.iter().all(|p| p.statistic < 1e-20 && p.selection.density_ratio == 1.0));
    let series = integrated_qe_statistic(&src, &TestFunction::Cos, 1.0, 1.0 / 6.0, &family, &[0.1, 0.02]).unwrap();
    assert!(series.iter().all(|p| p.statistic < 1e-20));
    assert!(integrated_qe_statistic(&src, &TestFunction::One, 1.0, 1.0 / 6.0, &family, &[]).is_err());
}

#[test]
fn statistic_decays_for_a_non_symmetric_symbol() {
    let src = SpectrumSource::closed_form_sphere(12).unwrap();
    let family = CharacterFamily::growing(0.1);
    let series =
        integrated_qe_statistic(&src, &TestFunction::ThetaSquared, 1.0, 0.05, &family, &[0.1, 0.01, 0.002]).unwrap();
    assert!(series.windows(2).all(|w| w[1].statistic < w[0].statistic));
    assert!(series.iter().all(|p| p.admissible));
    assert!(series.last().unwrap().selection.density_ratio >= 0.9);
}

#[test]
fn weyl_reference_volume_on_an_ellipsoid() {
    let c = build_profile(&SurfaceSpec::ellipsoid(2.0, 800)).unwrap();
    let spectra = solve_modes(&c, &[0], 800, 100).unwrap();
    let src = SpectrumSource::numeric(c.clone(), spectra);
    let p = weyl_statistic(&src, 1.0, 0.15, &CharacterFamily::fixed([0]), 0.05).unwrap();
    assert!((p.reference_volume - c.length()).abs() < 1e-10);
    assert!(p.window_size > 0);
}

#[test]
fn zonal_decay_examples() {
    let r5 = zonal_report(5, 40, 0.5).unwrap();
    assert!(r5.fit.slope < 0.0 && r5.fit.r2 > 0.99);
    let r8 = zonal_report(5, 40, 0.8).unwrap();
    assert!(r8.decay_rate > r5.decay_rate);
    assert!(r5.masses.iter().all(|(_, m)| (0.0..=1.0).contains(m)));
}
