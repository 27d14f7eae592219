//! The acceptance suite: each check runs a pinned experiment and reports
//! pass/fail with the measured quantities.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::dynamics::{
    birkhoff_average, check_evolvred, integrate, reduced_period, sample_states, space_average_reduced_shell,
    IntegratorConfig, PhaseState, ReducedState,
};
use crate::error::Result;
use crate::geometry::{build_profile, ProfileCurve, SurfaceSpec};
use crate::semiclassics::{
    limit_target, matrix_element, partition, qe_stat_point, quantum_limit, weyl_statistic, zonal_report,
    CharacterFamily, SpectrumSource, TestFunction,
};
use crate::specfun::asymptotic_residual_scan;
use crate::spectral::{
    assemble_mode, closed_form_sphere, closed_form_sphere_range, solve_mode, solve_modes, EigenPair,
};

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub metrics: Value,
}

impl CheckResult {
    /// `criterion NN  PASS  name — detail`
    pub fn line(&self) -> String {
        format!(
            "criterion {:02}  {}  {} — {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail
        )
    }
}

#[derive(Debug, Clone, Copy, Serialize, Default)]
pub struct VerifyOptions {
    /// Seed for sampled phase-space states and random test data.
    pub seed: u64,
}

type Check = fn(&VerifyOptions) -> Result<(bool, String, Value)>;

const CHECKS: [(u8, &str, Check); 11] = [
    (1, "partition golden test", partition_golden),
    (2, "spectrum oracle", spectrum_oracle),
    (3, "quantum-limit convergence", quantum_limit_convergence),
    (4, "Legendre asymptotics", legendre_asymptotics),
    (5, "zonal concentration", zonal_concentration),
    (6, "dynamics conservation", dynamics_conservation),
    (7, "ergodic equality", ergodic_equality),
    (8, "Weyl counting trend", weyl_trend),
    (9, "integrated-QE trend", integrated_qe_trend),
    (10, "averaging commutes with evolution", commutation),
    (11, "property suites", property_suites),
];

pub fn check_ids() -> impl Iterator<Item = (u8, &'static str)> {
    CHECKS.iter().map(|(id, name, _)| (*id, *name))
}

/// Runs one check; numerical errors count as failures.
pub fn run_check(id: u8, opts: &VerifyOptions) -> Option<CheckResult> {
    let (id, name, check) = CHECKS.iter().find(|(i, _, _)| *i == id)?;
    Some(match check(opts) {
        Ok((passed, detail, metrics)) => CheckResult { id: *id, name, passed, detail, metrics },
        Err(e) => CheckResult { id: *id, name, passed: false, detail: format!("error: {e}"), metrics: Value::Null },
    })
}

/// All checks, run concurrently and reported in order.
pub fn run_all(opts: &VerifyOptions) -> Vec<CheckResult> {
    CHECKS.par_iter().map(|(id, _, _)| run_check(*id, opts).unwrap()).collect()
}

fn sphere(n: usize) -> Result<ProfileCurve> {
    build_profile(&SurfaceSpec::round_sphere(n))
}

fn ellipsoid(n: usize) -> Result<ProfileCurve> {
    build_profile(&SurfaceSpec::ellipsoid(2.0, n))
}

fn jj1(n: usize) -> Vec<f64> {
    (1..=n).map(|j| (j * (j + 1)) as f64).collect()
}

fn partition_golden(_: &VerifyOptions) -> Result<(bool, String, Value)> {
    let part = partition(&jj1(60), 1.0 / 6.0)?;
    let jk = &part.jk[..7];
    let p = &part.p[..10];
    let passed = jk == [1, 2, 3, 5, 7, 10, 14] && p == [1, 2, 3, 3, 5, 5, 7, 7, 7, 10];
    Ok((passed, format!("j_k = {jk:?}, P = {p:?}"), json!({ "jk": jk, "p": p })))
}

fn weighted_distance(a: &EigenPair, b: &EigenPair) -> f64 {
    a.weights().iter().zip(a.f().iter().zip(b.f())).map(|(w, (x, y))| w * (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn spectrum_oracle(_: &VerifyOptions) -> Result<(bool, String, Value)> {
    const N: usize = 4000;
    let curve = sphere(N)?;
    let modes = [0i64, 1, 2, 5];
    let spectra = solve_modes(&curve, &modes, N, 20)?;
    let (mut eig, mut vec) = (0.0f64, 0.0f64);
    for s in &spectra {
        for p in &s.pairs {
            let l = s.m.abs() + p.k as i64;
            let exact = (l * (l + 1)) as f64;
            let err = if exact == 0.0 { p.energy.abs() } else { (p.energy / exact - 1.0).abs() };
            eig = eig.max(err);
            vec = vec.max(weighted_distance(p, &closed_form_sphere(l, s.m, &curve)?));
        }
    }
    let mut ratio = f64::INFINITY;
    for &m in &modes {
        let err = |n: usize| -> Result<f64> {
            let s = solve_mode(&assemble_mode(&sphere(n)?, m, n)?, 8)?;
            let l = m + 7;
            Ok((s.pairs[7].energy - (l * (l + 1)) as f64).abs())
        };
        ratio = ratio.min(err(500)? / err(1000)?);
    }
    let passed = eig < 1e-4 && vec < 1e-3 && ratio >= 3.5;
    Ok((
        passed,
        format!("max rel. eigenvalue error {eig:.2e} (< 1e-4), max L² distance {vec:.2e} (< 1e-3), min doubling ratio {ratio:.2} (≥ 3.5)"),
        json!({ "eigenvalue_error": eig, "eigenfunction_distance": vec, "doubling_ratio": ratio }),
    ))
}

fn quantum_limit_convergence(_: &VerifyOptions) -> Result<(bool, String, Value)> {
    let curve = sphere(4000)?;
    let mut passed = true;
    let mut parts = Vec::new();
    let mut metrics = serde_json::Map::new();
    for m in [0i64, 1, 2] {
        let pairs = closed_form_sphere_range(m, 20, 200, &curve)?;
        let report = quantum_limit(&curve, &pairs, &TestFunction::Theta)?;
        let d20 = report.entries.first().unwrap().deviation;
        let d200 = report.entries.last().unwrap().deviation;
        let slope = report.fit_over(20.0, 200.0).ok().map(|f| f.slope);
        let ok = d200 <= 0.02 && d200 <= d20 && slope.is_some_and(|s| s <= -0.5);
        passed &= ok;
        let slope_text = slope.map_or_else(|| "undefined (zero deviations)".to_string(), |s| format!("{s:.2}"));
        parts.push(format!("m={m}: dev(20)={d20:.1e} dev(200)={d200:.1e} slope {slope_text}"));
        // θ is symmetric about the equator, so its deviations sit at roundoff;
        // θ² has a genuine deviation and shows the actual decay rate
        let control = quantum_limit(&curve, &pairs, &TestFunction::ThetaSquared)?;
        let control_fit = control.fit_over(20.0, 200.0)?;
        metrics.insert(
            format!("m{m}"),
            json!({ "dev20": d20, "dev200": d200, "slope": slope, "theta2_slope": control_fit.slope, "theta2_r2": control_fit.r2 }),
        );
    }
    let parity = (0..=200)
        .map(|l| matrix_element(&closed_form_sphere(l, 0, &curve)?, &|t| t.cos()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0f64, |a, v| a.max(v.abs()));
    passed &= parity < 1e-10;
    parts.push(format!("cos parity max {parity:.1e}"));
    metrics.insert("cos_parity".into(), json!(parity));
    Ok((passed, parts.join("; "), Value::Object(metrics)))
}

fn legendre_asymptotics(_: &VerifyOptions) -> Result<(bool, String, Value)> {
    let mut passed = true;
    let mut parts = Vec::new();
    let mut slopes = Vec::new();
    for m in [0i64, 2] {
        let r = asymptotic_residual_scan(20, 200, m, 0.3)?;
        passed &= (-1.8..=-1.2).contains(&r.fitted_slope);
        parts.push(format!("m={m}: slope {:.3} (R² {:.4})", r.fitted_slope, r.fit_r2));
        slopes.push(json!({ "m": m, "slope": r.fitted_slope, "r2": r.fit_r2 }));
    }
    Ok((passed, parts.join("; "), json!(slopes)))
}

fn zonal_concentration(_: &VerifyOptions) -> Result<(bool, String, Value)> {
    let r5 = zonal_report(5, 40, 0.5)?;
    let r8 = zonal_report(5, 40, 0.8)?;
    let passed = r5.fit.slope < 0.0 && r5.fit.r2 > 0.99;
    Ok((
        passed,
        format!(
            "slope {:.4}, R² {:.5}; c(0.5) = {:.3}, c(0.8) = {:.3}",
            r5.fit.slope, r5.fit.r2, r5.decay_rate, r8.decay_rate
        ),
        json!({ "slope": r5.fit.slope, "r2": r5.fit.r2, "c_05": r5.decay_rate, "c_08": r8.decay_rate }),
    ))
}

fn dynamics_conservation(opts: &VerifyOptions) -> Result<(bool, String, Value)> {
    let (mut energy, mut momentum, mut reversal, mut equator) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for curve in [sphere(400)?, ellipsoid(400)?] {
        for s0 in sample_states(&curve, 5, opts.seed, false) {
            let rep = integrate(&curve, &s0, 1.0, 1e-3)?;
            energy = energy.max(rep.energy_drift);
            momentum = momentum.max(rep.p_phi_drift);
            let back = integrate(&curve, &rep.final_state(), -1.0, 1e-3)?.final_state();
            let dphi = (back.phi - s0.phi + PI).rem_euclid(2.0 * PI) - PI;
            reversal =
                reversal.max((back.theta - s0.theta).abs()).max((back.p_theta - s0.p_theta).abs()).max(dphi.abs());
        }
        let mid = curve.length() / 2.0;
        let rep = integrate(&curve, &PhaseState::new(mid, 0.0, 0.0, 1.0), 10.0, 1e-2)?;
        equator = rep.samples.iter().fold(equator, |a, s| a.max((s.state.theta - mid).abs()));
    }
    let passed = energy < 1e-8 && momentum < 1e-12 && reversal < 1e-8 && equator < 1e-10;
    Ok((
        passed,
        format!("energy {energy:.1e}, p_φ {momentum:.1e}, reversal {reversal:.1e}, equator {equator:.1e}"),
        json!({ "energy_drift": energy, "p_phi_drift": momentum, "reversal": reversal, "equator": equator }),
    ))
}

fn ergodic_equality(_: &VerifyOptions) -> Result<(bool, String, Value)> {
    let fs: [(&str, fn(f64) -> f64); 4] = [("1", |_| 1.0), ("θ", |t| t), ("cos θ", f64::cos), ("θ²", |t| t * t)];
    let (mut time_space, mut space_quantum) = (0.0f64, 0.0f64);
    for curve in [sphere(400)?, ellipsoid(400)?] {
        let r0 = ReducedState::new(0.37 * curve.length(), 1.0);
        let period = reduced_period(&curve, 1.0)?;
        for (_, f) in fs {
            let g = move |t: f64, _: f64| f(t);
            let time = birkhoff_average(&curve, &g, &r0, period)?;
            let space = space_average_reduced_shell(&curve, &g, 1.0)?.mean;
            let quantum = limit_target(&curve, &f);
            time_space = time_space.max((time - space).abs());
            space_quantum = space_quantum.max((space - quantum).abs());
        }
    }
    let passed = time_space < 1e-8 && space_quantum < 1e-8;
    Ok((
        passed,
        format!("|Birkhoff − shell| {time_space:.1e}, |shell − quantum limit| {space_quantum:.1e}"),
        json!({ "birkhoff_vs_shell": time_space, "shell_vs_limit": space_quantum }),
    ))
}

fn weyl_trend(_: &VerifyOptions) -> Result<(bool, String, Value)> {
    let src = SpectrumSource::closed_form_sphere(8)?;
    let family = CharacterFamily::fixed([0]);
    let coarse = weyl_statistic(&src, 1.0, 1.0 / 6.0, &family, 1e-1)?;
    let fine = weyl_statistic(&src, 1.0, 1.0 / 6.0, &family, 1e-3)?;
    let passed = (0.85..=1.15).contains(&fine.ratio)
        && (fine.ratio - 1.0).abs() < (coarse.ratio - 1.0).abs()
        && (fine.reference_volume - PI).abs() < 1e-8;
    Ok((
        passed,
        format!(
            "ratio {:.4} at h=1e-1 (#J={}), {:.4} at h=1e-3 (#J={}); volume − π = {:.1e}",
            coarse.ratio,
            coarse.window_size,
            fine.ratio,
            fine.window_size,
            fine.reference_volume - PI
        ),
        json!({ "coarse": coarse, "fine": fine }),
    ))
}

/// Upper bound for a statistic that vanishes in exact arithmetic.
const ROUNDOFF_ZERO: f64 = 1e-20;

fn integrated_qe_trend(_: &VerifyOptions) -> Result<(bool, String, Value)> {
    let src = SpectrumSource::closed_form_sphere(20)?;
    let family = CharacterFamily::fixed([0]);
    let beta = 1.0 / 6.0;
    let (coarse, _) = qe_stat_point(&src, &TestFunction::Theta, 1.0, beta, &family, 1e-1)?;
    let (fine, _) = qe_stat_point(&src, &TestFunction::Theta, 1.0, beta, &family, 1e-3)?;
    let constant = [1e-1, 1e-2, 1e-3]
        .iter()
        .map(|&h| Ok(qe_stat_point(&src, &TestFunction::One, 1.0, beta, &family, h)?.0.statistic))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0f64, |a, s| a.max(s.abs()));
    let (control_coarse, _) = qe_stat_point(&src, &TestFunction::ThetaSquared, 1.0, beta, &family, 1e-1)?;
    let (control_fine, _) = qe_stat_point(&src, &TestFunction::ThetaSquared, 1.0, beta, &family, 1e-3)?;
    let passed = fine.statistic < coarse.statistic && constant < ROUNDOFF_ZERO && fine.selection.density_ratio >= 0.9;
    Ok((
        passed,
        format!(
            "S_θ(1e-3) = {:.2e} vs S_θ(1e-1) = {:.2e}; max S_1 = {constant:.1e}; #Λ/#J = {:.3}; control S_θ²: {:.2e} → {:.2e}",
            fine.statistic, coarse.statistic, fine.selection.density_ratio, control_coarse.statistic, control_fine.statistic
        ),
        json!({
            "theta": { "coarse": coarse.statistic, "fine": fine.statistic },
            "constant_max": constant,
            "density_ratio": fine.selection.density_ratio,
            "theta2": { "coarse": control_coarse.statistic, "fine": control_fine.statistic },
        }),
    ))
}

fn commutation(opts: &VerifyOptions) -> Result<(bool, String, Value)> {
    let curve = ellipsoid(400)?;
    let samples = sample_states(&curve, 20, opts.seed, false);
    let a = |s: &PhaseState| s.phi.cos() * (1.0 + s.theta * s.theta);
    let worst = check_evolvred(&curve, &a, 0.7, &samples, &IntegratorConfig::new(1e-3), 16)?;
    Ok((worst < 1e-6, format!("max discrepancy {worst:.1e} (< 1e-6)"), json!({ "max_discrepancy": worst })))
}

fn property_suites(opts: &VerifyOptions) -> Result<(bool, String, Value)> {
    const N: usize = 2000;
    let (mut gram, mut oscillation_failures, mut parity) = (0.0f64, 0usize, 0.0f64);
    for curve in [sphere(N)?, ellipsoid(N)?] {
        let half = curve.length() / 2.0;
        let odd = move |t: f64| (t - half).powi(3) + (t - half);
        for s in solve_modes(&curve, &[0, 1, 2, 5], N, 25)? {
            gram = gram.max(s.gram_deviation());
            for p in &s.pairs {
                oscillation_failures += usize::from(p.sign_changes() != p.k);
                parity = parity.max(matrix_element(p, &odd)?.abs());
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut bracket = partition(&jj1(500), 1.0 / 6.0)?.bracket_holds(&jj1(500));
    for _ in 0..50 {
        let mut acc = rng.gen_range(0.1..5.0);
        let a: Vec<f64> = (0..300)
            .map(|_| {
                acc += rng.gen_range(0.0..2.0);
                acc
            })
            .collect();
        bracket &= partition(&a, rng.gen_range(0.05..2.0))?.bracket_holds(&a);
    }
    let passed = gram < 1e-8 && oscillation_failures == 0 && parity < 1e-10 && bracket;
    Ok((
        passed,
        format!(
            "Gram deviation {gram:.1e}, oscillation mismatches {oscillation_failures}, odd-symbol max {parity:.1e}, partition bracket {}",
            if bracket { "holds" } else { "violated" }
        ),
        json!({ "gram": gram, "oscillation_failures": oscillation_failures, "parity": parity, "bracket": bracket }),
    ))
}
