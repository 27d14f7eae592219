//! Reversible symplectic integration of the geodesic flow.
//!
//! The base step is the implicit midpoint rule. Because `p_φ` is conserved
//! exactly by the scheme, each step reduces to one scalar Newton solve for
//! the midpoint colatitude. The default method composes three midpoint
//! steps with Yoshida's coefficients, which keeps the scheme symplectic and
//! symmetric while raising it to fourth order.

use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;

use super::{hamiltonian, PhaseState};
use crate::error::{Error, Result};
use crate::geometry::ProfileCurve;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Order {
    /// Plain implicit midpoint.
    Second,
    /// Triple-jump composition of implicit midpoint steps.
    Fourth,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub order: Order,
    pub newton_tol: f64,
    /// How many times a failing step may be halved before giving up.
    pub max_halvings: u32,
    /// Keep every `sample_every`-th step in the report (the final state is
    /// always kept).
    pub sample_every: usize,
}

impl IntegratorConfig {
    pub fn new(dt: f64) -> Self {
        Self { dt, order: Order::Fourth, newton_tol: 1e-13, max_halvings: 12, sample_every: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub state: PhaseState,
    pub energy: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryReport {
    pub samples: Vec<TrajectorySample>,
    /// `max |H(t) - H(0)| / |H(0)|` over all steps.
    pub energy_drift: f64,
    /// `max |p_φ(t) - p_φ(0)|` over all steps.
    pub p_phi_drift: f64,
    pub elapsed: f64,
    pub dt: f64,
    pub steps: usize,
}

impl TrajectoryReport {
    pub fn final_state(&self) -> PhaseState {
        self.samples.last().unwrap().state
    }

    /// Writes `t,theta,phi,p_theta,p_phi,H` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "theta", "phi", "p_theta", "p_phi", "H"])?;
        for s in &self.samples {
            w.write_record([
                s.t.to_string(),
                s.state.theta.to_string(),
                s.state.phi.to_string(),
                s.state.p_theta.to_string(),
                s.state.p_phi.to_string(),
                s.energy.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Reflects a meridian state through whichever pole it has crossed.
fn through_pole(curve: &ProfileCurve, mut s: PhaseState) -> PhaseState {
    let l = curve.length();
    for _ in 0..4 {
        if s.theta < 0.0 {
            s.theta = -s.theta;
        } else if s.theta > l {
            s.theta = 2.0 * l - s.theta;
        } else {
            break;
        }
        s.p_theta = -s.p_theta;
        s.phi = (s.phi + PI).rem_euclid(2.0 * PI);
    }
    s
}

/// `(g, g')` for the meridional force `g = p_φ² R'/R³`.
fn force(curve: &ProfileCurve, p_phi: f64, theta: f64) -> Result<(f64, f64, f64)> {
    let jet = curve.jet(theta)?;
    if !(jet.r > 0.0) {
        return Err(Error::Integrator(format!("orbit reached the pole at θ = {theta} with p_φ ≠ 0")));
    }
    let p2 = p_phi * p_phi;
    let r3 = jet.r * jet.r * jet.r;
    let g = p2 * jet.dr / r3;
    let dg = p2 * (jet.ddr / r3 - 3.0 * jet.dr * jet.dr / (r3 * jet.r));
    Ok((g, dg, jet.r))
}

fn midpoint_step(curve: &ProfileCurve, s: &PhaseState, tau: f64, tol: f64) -> Result<PhaseState> {
    if s.p_phi == 0.0 {
        let moved = PhaseState { theta: s.theta + 2.0 * tau * s.p_theta, ..*s };
        return Ok(through_pole(curve, moved));
    }
    let l = curve.length();
    let mut x = s.theta + tau * s.p_theta;
    let mut converged = false;
    for _ in 0..50 {
        if !(x > 0.0 && x < l) {
            return Err(Error::Integrator(format!("midpoint left (0, L) at θ = {x}")));
        }
        let (g, dg, _) = force(curve, s.p_phi, x)?;
        let residual = x - s.theta - tau * s.p_theta - tau * tau * g;
        let delta = residual / (1.0 - tau * tau * dg);
        x -= delta;
        if delta.abs() <= tol * (1.0 + x.abs()) {
            converged = true;
            break;
        }
    }
    if !converged || !(x > 0.0 && x < l) {
        return Err(Error::Integrator(format!("Newton solve for the midpoint did not converge near θ = {x}")));
    }
    let (g, _, r) = force(curve, s.p_phi, x)?;
    Ok(PhaseState {
        theta: 2.0 * x - s.theta,
        phi: (s.phi + tau * 2.0 * s.p_phi / (r * r)).rem_euclid(2.0 * PI),
        p_theta: s.p_theta + 2.0 * tau * g,
        p_phi: s.p_phi,
    })
}

fn method_step(curve: &ProfileCurve, s: &PhaseState, tau: f64, cfg: &IntegratorConfig) -> Result<PhaseState> {
    match cfg.order {
        Order::Second => midpoint_step(curve, s, tau, cfg.newton_tol),
        Order::Fourth => {
            let cbrt2 = 2f64.cbrt();
            let outer = 1.0 / (2.0 - cbrt2);
            let inner = 1.0 - 2.0 * outer;
            let a = midpoint_step(curve, s, outer * tau, cfg.newton_tol)?;
            let b = midpoint_step(curve, &a, inner * tau, cfg.newton_tol)?;
            midpoint_step(curve, &b, outer * tau, cfg.newton_tol)
        }
    }
}

fn adaptive_step(
    curve: &ProfileCurve,
    s: &PhaseState,
    tau: f64,
    cfg: &IntegratorConfig,
    depth: u32,
) -> Result<PhaseState> {
    match method_step(curve, s, tau, cfg) {
        Ok(next) => Ok(next),
        Err(e) if depth >= cfg.max_halvings => {
            Err(Error::Integrator(format!("step failed after {depth} halvings (step {tau:e}): {e}")))
        }
        Err(_) => {
            let half = adaptive_step(curve, s, 0.5 * tau, cfg, depth + 1)?;
            adaptive_step(curve, &half, 0.5 * tau, cfg, depth + 1)
        }
    }
}

/// Integrates from `s0` over `[0, t_end]` with the default configuration.
///
/// Negative `t_end` runs the flow backwards.
pub fn integrate(curve: &ProfileCurve, s0: &PhaseState, t_end: f64, dt: f64) -> Result<TrajectoryReport> {
    integrate_with(curve, s0, t_end, &IntegratorConfig::new(dt))
}

pub fn integrate_with(
    curve: &ProfileCurve,
    s0: &PhaseState,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<TrajectoryReport> {
    if !(cfg.dt > 0.0) {
        return Err(Error::invalid("dt", format!("must be > 0, got {}", cfg.dt)));
    }
    if cfg.sample_every == 0 {
        return Err(Error::invalid("sample_every", "must be ≥ 1"));
    }
    let h0 = hamiltonian(curve, s0)?;
    let steps = (t_end.abs() / cfg.dt).round().max(if t_end == 0.0 { 0.0 } else { 1.0 }) as usize;
    let tau = if steps == 0 { 0.0 } else { t_end / steps as f64 };
    let mut state = *s0;
    let mut samples = vec![TrajectorySample { t: 0.0, state, energy: h0 }];
    let (mut energy_drift, mut p_phi_drift) = (0.0f64, 0.0f64);
    let scale = if h0 != 0.0 { h0.abs() } else { 1.0 };
    for k in 1..=steps {
        state = adaptive_step(curve, &state, tau, cfg, 0)?;
        let energy = hamiltonian(curve, &state)?;
        energy_drift = energy_drift.max((energy - h0).abs() / scale);
        p_phi_drift = p_phi_drift.max((state.p_phi - s0.p_phi).abs());
        if k % cfg.sample_every == 0 || k == steps {
            samples.push(TrajectorySample { t: k as f64 * tau, state, energy });
        }
    }
    Ok(TrajectoryReport { samples, energy_drift, p_phi_drift, elapsed: t_end, dt: tau.abs(), steps })
}

/// Rotation average `⟨a⟩_G(s) = (1/2π)∫ a(g·s) dg` by the periodic
/// trapezoid rule on `angles` equally spaced rotations.
fn rotation_average(a: &dyn Fn(&PhaseState) -> f64, s: &PhaseState, angles: usize) -> f64 {
    (0..angles).map(|j| a(&s.rotated(2.0 * PI * j as f64 / angles as f64))).sum::<f64>() / angles as f64
}

/// Largest `|⟨a∘φ_t⟩_G − ⟨a⟩_G∘φ_t|` over the samples.
///
/// The left side integrates the flow separately from every rotated copy of
/// the sample; the right side integrates once and averages afterwards.
pub fn check_evolvred(
    curve: &ProfileCurve,
    a: &dyn Fn(&PhaseState) -> f64,
    t: f64,
    samples: &[PhaseState],
    cfg: &IntegratorConfig,
    angles: usize,
) -> Result<f64> {
    if angles == 0 {
        return Err(Error::invalid("angles", "must be ≥ 1"));
    }
    let mut worst = 0.0f64;
    for s in samples {
        let evolved_then_averaged = (0..angles)
            .map(|j| {
                let g = s.rotated(2.0 * PI * j as f64 / angles as f64);
                Ok(a(&integrate_with(curve, &g, t, cfg)?.final_state()))
            })
            .sum::<Result<f64>>()?
            / angles as f64;
        let end = integrate_with(curve, s, t, cfg)?.final_state();
        let averaged_then_evolved = rotation_average(a, &end, angles);
        worst = worst.max((evolved_then_averaged - averaged_then_evolved).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_profile, SurfaceSpec};

    fn sphere() -> ProfileCurve {
        build_profile(&SurfaceSpec::round_sphere(100)).unwrap()
    }

    #[test]
    fn equator_is_invariant() {
        let s0 = PhaseState::new(PI / 2.0, 0.0, 0.0, 1.0);
        let rep = integrate(&sphere(), &s0, 10.0, 1e-2).unwrap();
        for s in &rep.samples {
            assert!((s.state.theta - PI / 2.0).abs() < 1e-10);
        }
        // φ advances at rate 2p_φ/R² = 2
        let phi = rep.final_state().phi;
        assert!(((phi - 20.0f64.rem_euclid(2.0 * PI)).abs()) < 1e-9);
    }

    #[test]
    fn meridian_crosses_the_pole() {
        let s0 = PhaseState::new(0.1, 1.0, -1.0, 0.0);
        let rep = integrate(&sphere(), &s0, 0.1, 1e-3).unwrap();
        let end = rep.final_state();
        // travels 0.2 in θ: through the south pole and out to θ = 0.1
        assert!((end.theta - 0.1).abs() < 1e-12);
        assert!((end.p_theta - 1.0).abs() < 1e-15);
        assert!((end.phi - (1.0 + PI)).abs() < 1e-12);
    }

    #[test]
    fn second_order_scheme_has_bounded_energy_error() {
        let s0 = PhaseState::new(1.0, 0.0, 0.4, 0.7);
        let mut cfg = IntegratorConfig::new(1e-2);
        cfg.order = Order::Second;
        let coarse = integrate_with(&sphere(), &s0, 20.0, &cfg).unwrap().energy_drift;
        cfg.dt = 5e-3;
        let fine = integrate_with(&sphere(), &s0, 20.0, &cfg).unwrap().energy_drift;
        let ratio = coarse / fine;
        assert!(ratio > 3.5 && ratio < 4.5, "{ratio}");
        cfg.order = Order::Fourth;
        cfg.dt = 1e-2;
        let c4 = integrate_with(&sphere(), &s0, 20.0, &cfg).unwrap().energy_drift;
        cfg.dt = 5e-3;
        let f4 = integrate_with(&sphere(), &s0, 20.0, &cfg).unwrap().energy_drift;
        assert!(c4 / f4 > 12.0, "{}", c4 / f4);
    }

    #[test]
    fn rejects_bad_input() {
        let s0 = PhaseState::new(1.0, 0.0, 0.4, 0.7);
        assert!(integrate(&sphere(), &s0, 1.0, 0.0).is_err());
        assert!(integrate(&sphere(), &PhaseState::new(0.0, 0.0, 0.4, 0.7), 1.0, 1e-3).is_err());
    }

    #[test]
    fn halving_gives_up_eventually() {
        // tiny p_φ with a huge step: the first midpoint guess lands past the pole
        let s0 = PhaseState::new(0.05, 0.0, -1.0, 1e-3);
        let mut cfg = IntegratorConfig::new(0.5);
        cfg.max_halvings = 0;
        assert!(matches!(integrate_with(&sphere(), &s0, 0.5, &cfg), Err(Error::Integrator(_))));
    }
}
