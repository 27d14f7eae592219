//! Geodesic flow on T*M, the rotation momentum map, and the reduced flow.
//!
//! Coordinates are `(θ, φ, p_θ, p_φ)` with Hamiltonian
//! `H = p_θ² + p_φ²/R(θ)²` (the squared cometric norm, no potential).
//! Rotations act by shifting φ; the momentum map is `p_φ`, and on its zero
//! level the flow descends to `(θ, p_θ)`, where it runs along the meridian
//! at constant speed and flips branch at each pole.

mod integrator;
mod reduced;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::ProfileCurve;

pub use integrator::{
    check_evolvred, integrate, integrate_with, IntegratorConfig, Order, TrajectoryReport, TrajectorySample,
};
pub use reduced::{
    birkhoff_average, reduced_flow, reduced_period, reduced_vector_field, space_average_reduced_shell,
    ReducedTrajectory, ShellAverage,
};

/// `|p_φ|` at or below this counts as the zero momentum level.
pub const ZERO_LEVEL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseState {
    pub theta: f64,
    pub phi: f64,
    pub p_theta: f64,
    pub p_phi: f64,
}

impl PhaseState {
    pub fn new(theta: f64, phi: f64, p_theta: f64, p_phi: f64) -> Self {
        Self { theta, phi, p_theta, p_phi }
    }

    /// Image under the rotation by `angle`.
    pub fn rotated(&self, angle: f64) -> Self {
        Self { phi: (self.phi + angle).rem_euclid(2.0 * PI), ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    /// `p_θ ≥ 0`: moving from the south pole towards the north pole.
    Up,
    Down,
}

impl Branch {
    pub fn of(p_theta: f64) -> Self {
        if p_theta >= 0.0 {
            Branch::Up
        } else {
            Branch::Down
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Branch::Up => "up",
            Branch::Down => "down",
        }
    }
}

/// Point of the reduced phase space over the zero momentum level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReducedState {
    pub theta: f64,
    pub p_theta: f64,
    pub branch: Branch,
}

impl ReducedState {
    pub fn new(theta: f64, p_theta: f64) -> Self {
        Self { theta, p_theta, branch: Branch::of(p_theta) }
    }
}

fn at_pole(curve: &ProfileCurve, theta: f64) -> bool {
    theta <= 0.0 || theta >= curve.length()
}

pub fn hamiltonian(curve: &ProfileCurve, s: &PhaseState) -> Result<f64> {
    let r = curve.radius(s.theta)?;
    if s.p_phi == 0.0 {
        return Ok(s.p_theta * s.p_theta);
    }
    if at_pole(curve, s.theta) || r == 0.0 {
        return Err(Error::invalid("p_phi", format!("must vanish at a pole, got {}", s.p_phi)));
    }
    Ok(s.p_theta * s.p_theta + s.p_phi * s.p_phi / (r * r))
}

/// Momentum map of the rotation action, `J(θ, φ, p_θ, p_φ) = p_φ`.
pub fn momentum_map(s: &PhaseState) -> f64 {
    s.p_phi
}

/// Projection of the zero momentum level to the reduced space.
pub fn reduce(s: &PhaseState) -> Result<ReducedState> {
    if s.p_phi.abs() > ZERO_LEVEL_TOL {
        return Err(Error::invalid("p_phi", format!("state is off the zero momentum level (p_φ = {})", s.p_phi)));
    }
    Ok(ReducedState::new(s.theta, s.p_theta))
}

/// Seeded phase-space samples with θ in the middle 60% of the meridian.
///
/// With `zero_level` the samples lie on `p_φ = 0`; otherwise `p_φ` is drawn
/// small enough to keep orbits away from the poles.
pub fn sample_states(curve: &ProfileCurve, count: usize, seed: u64, zero_level: bool) -> Vec<PhaseState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = curve.length();
    (0..count)
        .map(|_| {
            let theta = l * rng.gen_range(0.2..0.8);
            let phi = rng.gen_range(0.0..2.0 * PI);
            let p_theta = rng.gen_range(-1.0..1.0);
            let p_phi = if zero_level { 0.0 } else { rng.gen_range(0.2..0.6) };
            PhaseState { theta, phi, p_theta, p_phi }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_profile, SurfaceSpec};

    #[test]
    fn hamiltonian_values() {
        let c = build_profile(&SurfaceSpec::round_sphere(100)).unwrap();
        let h = |t, pt, pp| hamiltonian(&c, &PhaseState::new(t, 0.3, pt, pp)).unwrap();
        assert_eq!(h(PI / 2.0, 1.0, 0.0), 1.0);
        assert!((h(PI / 2.0, 0.0, 1.0) - 1.0).abs() < 1e-15);
        assert!((h(PI / 4.0, 0.0, 1.0) - 2.0).abs() < 1e-14);
        assert!(hamiltonian(&c, &PhaseState::new(0.0, 0.0, 1.0, 0.5)).is_err());
        assert_eq!(hamiltonian(&c, &PhaseState::new(0.0, 0.0, 1.5, 0.0)).unwrap(), 2.25);
    }

    #[test]
    fn momentum_and_reduction() {
        assert_eq!(momentum_map(&PhaseState::new(1.0, 2.0, 0.0, 2.0)), 2.0);
        let a = reduce(&PhaseState::new(1.0, 0.3, -0.5, 0.0)).unwrap();
        let b = reduce(&PhaseState::new(1.0, 4.1, -0.5, 0.0)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.branch, Branch::Down);
        assert!(reduce(&PhaseState::new(1.0, 0.0, 0.5, 0.1)).is_err());
    }

    #[test]
    fn samples_are_reproducible() {
        let c = build_profile(&SurfaceSpec::round_sphere(100)).unwrap();
        assert_eq!(sample_states(&c, 5, 7, true), sample_states(&c, 5, 7, true));
        assert_ne!(sample_states(&c, 5, 7, true), sample_states(&c, 5, 8, true));
        assert!(sample_states(&c, 20, 0, true).iter().all(|s| s.p_phi == 0.0));
    }
}
