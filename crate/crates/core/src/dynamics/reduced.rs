//! The reduced flow on the shell `Σ̃_c = {p_θ² = c}` over the zero level.
//!
//! On the zero level the geodesic runs along a meridian at speed `2√c`,
//! bounces through the poles and comes back on the other branch. Unfolding
//! the two branches into one circle `u ∈ [0, 2L)` (with `θ = u` on the way
//! up and `θ = 2L − u` on the way down) makes the motion a rotation, so
//! everything here is computed in closed form.

use std::io::Write;

use serde::Serialize;

use super::{Branch, ReducedState};
use crate::error::{Error, Result};
use crate::geometry::ProfileCurve;
use crate::quad;

const QUAD_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Serialize)]
pub struct ReducedTrajectory {
    pub c: f64,
    pub samples: Vec<(f64, ReducedState)>,
    /// Times in `(0, T]` at which the orbit passed through a pole.
    pub pole_hits: Vec<f64>,
    /// Return time of the orbit, measured from its pole passages.
    pub period: f64,
}

impl ReducedTrajectory {
    /// Both branches appear among the samples.
    pub fn visits_both_branches(&self) -> bool {
        let up = self.samples.iter().any(|(_, s)| s.branch == Branch::Up);
        let down = self.samples.iter().any(|(_, s)| s.branch == Branch::Down);
        up && down
    }

    /// Writes `t,theta,p_theta,branch` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "theta", "p_theta", "branch"])?;
        for (t, s) in &self.samples {
            w.write_record([t.to_string(), s.theta.to_string(), s.p_theta.to_string(), s.branch.label().into()])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShellAverage {
    /// Normalized average over the shell.
    pub mean: f64,
    /// Total shell volume `L/√c`.
    pub volume: f64,
}

fn shell_level(r0: &ReducedState) -> Result<f64> {
    let c = r0.p_theta * r0.p_theta;
    if !(c > 0.0) {
        return Err(Error::invalid("c", format!("shell level must be > 0, got {c}")));
    }
    Ok(c)
}

fn check_level(c: f64) -> Result<()> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::invalid("c", format!("shell level must be > 0, got {c}")));
    }
    Ok(())
}

/// Position on the unfolded circle.
fn unfold(l: f64, r: &ReducedState) -> f64 {
    match Branch::of(r.p_theta) {
        Branch::Up => r.theta,
        Branch::Down => 2.0 * l - r.theta,
    }
}

fn fold(l: f64, sqrt_c: f64, u: f64) -> ReducedState {
    let u = u.rem_euclid(2.0 * l);
    if u < l {
        ReducedState::new(u, sqrt_c)
    } else {
        ReducedState::new(2.0 * l - u, -sqrt_c)
    }
}

/// Closed-orbit period `2L/(2√c) = L/√c`.
pub fn reduced_period(curve: &ProfileCurve, c: f64) -> Result<f64> {
    check_level(c)?;
    Ok(curve.length() / c.sqrt())
}

/// Hamiltonian vector field `(θ', p_θ') = (2p_θ, 0)` of `p_θ²`.
pub fn reduced_vector_field(r: &ReducedState) -> (f64, f64) {
    (2.0 * r.p_theta, 0.0)
}

/// Evolves `r0` over `[0, t_end]`, keeping `samples + 1` equally spaced states.
pub fn reduced_flow(curve: &ProfileCurve, r0: &ReducedState, t_end: f64, samples: usize) -> Result<ReducedTrajectory> {
    let c = shell_level(r0)?;
    if !(t_end > 0.0) {
        return Err(Error::invalid("T", format!("must be > 0, got {t_end}")));
    }
    if samples == 0 {
        return Err(Error::invalid("samples", "must be ≥ 1"));
    }
    let l = curve.length();
    let sqrt_c = c.sqrt();
    let speed = 2.0 * sqrt_c;
    let u0 = unfold(l, r0);

    // next pole ahead on the unfolded circle
    let first = (l - u0.rem_euclid(l)) / speed;
    let crossing = l / speed;
    let mut pole_hits = Vec::new();
    let mut t = first;
    while t <= t_end {
        pole_hits.push(t);
        t += crossing;
    }

    // return time: remaining stretch to the first pole, full traverses in
    // between, and the stretch from the last pole back to the start
    let period = first + crossing + (crossing - first);

    let samples = (0..=samples)
        .map(|k| {
            let t = t_end * k as f64 / samples as f64;
            (t, fold(l, sqrt_c, u0 + speed * t))
        })
        .collect();
    Ok(ReducedTrajectory { c, samples, pole_hits, period })
}

/// `∫ f` over the unfolded arc `[u_a, u_b]` (no wrap), with respect to `du`.
fn unfolded_integral(f: &dyn Fn(f64, f64) -> f64, l: f64, sqrt_c: f64, u_a: f64, u_b: f64) -> Result<f64> {
    let mut total = 0.0;
    let mut lo = u_a;
    while lo < u_b {
        let seam = ((lo / l).floor() + 1.0) * l;
        let hi = seam.min(u_b);
        let up = (lo / l).floor() as i64 % 2 == 0;
        let base = (lo / (2.0 * l)).floor() * 2.0 * l;
        total += if up {
            quad::adaptive(|u| f(u - base, sqrt_c), lo, hi, QUAD_TOL)?
        } else {
            quad::adaptive(|u| f(2.0 * l - (u - base), -sqrt_c), lo, hi, QUAD_TOL)?
        };
        lo = hi;
    }
    Ok(total)
}

/// Time average `(1/T)∫₀^T f(φ̃_t(r0)) dt` of `f(θ, p_θ)`.
///
/// The integral is split at the pole passages and each smooth piece is
/// integrated adaptively; whole periods are integrated once and scaled.
pub fn birkhoff_average(
    curve: &ProfileCurve,
    f: &dyn Fn(f64, f64) -> f64,
    r0: &ReducedState,
    t_end: f64,
) -> Result<f64> {
    let c = shell_level(r0)?;
    if !(t_end > 0.0) {
        return Err(Error::invalid("T", format!("must be > 0, got {t_end}")));
    }
    let l = curve.length();
    let sqrt_c = c.sqrt();
    let speed = 2.0 * sqrt_c;
    let period = l / sqrt_c;
    let u0 = unfold(l, r0);

    let whole = (t_end / period).floor();
    let rest = t_end - whole * period;
    let mut integral = 0.0;
    if whole > 0.0 {
        integral += whole * unfolded_integral(f, l, sqrt_c, u0, u0 + 2.0 * l)?;
    }
    if rest > 0.0 {
        integral += unfolded_integral(f, l, sqrt_c, u0, u0 + speed * rest)?;
    }
    Ok(integral / speed / t_end)
}

/// Average of `f(θ, p_θ)` over `Σ̃_c` with branch density `dθ/(2√c)`.
pub fn space_average_reduced_shell(curve: &ProfileCurve, f: &dyn Fn(f64, f64) -> f64, c: f64) -> Result<ShellAverage> {
    check_level(c)?;
    let l = curve.length();
    let sqrt_c = c.sqrt();
    let density = 1.0 / (2.0 * sqrt_c);
    let up = quad::adaptive(|t| f(t, sqrt_c), 0.0, l, QUAD_TOL)?;
    let down = quad::adaptive(|t| f(t, -sqrt_c), 0.0, l, QUAD_TOL)?;
    let volume = 2.0 * l * density;
    Ok(ShellAverage { mean: (up + down) * density / volume, volume })
}
