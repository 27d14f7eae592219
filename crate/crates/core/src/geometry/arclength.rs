//! Arc-length reparametrization of planar profile curves.

use super::table::{CurveJet, PlanarCurve};
use crate::error::{Error, Result};
use crate::quad::{self, GaussRule};

/// Per-interval tolerance for the cumulative arc-length quadrature.
const STEP_TOL: f64 = 1e-12;
/// Speeds below this (relative to the mean speed) cannot be reparametrized.
const MIN_RELATIVE_SPEED: f64 = 1e-9;

/// Maps arc length back to the curve parameter.
#[derive(Debug)]
pub(crate) struct ArcLengthMap {
    curve: Box<dyn PlanarCurve>,
    knots_t: Vec<f64>,
    knots_s: Vec<f64>,
    rule: GaussRule,
}

/// Profile radius with its first two arc-length derivatives, and the height
/// with its first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub r: f64,
    pub dr: f64,
    pub ddr: f64,
    pub z: f64,
    pub dz: f64,
}

impl ArcLengthMap {
    pub fn new(curve: Box<dyn PlanarCurve>) -> Result<Self> {
        let knots_t = curve.knots();
        let rule = GaussRule::new(10);
        let mut knots_s = Vec::with_capacity(knots_t.len());
        knots_s.push(0.0);
        let speed = |t: f64| curve.jet(t).speed();
        let mut total = 0.0;
        for w in knots_t.windows(2) {
            total += quad::adaptive(speed, w[0], w[1], STEP_TOL)?;
            knots_s.push(total);
        }
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::NotEmbeddable("curve has zero length".into()));
        }
        let mean_speed = total / (knots_t[knots_t.len() - 1] - knots_t[0]);
        for w in knots_t.windows(2) {
            for k in 0..=4 {
                let t = w[0] + (w[1] - w[0]) * k as f64 / 4.0;
                let v = speed(t);
                if v < MIN_RELATIVE_SPEED * mean_speed {
                    return Err(Error::NotEmbeddable(format!(
                        "speed R'² + z'² vanishes near t = {t}; cannot reparametrize by arc length"
                    )));
                }
            }
        }
        Ok(Self { curve, knots_t, knots_s, rule })
    }

    pub fn length(&self) -> f64 {
        *self.knots_s.last().unwrap()
    }

    /// Curve parameter at arc length `s`.
    pub fn parameter_at(&self, s: f64) -> f64 {
        let n = self.knots_s.len();
        let s = s.clamp(0.0, self.length());
        let i = match self.knots_s.binary_search_by(|p| p.total_cmp(&s)) {
            Ok(i) => return self.knots_t[i],
            Err(i) => i.saturating_sub(1).min(n - 2),
        };
        let (t0, t1) = (self.knots_t[i], self.knots_t[i + 1]);
        let (s0, s1) = (self.knots_s[i], self.knots_s[i + 1]);
        let (mut lo, mut hi) = (t0, t1);
        let mut t = t0 + (t1 - t0) * (s - s0) / (s1 - s0);
        let speed = |t: f64| self.curve.jet(t).speed();
        for _ in 0..60 {
            let g = s0 + self.rule.integrate(speed, t0, t) - s;
            if g > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let step = g / speed(t);
            let mut next = t - step;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() <= 1e-15 * (1.0 + t.abs()) {
                return next;
            }
            t = next;
        }
        t
    }

    pub fn jet(&self, s: f64) -> Jet {
        let t = self.parameter_at(s);
        arc_jet(&self.curve.jet(t))
    }
}

fn arc_jet(c: &CurveJet) -> Jet {
    let speed = c.speed();
    let speed_t = (c.dx * c.ddx + c.dz * c.ddz) / speed;
    Jet {
        r: c.x,
        dr: c.dx / speed,
        ddr: (c.ddx * speed - c.dx * speed_t) / (speed * speed * speed),
        z: c.z,
        dz: c.dz / speed,
    }
}
