//! Piecewise-cubic Hermite interpolation of sampled profile curves.

use crate::error::{Error, Result};

/// A planar curve `t -> (x(t), z(t))` with two derivatives.
pub(crate) trait PlanarCurve: Send + Sync + std::fmt::Debug {
    fn jet(&self, t: f64) -> CurveJet;
    /// Break points at which the curve may be only C¹. Arc length is
    /// accumulated interval by interval between consecutive knots.
    fn knots(&self) -> Vec<f64>;
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CurveJet {
    pub x: f64,
    pub dx: f64,
    pub ddx: f64,
    pub z: f64,
    pub dz: f64,
    pub ddz: f64,
}

impl CurveJet {
    pub fn speed(&self) -> f64 {
        self.dx.hypot(self.dz)
    }
}

/// Meridian of an ellipsoid: `x = ratio * sin t`, `z = -cos t`, `t ∈ [0, π]`.
#[derive(Debug, Clone)]
pub(crate) struct Ellipse {
    pub ratio: f64,
    pub knot_count: usize,
}

impl PlanarCurve for Ellipse {
    fn jet(&self, t: f64) -> CurveJet {
        let (s, c) = t.sin_cos();
        CurveJet { x: self.ratio * s, dx: self.ratio * c, ddx: -self.ratio * s, z: -c, dz: s, ddz: c }
    }

    fn knots(&self) -> Vec<f64> {
        let n = self.knot_count;
        (0..=n).map(|i| std::f64::consts::PI * i as f64 / n as f64).collect()
    }
}

/// Cubic Hermite interpolant through tabulated `(t, x, z)` samples.
///
/// Node derivatives come from the five-point Lagrange stencil around each
/// node (one-sided at the ends), then pass through a monotonicity filter:
/// where the data are strictly monotone across a node the slope is clipped
/// to the Fritsch–Carlson region, so the interpolant cannot overshoot near
/// the poles. Next to flat segments the slope is zero; at strict data
/// extrema the high-order estimate is kept.
#[derive(Debug, Clone)]
pub(crate) struct HermiteTable {
    t: Vec<f64>,
    x: Vec<f64>,
    z: Vec<f64>,
    dx: Vec<f64>,
    dz: Vec<f64>,
}

impl HermiteTable {
    pub fn new(t: Vec<f64>, x: Vec<f64>, z: Vec<f64>) -> Result<Self> {
        if t.len() < 5 {
            return Err(Error::invalid("table", "need at least five samples"));
        }
        if t.len() != x.len() || t.len() != z.len() {
            return Err(Error::invalid("table", "column lengths differ"));
        }
        if let Some(i) = t.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("table", format!("parameter t is not strictly increasing at row {}", i + 1)));
        }
        let dx = monotone_slopes(&t, &x);
        let dz = monotone_slopes(&t, &z);
        Ok(Self { t, x, z, dx, dz })
    }

    fn locate(&self, t: f64) -> usize {
        let n = self.t.len();
        match self.t.binary_search_by(|probe| probe.total_cmp(&t)) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        }
    }
}

fn hermite(y0: f64, y1: f64, d0: f64, d1: f64, h: f64, s: f64) -> (f64, f64, f64) {
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    let v = h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
    let dv = ((6.0 * s2 - 6.0 * s) * y0
        + (3.0 * s2 - 4.0 * s + 1.0) * h * d0
        + (-6.0 * s2 + 6.0 * s) * y1
        + (3.0 * s2 - 2.0 * s) * h * d1)
        / h;
    let ddv = ((12.0 * s - 6.0) * y0 + (6.0 * s - 4.0) * h * d0 + (-12.0 * s + 6.0) * y1 + (6.0 * s - 2.0) * h * d1)
        / (h * h);
    (v, dv, ddv)
}

impl PlanarCurve for HermiteTable {
    fn jet(&self, t: f64) -> CurveJet {
        let i = self.locate(t);
        let h = self.t[i + 1] - self.t[i];
        let s = (t - self.t[i]) / h;
        let (x, dx, ddx) = hermite(self.x[i], self.x[i + 1], self.dx[i], self.dx[i + 1], h, s);
        let (z, dz, ddz) = hermite(self.z[i], self.z[i + 1], self.dz[i], self.dz[i + 1], h, s);
        CurveJet { x, dx, ddx, z, dz, ddz }
    }

    fn knots(&self) -> Vec<f64> {
        self.t.clone()
    }
}

/// Derivative at `t[i]` of the polynomial interpolating the given stencil.
fn lagrange_derivative(t: &[f64], y: &[f64], stencil: std::ops::Range<usize>, i: usize) -> f64 {
    let ti = t[i];
    let mut d = 0.0;
    for j in stencil.clone() {
        let weight = if j == i {
            stencil.clone().filter(|&k| k != i).map(|k| 1.0 / (ti - t[k])).sum::<f64>()
        } else {
            let num: f64 = stencil.clone().filter(|&k| k != i && k != j).map(|k| ti - t[k]).product();
            let den: f64 = stencil.clone().filter(|&k| k != j).map(|k| t[j] - t[k]).product();
            num / den
        };
        d += weight * y[j];
    }
    d
}

pub(crate) fn monotone_slopes(t: &[f64], y: &[f64]) -> Vec<f64> {
    let n = t.len();
    let secant: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (t[i + 1] - t[i])).collect();
    (0..n)
        .map(|i| {
            let start = i.saturating_sub(2).min(n - 5);
            let d = lagrange_derivative(t, y, start..start + 5, i);
            let neighbours: &[f64] = if i == 0 {
                &secant[..1]
            } else if i == n - 1 {
                &secant[n - 2..]
            } else {
                &secant[i - 1..=i]
            };
            let monotone_up = neighbours.iter().all(|&s| s > 0.0);
            let monotone_down = neighbours.iter().all(|&s| s < 0.0);
            let cap = 3.0 * neighbours.iter().map(|s| s.abs()).fold(f64::INFINITY, f64::min);
            if neighbours.contains(&0.0) {
                0.0
            } else if monotone_up {
                d.clamp(0.0, cap)
            } else if monotone_down {
                d.clamp(-cap, 0.0)
            } else {
                d
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slopes_are_fourth_order_on_smooth_data() {
        let n = 41;
        let t: Vec<f64> = (0..n).map(|i| 0.3 + i as f64 * 0.02).collect();
        let y: Vec<f64> = t.iter().map(|t| t.exp()).collect();
        let d = monotone_slopes(&t, &y);
        for (ti, di) in t.iter().zip(&d) {
            assert!((di - ti.exp()).abs() < 1e-6, "{ti}: {di}");
        }
    }

    #[test]
    fn monotone_data_gives_monotone_interpolant() {
        let t: Vec<f64> = (0..8).map(|i| i as f64).collect();
        let x = vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 2.0, 2.0];
        let z: Vec<f64> = t.clone();
        let table = HermiteTable::new(t, x, z).unwrap();
        let mut last = f64::NEG_INFINITY;
        for k in 0..=700 {
            let v = table.jet(k as f64 * 0.01).x;
            assert!(v >= last - 1e-15, "overshoot at {}", k as f64 * 0.01);
            assert!((-1e-15..=2.0 + 1e-15).contains(&v));
            last = v;
        }
    }
}
