//! Surfaces of revolution diffeomorphic to the 2-sphere.
//!
//! A surface is generated by rotating a meridian `θ ↦ (R(θ), z(θ))` about
//! the z-axis, where θ ∈ [0, L] is arc length from the south pole. The
//! induced metric is `dθ² + R(θ)² dφ²`, so everything downstream needs only
//! `R` and its derivatives on [0, L].

mod arclength;
mod table;

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;

use arclength::ArcLengthMap;
pub use arclength::Jet;
use table::{Ellipse, HermiteTable};

/// Knots used to accumulate arc length along analytic meridians.
const ELLIPSE_KNOTS: usize = 2048;

/// One row of a tabulated meridian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableSample {
    pub t: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SurfaceKind {
    RoundSphere,
    /// Ellipsoid with polar semi-axis 1 and equatorial radius `axis_ratio`.
    Ellipsoid {
        axis_ratio: f64,
    },
    TableCurve(Vec<TableSample>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceSpec {
    pub kind: SurfaceKind,
    /// Number of uniform intervals on [0, L].
    pub grid_size: usize,
}

impl SurfaceSpec {
    pub fn round_sphere(grid_size: usize) -> Self {
        Self { kind: SurfaceKind::RoundSphere, grid_size }
    }

    pub fn ellipsoid(axis_ratio: f64, grid_size: usize) -> Self {
        Self { kind: SurfaceKind::Ellipsoid { axis_ratio }, grid_size }
    }

    pub fn table(samples: Vec<TableSample>, grid_size: usize) -> Self {
        Self { kind: SurfaceKind::TableCurve(samples), grid_size }
    }
}

#[derive(Debug, Clone)]
enum Evaluator {
    Sphere,
    Arc(Arc<ArcLengthMap>),
}

/// Arc-length parametrized meridian sampled on a uniform θ-grid.
///
/// Immutable once built. Values between grid nodes are evaluated from the
/// underlying curve, not from the samples.
#[derive(Debug, Clone)]
pub struct ProfileCurve {
    kind: SurfaceKind,
    length: f64,
    theta: Vec<f64>,
    r: Vec<f64>,
    z: Vec<f64>,
    dr: Vec<f64>,
    eval: Evaluator,
}

pub fn build_profile(spec: &SurfaceSpec) -> Result<ProfileCurve> {
    if spec.grid_size < 2 {
        return Err(Error::invalid("grid_size", "need at least two intervals"));
    }
    let eval = match &spec.kind {
        SurfaceKind::RoundSphere => Evaluator::Sphere,
        SurfaceKind::Ellipsoid { axis_ratio } => {
            if !(*axis_ratio > 0.0) || !axis_ratio.is_finite() {
                return Err(Error::invalid("axis_ratio", format!("must be > 0, got {axis_ratio}")));
            }
            Evaluator::Arc(Arc::new(ArcLengthMap::new(Box::new(Ellipse {
                ratio: *axis_ratio,
                knot_count: ELLIPSE_KNOTS,
            }))?))
        }
        SurfaceKind::TableCurve(samples) => {
            validate_table(samples)?;
            let table = HermiteTable::new(
                samples.iter().map(|s| s.t).collect(),
                samples.iter().map(|s| s.r).collect(),
                samples.iter().map(|s| s.z).collect(),
            )?;
            Evaluator::Arc(Arc::new(ArcLengthMap::new(Box::new(table))?))
        }
    };
    ProfileCurve::sample(spec.kind.clone(), eval, spec.grid_size)
}

fn validate_table(samples: &[TableSample]) -> Result<()> {
    if samples.len() < 5 {
        return Err(Error::invalid("table", "need at least five samples"));
    }
    if let Some(s) = samples.iter().find(|s| s.r < 0.0 || !s.r.is_finite()) {
        return Err(Error::invalid("table", format!("negative radius R = {} at t = {}", s.r, s.t)));
    }
    let (first, last) = (samples[0], samples[samples.len() - 1]);
    if first.r != 0.0 || last.r != 0.0 {
        return Err(Error::invalid("table", "R must vanish exactly at both endpoints"));
    }
    if let Some(s) = samples[1..samples.len() - 1].iter().find(|s| s.r == 0.0) {
        return Err(Error::NotEmbeddable(format!("R vanishes at interior t = {}", s.t)));
    }
    Ok(())
}

impl ProfileCurve {
    fn sample(kind: SurfaceKind, eval: Evaluator, n: usize) -> Result<Self> {
        let length = match &eval {
            Evaluator::Sphere => PI,
            Evaluator::Arc(map) => map.length(),
        };
        let h = length / n as f64;
        let theta: Vec<f64> = (0..=n).map(|i| if i == n { length } else { i as f64 * h }).collect();
        let mut curve = Self {
            kind,
            length,
            r: Vec::with_capacity(n + 1),
            z: Vec::with_capacity(n + 1),
            dr: Vec::with_capacity(n + 1),
            theta,
            eval,
        };
        for i in 0..=n {
            let jet = curve.jet_unchecked(curve.theta[i]);
            curve.r.push(if i == 0 || i == n { 0.0 } else { jet.r });
            curve.z.push(jet.z);
            curve.dr.push(jet.dr);
        }
        if let Some(i) = (1..n).find(|&i| !(curve.r[i] > 0.0)) {
            return Err(Error::NotEmbeddable(format!(
                "R(θ) = {} is not positive at interior node θ = {}",
                curve.r[i], curve.theta[i]
            )));
        }
        Ok(curve)
    }

    /// The same surface sampled on a different number of intervals.
    pub fn resampled(&self, grid_size: usize) -> Result<Self> {
        if grid_size < 2 {
            return Err(Error::invalid("grid_size", "need at least two intervals"));
        }
        Self::sample(self.kind.clone(), self.eval.clone(), grid_size)
    }

    pub fn kind(&self) -> &SurfaceKind {
        &self.kind
    }

    pub fn is_round_sphere(&self) -> bool {
        matches!(self.kind, SurfaceKind::RoundSphere)
    }

    /// Total arc length L of the meridian.
    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn intervals(&self) -> usize {
        self.theta.len() - 1
    }

    pub fn step(&self) -> f64 {
        self.length / self.intervals() as f64
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn dr(&self) -> &[f64] {
        &self.dr
    }

    fn check_theta(&self, theta: f64) -> Result<f64> {
        let slack = 1e-12 * self.length;
        if !(theta >= -slack && theta <= self.length + slack) {
            return Err(Error::OutOfRange { coordinate: "theta", value: theta, lo: 0.0, hi: self.length });
        }
        Ok(theta.clamp(0.0, self.length))
    }

    fn jet_unchecked(&self, theta: f64) -> Jet {
        match &self.eval {
            Evaluator::Sphere => {
                let (s, c) = theta.sin_cos();
                Jet { r: s, dr: c, ddr: -s, z: -c, dz: s }
            }
            Evaluator::Arc(map) => map.jet(theta),
        }
    }

    /// `R`, `R'`, `R''` and `z` at an arbitrary θ ∈ [0, L].
    pub fn jet(&self, theta: f64) -> Result<Jet> {
        let theta = self.check_theta(theta)?;
        let mut jet = self.jet_unchecked(theta);
        if theta == 0.0 || theta == self.length {
            jet.r = 0.0;
        }
        Ok(jet)
    }

    pub fn radius(&self, theta: f64) -> Result<f64> {
        Ok(self.jet(theta)?.r)
    }

    /// Circumference `2πR(θ)` of the rotation orbit through θ.
    pub fn orbit_volume(&self, theta: f64) -> Result<f64> {
        Ok(2.0 * PI * self.radius(theta)?)
    }

    /// Density of the pushforward of the area measure to the orbit space
    /// [0, L], with respect to dθ. Coincides with the orbit circumference.
    pub fn quotient_measure_density(&self, theta: f64) -> Result<f64> {
        self.orbit_volume(theta)
    }

    /// Surface area `∫₀^L 2πR dθ` by Simpson's rule on the sampling grid.
    pub fn area(&self) -> f64 {
        let density: Vec<f64> = self.r.iter().map(|r| 2.0 * PI * r).collect();
        quad::simpson(&density, self.step())
    }

    /// Simpson weights for integrals over [0, L] on the sampling grid.
    pub fn simpson_weights(&self) -> Vec<f64> {
        quad::simpson_weights(self.intervals(), self.step())
    }

    /// Largest violation of `R(L - θ) = R(θ)` over the grid.
    pub fn reflection_asymmetry(&self) -> f64 {
        let n = self.r.len();
        (0..n).map(|i| (self.r[i] - self.r[n - 1 - i]).abs()).fold(0.0, f64::max)
    }

    pub fn is_reflection_symmetric(&self, tol: f64) -> bool {
        self.reflection_asymmetry() <= tol
    }

    /// Writes `theta,R,z,dR` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["theta", "R", "z", "dR"])?;
        for i in 0..self.theta.len() {
            w.write_record([
                self.theta[i].to_string(),
                self.r[i].to_string(),
                self.z[i].to_string(),
                self.dr[i].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Reads a `t,R,z` table.
pub fn read_table_csv<R: Read>(input: R) -> Result<Vec<TableSample>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["t", "R", "z"] {
        return Err(Error::invalid(
            "table",
            format!("expected header `t,R,z`, found `{}`", headers.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    let rows = reader.deserialize().collect::<std::result::Result<Vec<TableSample>, _>>()?;
    Ok(rows)
}

pub fn read_table_file(path: &Path) -> Result<Vec<TableSample>> {
    read_table_csv(std::fs::File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere() -> ProfileCurve {
        build_profile(&SurfaceSpec::round_sphere(400)).unwrap()
    }

    #[test]
    fn round_sphere_is_analytic() {
        let c = sphere();
        assert_eq!(c.length(), PI);
        assert!((c.radius(PI / 2.0).unwrap() - 1.0).abs() < 1e-15);
        for i in 0..=c.intervals() {
            let speed2 = c.dr()[i].powi(2) + (c.theta()[i].sin()).powi(2);
            assert!((speed2 - 1.0).abs() < 1e-15);
        }
        assert_eq!(c.r()[0], 0.0);
        assert_eq!(*c.r().last().unwrap(), 0.0);
    }

    #[test]
    fn orbit_volume_values() {
        let c = sphere();
        assert!((c.orbit_volume(PI / 2.0).unwrap() - 2.0 * PI).abs() < 1e-14);
        assert_eq!(c.orbit_volume(0.0).unwrap(), 0.0);
        assert_eq!(c.quotient_measure_density(PI).unwrap(), 0.0);
        assert!(matches!(c.orbit_volume(3.5), Err(Error::OutOfRange { .. })));
        assert!(c.orbit_volume(-0.1).is_err());
    }

    #[test]
    fn sphere_area_is_four_pi() {
        assert!((sphere().area() / (4.0 * PI) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(build_profile(&SurfaceSpec::ellipsoid(-1.0, 100)).is_err());
        assert!(build_profile(&SurfaceSpec::ellipsoid(0.0, 100)).is_err());
        let mut samples: Vec<TableSample> = (0..=20)
            .map(|i| {
                let t = PI * i as f64 / 20.0;
                TableSample { t, r: t.sin(), z: -t.cos() }
            })
            .collect();
        samples[20].r = 0.0;
        samples[5].r = -0.1;
        assert!(build_profile(&SurfaceSpec::table(samples.clone(), 50)).is_err());
        samples[5].r = (PI * 5.0 / 20.0).sin();
        samples[0].r = 0.01;
        assert!(build_profile(&SurfaceSpec::table(samples, 50)).is_err());
    }

    #[test]
    fn stalled_table_is_not_embeddable() {
        let mut samples: Vec<TableSample> = (0..=20)
            .map(|i| {
                let t = PI * i as f64 / 20.0;
                TableSample { t, r: t.sin(), z: -t.cos() }
            })
            .collect();
        samples[20].r = 0.0;
        // the curve stops for a whole parameter interval
        let (r, z) = (samples[10].r, samples[10].z);
        for s in &mut samples[11..13] {
            s.r = r;
            s.z = z;
        }
        let err = build_profile(&SurfaceSpec::table(samples, 50)).unwrap_err();
        assert!(matches!(err, Error::NotEmbeddable(_)), "{err}");
    }

    #[test]
    fn table_csv_header_is_checked() {
        let ok = "t,R,z\n0,0,-1\n1,0.5,0\n";
        assert_eq!(read_table_csv(ok.as_bytes()).unwrap().len(), 2);
        assert!(read_table_csv("t,r,z\n0,0,-1\n".as_bytes()).is_err());
    }

    #[test]
    fn profile_csv_has_expected_header() {
        let mut buf = Vec::new();
        build_profile(&SurfaceSpec::round_sphere(4)).unwrap().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("theta,R,z,dR\n0,0,-1,1\n"));
        assert_eq!(text.lines().count(), 6);
    }
}
