//! Laplace–Beltrami eigenpairs on a surface of revolution.
//!
//! Separating `u(θ, φ) = f(θ) e^{imφ}` turns `-Δu = E u` into the singular
//! Sturm–Liouville problem
//!
//! ```text
//! -(R f')' + (m²/R) f = E R f   on (0, L),
//! ```
//!
//! one per angular mode `m`. Each is discretized by second-order flux
//! differences on a uniform grid, giving a symmetric tridiagonal stiffness
//! matrix and a diagonal mass matrix. For `m = 0` the pole nodes are kept
//! with a ghost-node Neumann closure; for `m ≠ 0` they are removed, since
//! regular solutions vanish like `θ^{|m|}` there.

mod tridiag;

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::ProfileCurve;
use crate::specfun;

/// Smallest grid accepted by [`assemble_mode`].
pub const MIN_GRID: usize = 64;
/// Tolerance on `2π∫|f|²R dθ = 1` in the pair's own quadrature.
pub const NORMALIZATION_TOL: f64 = 1e-10;

/// Discretized radial problem for one angular mode.
#[derive(Debug, Clone)]
pub struct ModeProblem {
    m: i64,
    /// Full grid θ_0..θ_N.
    theta: Arc<[f64]>,
    /// First and one-past-last grid index carried as an unknown.
    first: usize,
    last: usize,
    diag: Vec<f64>,
    upper: Vec<f64>,
    lower: Vec<f64>,
    mass: Vec<f64>,
    round_sphere: bool,
}

pub fn assemble_mode(curve: &ProfileCurve, m: i64, n: usize) -> Result<ModeProblem> {
    if n < MIN_GRID {
        return Err(Error::invalid("N", format!("grid needs at least {MIN_GRID} intervals, got {n}")));
    }
    let length = curve.length();
    let h = length / n as f64;
    let theta: Vec<f64> = (0..=n).map(|i| if i == n { length } else { i as f64 * h }).collect();
    let r_node: Vec<f64> = theta.iter().map(|&t| curve.radius(t)).collect::<Result<_>>()?;
    let r_mid: Vec<f64> = (0..n).map(|i| curve.radius((i as f64 + 0.5) * h)).collect::<Result<_>>()?;
    if let Some(i) = (1..n).find(|&i| !(r_node[i] > 0.0)) {
        return Err(Error::NotEmbeddable(format!("R vanishes at interior node θ = {}", theta[i])));
    }
    let m2 = (m * m) as f64;
    let (first, last) = if m == 0 { (0, n + 1) } else { (1, n) };
    let size = last - first;
    let mut diag = Vec::with_capacity(size);
    let mut mass = Vec::with_capacity(size);
    for i in first..last {
        let (k, w) = if i == 0 {
            (r_mid[0] / h, h * r_mid[0] / 4.0)
        } else if i == n {
            (r_mid[n - 1] / h, h * r_mid[n - 1] / 4.0)
        } else {
            ((r_mid[i - 1] + r_mid[i]) / h + h * m2 / r_node[i], h * r_node[i])
        };
        diag.push(k);
        mass.push(w);
    }
    // row i's coupling to i+1, and row i+1's coupling back to i
    let upper: Vec<f64> = (first..last - 1).map(|i| -r_mid[i] / h).collect();
    let lower: Vec<f64> = (first + 1..last).map(|i| -r_mid[i - 1] / h).collect();
    Ok(ModeProblem {
        m,
        theta: theta.into(),
        first,
        last,
        diag,
        upper,
        lower,
        mass,
        round_sphere: curve.is_round_sphere(),
    })
}

impl ModeProblem {
    pub fn m(&self) -> i64 {
        self.m
    }

    /// Number of grid intervals.
    pub fn intervals(&self) -> usize {
        self.theta.len() - 1
    }

    pub fn unknowns(&self) -> usize {
        self.diag.len()
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn stiffness_diagonal(&self) -> &[f64] {
        &self.diag
    }

    pub fn stiffness_off_diagonal(&self) -> &[f64] {
        &self.upper
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// `max |K_ij - K_ji|` over the band.
    pub fn asymmetry(&self) -> f64 {
        self.upper.iter().zip(&self.lower).map(|(u, l)| (u - l).abs()).fold(0.0, f64::max)
    }

    /// Quadrature weights on the full grid for `2π∫ g R dθ`, consistent with
    /// the mass matrix; zero at removed pole nodes.
    fn weights(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.theta.len()];
        for (j, i) in (self.first..self.last).enumerate() {
            w[i] = 2.0 * PI * self.mass[j];
        }
        w
    }
}

/// One separated eigenfunction `f(θ) e^{imφ}` sampled on a grid, with the
/// quadrature weights of `2π∫ · R dθ` it is normalized against.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub m: i64,
    pub k: usize,
    pub energy: f64,
    pub l_label: Option<i64>,
    f: Vec<f64>,
    theta: Arc<[f64]>,
    weights: Arc<[f64]>,
}

impl EigenPair {
    pub fn f(&self) -> &[f64] {
        &self.f
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Weights `w_i` with `Σ w_i g(θ_i) ≈ 2π∫ g R dθ`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn norm_squared(&self) -> f64 {
        self.inner(self)
    }

    /// Weighted inner product `2π∫ f g R dθ` in this pair's quadrature.
    pub fn inner(&self, other: &EigenPair) -> f64 {
        self.weights.iter().zip(&self.f).zip(&other.f).map(|((w, a), b)| w * a * b).sum()
    }

    pub fn check_normalized(&self) -> Result<()> {
        let n2 = self.norm_squared();
        if (n2 - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Unnormalized(n2));
        }
        Ok(())
    }

    /// Interior sign changes of `f`, ignoring values below `1e-10 · max|f|`.
    pub fn sign_changes(&self) -> usize {
        let cutoff = 1e-10 * self.f.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let mut last = 0.0f64;
        let mut changes = 0;
        for &v in &self.f {
            if v.abs() <= cutoff {
                continue;
            }
            if last != 0.0 && v.signum() != last.signum() {
                changes += 1;
            }
            last = v;
        }
        changes
    }

    /// Same eigenfunction with `m` negated (`f e^{-imφ}`).
    pub fn mirrored(&self) -> EigenPair {
        EigenPair { m: -self.m, ..self.clone() }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["theta", "f"])?;
        for (t, f) in self.theta.iter().zip(&self.f) {
            w.write_record([t.to_string(), f.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Flips the sign so the first value above `1e-6 · max|f|` is positive.
fn fix_sign(f: &mut [f64]) {
    let cutoff = 1e-6 * f.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if let Some(&v) = f.iter().find(|v| v.abs() > cutoff) {
        if v < 0.0 {
            f.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Eigenpairs of one mode, ordered by energy.
#[derive(Debug, Clone)]
pub struct ModeSpectrum {
    pub m: i64,
    pub pairs: Vec<EigenPair>,
}

impl ModeSpectrum {
    pub fn energies(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.energy).collect()
    }

    /// `max |⟨f_i, f_j⟩ - δ_ij|` over the pairs.
    pub fn gram_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, a) in self.pairs.iter().enumerate() {
            for (j, b) in self.pairs.iter().enumerate().skip(i) {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((a.inner(b) - target).abs());
            }
        }
        worst
    }

    pub fn mirrored(&self) -> ModeSpectrum {
        ModeSpectrum { m: -self.m, pairs: self.pairs.iter().map(EigenPair::mirrored).collect() }
    }
}

/// The lowest `count` eigenpairs of a mode problem.
pub fn solve_mode(problem: &ModeProblem, count: usize) -> Result<ModeSpectrum> {
    let n = problem.intervals();
    if count == 0 {
        return Err(Error::invalid("count", "must be ≥ 1"));
    }
    if count > n / 4 {
        return Err(Error::Resolution(format!(
            "{count} eigenpairs requested on {n} intervals; at most N/4 = {} are resolved",
            n / 4
        )));
    }
    let scale: Vec<f64> = problem.mass.iter().map(|w| 1.0 / w.sqrt()).collect();
    let diag: Vec<f64> = problem.diag.iter().zip(&scale).map(|(k, s)| k * s * s).collect();
    let off: Vec<f64> = problem.upper.iter().enumerate().map(|(i, k)| k * scale[i] * scale[i + 1]).collect();
    let (values, vectors) = tridiag::lowest_eigenpairs(&diag, &off, count)?;
    let weights: Arc<[f64]> = problem.weights().into();
    let pairs = values
        .into_iter()
        .zip(vectors)
        .enumerate()
        .map(|(k, (energy, g))| {
            let mut f = vec![0.0; problem.theta.len()];
            for (j, i) in (problem.first..problem.last).enumerate() {
                f[i] = g[j] * scale[j];
            }
            let norm: f64 = weights.iter().zip(&f).map(|(w, v)| w * v * v).sum::<f64>().sqrt();
            f.iter_mut().for_each(|v| *v /= norm);
            fix_sign(&mut f);
            EigenPair {
                m: problem.m,
                k,
                energy,
                l_label: problem.round_sphere.then_some(problem.m.abs() + k as i64),
                f,
                theta: problem.theta.clone(),
                weights: weights.clone(),
            }
        })
        .collect();
    Ok(ModeSpectrum { m: problem.m, pairs })
}

/// Solves several modes in parallel; the result follows the order of `modes`.
///
/// Modes with equal `|m|` are solved once and mirrored.
pub fn solve_modes(curve: &ProfileCurve, modes: &[i64], n: usize, count: usize) -> Result<Vec<ModeSpectrum>> {
    let mut distinct: Vec<i64> = modes.iter().map(|m| m.abs()).collect();
    distinct.sort_unstable();
    distinct.dedup();
    let solved: Vec<ModeSpectrum> =
        distinct.par_iter().map(|&m| solve_mode(&assemble_mode(curve, m, n)?, count)).collect::<Result<_>>()?;
    Ok(modes
        .iter()
        .map(|&m| {
            let s = &solved[distinct.binary_search(&m.abs()).unwrap()];
            if m < 0 {
                s.mirrored()
            } else {
                s.clone()
            }
        })
        .collect())
}

fn simpson_mass_weights(curve: &ProfileCurve) -> Vec<f64> {
    curve.simpson_weights().iter().zip(curve.r()).map(|(w, r)| 2.0 * PI * w * r).collect()
}

fn require_sphere(curve: &ProfileCurve) -> Result<()> {
    if !curve.is_round_sphere() {
        return Err(Error::invalid("curve", "closed-form eigenpairs exist only on the round sphere"));
    }
    Ok(())
}

fn check_closed_form_resolution(curve: &ProfileCurve, l: i64) -> Result<()> {
    let n = curve.intervals();
    if (n as i64) < 4 * (l + 1) {
        return Err(Error::Resolution(format!("degree {l} needs at least {} intervals, grid has {n}", 4 * (l + 1))));
    }
    Ok(())
}

/// Spherical-harmonic eigenpair `Y_{l,m}` sampled on the curve's grid.
///
/// Uses Simpson weights and is rescaled to unit norm in that quadrature.
pub fn closed_form_sphere(l: i64, m: i64, curve: &ProfileCurve) -> Result<EigenPair> {
    require_sphere(curve)?;
    if l < 0 || m.abs() > l {
        return Err(Error::invalid("m", format!("need |m| ≤ l, got l = {l}, m = {m}")));
    }
    check_closed_form_resolution(curve, l)?;
    let f: Vec<f64> = curve.theta().iter().map(|&t| specfun::ylm_radial(l, m, t)).collect::<Result<_>>()?;
    Ok(finish_closed_form(l, m, f, curve.theta().into(), simpson_mass_weights(curve).into()))
}

/// All closed-form pairs `l = |m| ..= l_max` of one mode in a single sweep.
pub fn closed_form_sphere_mode(m: i64, l_max: i64, curve: &ProfileCurve) -> Result<Vec<EigenPair>> {
    closed_form_sphere_range(m, m.abs(), l_max, curve)
}

/// Closed-form pairs `l = l_min ..= l_max` of one mode.
pub fn closed_form_sphere_range(m: i64, l_min: i64, l_max: i64, curve: &ProfileCurve) -> Result<Vec<EigenPair>> {
    require_sphere(curve)?;
    let l_min = l_min.max(m.abs());
    if l_max < l_min {
        return Ok(Vec::new());
    }
    check_closed_form_resolution(curve, l_max)?;
    let count = (l_max - l_min + 1) as usize;
    let skip = (l_min - m.abs()) as usize;
    let nodes = curve.theta().len();
    let mut columns = vec![vec![0.0; nodes]; count];
    let rows: Vec<Vec<f64>> =
        curve.theta().par_iter().map(|&t| specfun::ylm_radial_column(m, l_max, t)).collect::<Result<_>>()?;
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row[skip..].iter().enumerate() {
            columns[j][i] = *v;
        }
    }
    let theta: Arc<[f64]> = curve.theta().into();
    let weights: Arc<[f64]> = simpson_mass_weights(curve).into();
    Ok(columns
        .into_iter()
        .enumerate()
        .map(|(j, f)| finish_closed_form(l_min + j as i64, m, f, theta.clone(), weights.clone()))
        .collect())
}

fn finish_closed_form(l: i64, m: i64, mut f: Vec<f64>, theta: Arc<[f64]>, weights: Arc<[f64]>) -> EigenPair {
    let norm: f64 = weights.iter().zip(&f).map(|(w, v)| w * v * v).sum::<f64>().sqrt();
    f.iter_mut().for_each(|v| *v /= norm);
    fix_sign(&mut f);
    EigenPair { m, k: (l - m.abs()) as usize, energy: (l * (l + 1)) as f64, l_label: Some(l), f, theta, weights }
}

/// An eigenvalue with its position in the `(m, k)` double index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumEntry {
    pub m: i64,
    pub k: usize,
    pub l_label: Option<i64>,
    pub energy: f64,
}

impl From<&EigenPair> for SpectrumEntry {
    fn from(p: &EigenPair) -> Self {
        SpectrumEntry { m: p.m, k: p.k, l_label: p.l_label, energy: p.energy }
    }
}

/// Total order used to flatten the double index: energy, then `|m|`, then
/// the sign of `m` (negative first), then `k`.
pub fn flatten_order(a: &SpectrumEntry, b: &SpectrumEntry) -> std::cmp::Ordering {
    a.energy
        .total_cmp(&b.energy)
        .then(a.m.abs().cmp(&b.m.abs()))
        .then(a.m.signum().cmp(&b.m.signum()))
        .then(a.k.cmp(&b.k))
}

/// Merges per-mode spectra into one sequence in [`flatten_order`].
pub fn flatten(spectra: &[ModeSpectrum]) -> Vec<SpectrumEntry> {
    let mut out: Vec<SpectrumEntry> = spectra.iter().flat_map(|s| s.pairs.iter().map(SpectrumEntry::from)).collect();
    out.sort_by(flatten_order);
    out
}

/// Writes `m,k,l_label,E` rows.
pub fn write_spectrum_csv<W: Write>(entries: &[SpectrumEntry], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["m", "k", "l_label", "E"])?;
    for e in entries {
        w.write_record([
            e.m.to_string(),
            e.k.to_string(),
            e.l_label.map(|l| l.to_string()).unwrap_or_default(),
            e.energy.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
