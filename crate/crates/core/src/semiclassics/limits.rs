//! Quantum-limit functionals and the statistics built from them.

use std::f64::consts::PI;
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use super::partition::{admissible_exponents, CharacterFamily};
use super::window::{SpectralWindow, SpectrumSource};
use crate::dynamics::space_average_reduced_shell;
use crate::error::{Error, Result};
use crate::fit::{log_log_fit, LineFit};
use crate::geometry::ProfileCurve;
use crate::quad::simpson;
use crate::spectral::EigenPair;

/// Multiplication symbols `a(θ)` on the meridian.
#[derive(Debug, Clone, PartialEq)]
pub enum TestFunction {
    One,
    Theta,
    Cos,
    ThetaSquared,
    /// Piecewise-linear interpolation of `(θ, a)` samples, constant beyond
    /// the ends.
    Table {
        name: String,
        theta: Vec<f64>,
        values: Vec<f64>,
    },
}

impl TestFunction {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            TestFunction::One => 1.0,
            TestFunction::Theta => t,
            TestFunction::Cos => t.cos(),
            TestFunction::ThetaSquared => t * t,
            TestFunction::Table { theta, values, .. } => {
                let i = theta.partition_point(|&x| x <= t);
                if i == 0 {
                    values[0]
                } else if i == theta.len() {
                    values[i - 1]
                } else {
                    let s = (t - theta[i - 1]) / (theta[i] - theta[i - 1]);
                    values[i - 1] + s * (values[i] - values[i - 1])
                }
            }
        }
    }

    pub fn name(&self) -> &str {
        match self {
            TestFunction::One => "one",
            TestFunction::Theta => "theta",
            TestFunction::Cos => "cos",
            TestFunction::ThetaSquared => "theta2",
            TestFunction::Table { name, .. } => name,
        }
    }

    /// Reads a `theta,a` CSV with strictly increasing `theta`.
    pub fn from_table<R: Read>(name: impl Into<String>, input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["theta", "a"] {
            return Err(Error::invalid(
                "test function table",
                format!("expected header `theta,a`, got `{}`", headers.iter().collect::<Vec<_>>().join(",")),
            ));
        }
        let (mut theta, mut values) = (Vec::new(), Vec::new());
        for row in rdr.deserialize() {
            let (t, a): (f64, f64) = row?;
            theta.push(t);
            values.push(a);
        }
        if theta.len() < 2 {
            return Err(Error::Empty("test function table"));
        }
        if theta.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("test function table", "theta must be strictly increasing"));
        }
        Ok(TestFunction::Table { name: name.into(), theta, values })
    }

    pub fn from_table_file(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_table(format!("table:{}", path.display()), file)
    }
}

impl FromStr for TestFunction {
    type Err = Error;

    /// Parses a built-in name; tables are loaded with [`TestFunction::from_table_file`].
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one" => Ok(TestFunction::One),
            "theta" => Ok(TestFunction::Theta),
            "cos" => Ok(TestFunction::Cos),
            "theta2" => Ok(TestFunction::ThetaSquared),
            other => Err(Error::invalid("test function", format!("unknown name `{other}` (one, theta, cos, theta2)"))),
        }
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `μ[a] = 2π∫₀^L a(θ) |f(θ)|² R(θ) dθ` in the pair's own quadrature.
pub fn matrix_element(pair: &EigenPair, a: &dyn Fn(f64) -> f64) -> Result<f64> {
    pair.check_normalized()?;
    Ok(pair.weights().iter().zip(pair.f()).zip(pair.theta()).map(|((w, f), &t)| w * a(t) * f * f).sum())
}

/// Predicted quantum limit `(1/L)∫₀^L a dθ`, composite Simpson on the curve grid.
pub fn limit_target(curve: &ProfileCurve, a: &dyn Fn(f64) -> f64) -> f64 {
    let values: Vec<f64> = curve.theta().iter().map(|&t| a(t)).collect();
    simpson(&values, curve.step()) / curve.length()
}

/// Richardson estimate `|S_N − S_{N/2}|/15` of the quadrature error in
/// [`limit_target`]; NaN when the grid has an odd interval count.
pub fn limit_target_error(curve: &ProfileCurve, a: &dyn Fn(f64) -> f64) -> f64 {
    let values: Vec<f64> = curve.theta().iter().map(|&t| a(t)).collect();
    if values.len() < 5 || !(values.len() - 1).is_multiple_of(2) {
        return f64::NAN;
    }
    let coarse: Vec<f64> = values.iter().step_by(2).copied().collect();
    let fine = simpson(&values, curve.step());
    let half = simpson(&coarse, 2.0 * curve.step());
    (fine - half).abs() / 15.0 / curve.length()
}

/// `Θ(θ) = |f(θ)|²`, the rotation average of `|f e^{imφ}|²`.
pub fn theta_density(pair: &EigenPair) -> Result<Vec<f64>> {
    pair.check_normalized()?;
    Ok(pair.f().iter().map(|f| f * f).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantumLimitEntry {
    pub m: i64,
    pub k: usize,
    pub l_label: Option<i64>,
    pub energy: f64,
    pub mu: f64,
    pub deviation: f64,
}

impl QuantumLimitEntry {
    /// `l` on the round sphere, otherwise `√E` as the frequency scale.
    pub fn frequency(&self) -> f64 {
        self.l_label.map_or(self.energy.sqrt(), |l| l as f64)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct QuantumLimitReport {
    pub test_function: String,
    pub target: f64,
    pub entries: Vec<QuantumLimitEntry>,
    /// Log-log fit of deviation against frequency over every entry with a
    /// positive deviation; absent when fewer than two qualify.
    pub fit: Option<LineFit>,
}

impl QuantumLimitReport {
    /// Log-log fit restricted to frequencies in `[lo, hi]`.
    pub fn fit_over(&self, lo: f64, hi: f64) -> Result<LineFit> {
        let (xs, ys): (Vec<f64>, Vec<f64>) = self
            .entries
            .iter()
            .filter(|e| (lo..=hi).contains(&e.frequency()))
            .map(|e| (e.frequency(), e.deviation))
            .unzip();
        log_log_fit(&xs, &ys)
    }

    pub fn max_deviation(&self) -> f64 {
        self.entries.iter().fold(0.0, |a, e| a.max(e.deviation))
    }

    /// Writes `l,deviation` rows for the entries of mode `m`; without a
    /// degree label the first column holds `√E`.
    pub fn write_csv<W: std::io::Write>(&self, m: i64, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["l", "deviation"])?;
        for e in self.entries.iter().filter(|e| e.m == m) {
            let l = e.l_label.map_or_else(|| e.frequency().to_string(), |l| l.to_string());
            w.write_record([l, e.deviation.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Matrix elements of `a` over `pairs`, compared with the limit on `curve`.
pub fn quantum_limit(curve: &ProfileCurve, pairs: &[EigenPair], a: &TestFunction) -> Result<QuantumLimitReport> {
    let f = |t: f64| a.eval(t);
    let target = limit_target(curve, &f);
    let entries = pairs
        .iter()
        .map(|p| {
            let mu = matrix_element(p, &f)?;
            Ok(QuantumLimitEntry {
                m: p.m,
                k: p.k,
                l_label: p.l_label,
                energy: p.energy,
                mu,
                deviation: (mu - target).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        entries.iter().filter(|e| e.deviation > 0.0).map(|e| (e.frequency(), e.deviation)).unzip();
    let fit = log_log_fit(&xs, &ys).ok();
    Ok(QuantumLimitReport { test_function: a.name().to_string(), target, entries, fit })
}

/// Split of a window into `Λ = J − Γ` and `Γ = {j : |μ_j − α|² ≥ √r}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionResult {
    /// Positions (into the window) of the retained pairs.
    pub lambda: Vec<usize>,
    pub gamma: Vec<usize>,
    pub threshold: f64,
    /// `#Λ/#J`, taken as 1 for an empty window.
    pub density_ratio: f64,
}

pub fn select_density_one(deviations: &[f64], r: f64) -> Result<SelectionResult> {
    if !(r >= 0.0) {
        return Err(Error::invalid("r", format!("must be ≥ 0, got {r}")));
    }
    let threshold = r.sqrt();
    let (gamma, lambda): (Vec<usize>, Vec<usize>) =
        (0..deviations.len()).partition(|&i| deviations[i].powi(2) >= threshold);
    let density_ratio = if deviations.is_empty() { 1.0 } else { lambda.len() as f64 / deviations.len() as f64 };
    Ok(SelectionResult { lambda, gamma, threshold, density_ratio })
}

/// One `h` of the integrated statistic.
#[derive(Debug, Clone, Serialize)]
pub struct QeStatPoint {
    pub h: f64,
    pub window_size: usize,
    pub family_size: usize,
    pub target: f64,
    /// `S(h) = h^{1−β}/#W_h · Σ_{J(h)} |μ_j − α|²`.
    pub statistic: f64,
    pub selection: SelectionResult,
    /// `β` strictly inside the admissible range for the family's growth rate.
    pub admissible: bool,
}

fn family_admissible(family: &CharacterFamily, beta: f64) -> bool {
    let vartheta = match family {
        CharacterFamily::Growing { vartheta } => *vartheta,
        CharacterFamily::Fixed { .. } => 0.0,
    };
    admissible_exponents(vartheta).is_ok_and(|(lo, hi)| beta > lo && beta < hi)
}

fn check_h_list(h_list: &[f64]) -> Result<()> {
    if h_list.is_empty() {
        return Err(Error::Empty("h schedule"));
    }
    Ok(())
}

/// The statistic at one `h`, with the window it was computed on.
pub fn qe_stat_point(
    source: &SpectrumSource,
    a: &TestFunction,
    c: f64,
    beta: f64,
    family: &CharacterFamily,
    h: f64,
) -> Result<(QeStatPoint, SpectralWindow)> {
    let window = source.window(c, beta, h, family)?;
    let pairs = source.pairs(&window)?;
    let report = quantum_limit(source.curve(), &pairs, a)?;
    let family_size = family.cardinality(h);
    let sum_sq: f64 = report.entries.iter().map(|e| e.deviation * e.deviation).sum();
    let statistic = h.powf(1.0 - beta) / family_size as f64 * sum_sq;
    let deviations: Vec<f64> = report.entries.iter().map(|e| e.deviation).collect();
    let selection = select_density_one(&deviations, statistic)?;
    Ok((
        QeStatPoint {
            h,
            window_size: window.len(),
            family_size,
            target: report.target,
            statistic,
            selection,
            admissible: family_admissible(family, beta),
        },
        window,
    ))
}

/// `S(h)` over a schedule of `h`, in the order given.
pub fn integrated_qe_statistic(
    source: &SpectrumSource,
    a: &TestFunction,
    c: f64,
    beta: f64,
    family: &CharacterFamily,
    h_list: &[f64],
) -> Result<Vec<QeStatPoint>> {
    check_h_list(h_list)?;
    h_list.iter().map(|&h| Ok(qe_stat_point(source, a, c, beta, family, h)?.0)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeylPoint {
    pub h: f64,
    pub window_size: usize,
    pub family_size: usize,
    /// `2π h^{1−β} #J(h)/#W_h`.
    pub statistic: f64,
    /// Volume of the reduced energy shell at `c`.
    pub reference_volume: f64,
    pub ratio: f64,
    pub admissible: bool,
}

pub fn weyl_statistic(
    source: &SpectrumSource,
    c: f64,
    beta: f64,
    family: &CharacterFamily,
    h: f64,
) -> Result<WeylPoint> {
    let window = source.window(c, beta, h, family)?;
    if window.is_empty() {
        return Err(Error::Empty("spectral window"));
    }
    let family_size = family.cardinality(h);
    let statistic = 2.0 * PI * h.powf(1.0 - beta) * window.len() as f64 / family_size as f64;
    let reference_volume = space_average_reduced_shell(source.curve(), &|_, _| 1.0, c)?.volume;
    Ok(WeylPoint {
        h,
        window_size: window.len(),
        family_size,
        statistic,
        reference_volume,
        ratio: statistic / reference_volume,
        admissible: family_admissible(family, beta),
    })
}
