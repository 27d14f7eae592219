//! Ordinary least-squares line fits used for decay-rate diagnostics.

use serde::Serialize;

use crate::error::{Error, Result};

/// Result of fitting `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn line_fit(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() {
        return Err(Error::Fit(format!("length mismatch: {} abscissae, {} ordinates", xs.len(), ys.len())));
    }
    if xs.len() < 2 {
        return Err(Error::Fit("need at least two points".into()));
    }
    if let Some(i) = xs.iter().chain(ys).position(|v| !v.is_finite()) {
        return Err(Error::Fit(format!("non-finite value at position {i}")));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return Err(Error::Fit("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(LineFit { slope, intercept: my - slope * mx, r2 })
}

/// Fits `log y` against `log x`. Every `y` must be strictly positive.
pub fn log_log_fit(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    check_positive(ys)?;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    line_fit(&lx, &ly)
}

/// Fits `log y` against `x`.
pub fn semi_log_fit(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    check_positive(ys)?;
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    line_fit(xs, &ly)
}

fn check_positive(ys: &[f64]) -> Result<()> {
    match ys.iter().position(|&y| !(y > 0.0)) {
        Some(i) => Err(Error::Fit(format!("logarithm of non-positive value {} at position {i}", ys[i]))),
        None => Ok(()),
    }
}
