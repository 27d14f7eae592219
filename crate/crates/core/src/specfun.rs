//! Associated Legendre functions and spherical-harmonic radial factors.
//!
//! `P_{l,m}` follows the Rodrigues convention with the Condon–Shortley
//! phase,
//!
//! ```text
//! P_{l,m}(x) = (-1)^m / (2^l l!) (1 - x²)^{m/2} d^{l+m}/dx^{l+m} (x² - 1)^l,
//! ```
//!
//! evaluated by the upward three-term recurrence in `l` starting from
//! `P_{m,m}`. The recurrence is carried on a rescaled value with the scale
//! kept as a logarithm, so nothing overflows before the final result does.

use std::f64::consts::PI;

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::fit::{self, LineFit};

/// `(sign · mantissa) · exp(log_scale)`.
#[derive(Debug, Clone, Copy)]
struct Scaled {
    mantissa: f64,
    log_scale: f64,
}

impl Scaled {
    fn value(self) -> f64 {
        if self.mantissa == 0.0 {
            0.0
        } else {
            self.mantissa * self.log_scale.exp()
        }
    }
}

fn check_indices(l: i64, m: i64) -> Result<()> {
    if l < 0 {
        return Err(Error::invalid("l", format!("degree must be ≥ 0, got {l}")));
    }
    if m.abs() > l {
        return Err(Error::invalid("m", format!("|m| = {} exceeds l = {l}", m.abs())));
    }
    Ok(())
}

fn legendre_scaled(l: u32, m: u32, x: f64) -> Scaled {
    // P_{m,m} = (-1)^m (2m-1)!! (1-x²)^{m/2}
    let one_minus = (1.0 - x) * (1.0 + x);
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    if m > 0 && one_minus <= 0.0 {
        return Scaled { mantissa: 0.0, log_scale: 0.0 };
    }
    let mut log_scale = if m == 0 {
        0.0
    } else {
        let double_fact: f64 = (1..=m).map(|k| ((2 * k - 1) as f64).ln()).sum();
        double_fact + 0.5 * m as f64 * one_minus.ln()
    };
    if l == m {
        return Scaled { mantissa: sign, log_scale };
    }
    let mut p_prev = sign;
    let mut p = x * (2 * m + 1) as f64 * p_prev;
    for ll in (m + 2)..=l {
        let next = ((2 * ll - 1) as f64 * x * p - (ll + m - 1) as f64 * p_prev) / (ll - m) as f64;
        p_prev = p;
        p = next;
        let mag = p.abs().max(p_prev.abs());
        if mag > 1e150 || (mag < 1e-150 && mag > 0.0) {
            let s = mag.ln();
            p /= mag;
            p_prev /= mag;
            log_scale += s;
        }
    }
    Scaled { mantissa: p, log_scale }
}

/// Associated Legendre function `P_{l,m}(x)` for `0 ≤ m ≤ l`, `|x| ≤ 1`.
pub fn legendre_assoc(l: i64, m: i64, x: f64) -> Result<f64> {
    check_indices(l, m)?;
    if m < 0 {
        return Err(Error::invalid("m", "legendre_assoc takes 0 ≤ m ≤ l"));
    }
    if !(x.abs() <= 1.0) {
        return Err(Error::OutOfRange { coordinate: "x", value: x, lo: -1.0, hi: 1.0 });
    }
    Ok(legendre_scaled(l as u32, m as u32, x).value())
}

/// `ln((l-m)!/(l+m)!)` via log-gamma.
pub fn ln_factorial_ratio(l: u32, m: u32) -> f64 {
    ln_gamma((l - m) as f64 + 1.0) - ln_gamma((l + m) as f64 + 1.0)
}

/// Radial factor of the normalized spherical harmonic,
/// `√((2l+1)/(4π) · (l-m)!/(l+m)!) · P_{l,m}(cos θ)`.
///
/// Negative `m` uses `Y_{l,-m} = (-1)^m conj(Y_{l,m})`, so the radial factor
/// picks up the sign `(-1)^m`; every density downstream depends on `|m|` only.
pub fn ylm_radial(l: i64, m: i64, theta: f64) -> Result<f64> {
    check_indices(l, m)?;
    let am = m.unsigned_abs() as u32;
    let l = l as u32;
    let p = legendre_scaled(l, am, theta.cos());
    if p.mantissa == 0.0 {
        return Ok(0.0);
    }
    let log_norm = 0.5 * (((2 * l + 1) as f64 / (4.0 * PI)).ln() + ln_factorial_ratio(l, am));
    let value = p.mantissa * (p.log_scale + log_norm).exp();
    Ok(if m < 0 && am % 2 == 1 { -value } else { value })
}

/// Radial factors for all degrees `l = |m| ..= l_max` at one angle.
///
/// Uses the fully normalized recurrence, which needs no factorials at all;
/// the result is indexed by `l - |m|`.
pub fn ylm_radial_column(m: i64, l_max: i64, theta: f64) -> Result<Vec<f64>> {
    check_indices(l_max, m)?;
    let am = m.unsigned_abs() as usize;
    let l_max = l_max as usize;
    let (s, x) = theta.sin_cos();
    let s = s.abs();
    let mut out = Vec::with_capacity(l_max - am + 1);
    // P̄_{m,m} = (-1)^m √((2m+1)/(4π) · (2m-1)!!/(2m)!!) sin^m θ
    let mut log_pmm = 0.5 * (1.0 / (4.0 * PI)).ln();
    for k in 1..=am {
        log_pmm += 0.5 * ((2 * k + 1) as f64 / (2 * k) as f64).ln();
    }
    let pmm = if am == 0 {
        log_pmm.exp()
    } else if s == 0.0 {
        0.0
    } else {
        (log_pmm + am as f64 * s.ln()).exp()
    };
    let sign = if am.is_multiple_of(2) { 1.0 } else { -1.0 };
    let reflect = if m < 0 && am % 2 == 1 { -1.0 } else { 1.0 };
    let mut p_prev = sign * pmm;
    out.push(reflect * p_prev);
    if l_max == am {
        return Ok(out);
    }
    let mut p = x * ((2 * am + 3) as f64).sqrt() * p_prev;
    out.push(reflect * p);
    let mf = am as f64;
    for l in (am + 2)..=l_max {
        let lf = l as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let b = (((lf - 1.0).powi(2) - mf * mf) * (2.0 * lf + 1.0) / ((2.0 * lf - 3.0) * (lf * lf - mf * mf))).sqrt();
        let next = a * x * p - b * p_prev;
        p_prev = p;
        p = next;
        out.push(reflect * p);
    }
    Ok(out)
}

/// Main term of the large-`l` expansion of `l^{-m} P_{l,m}(cos θ)`:
/// `(2/(lπ sin θ))^{1/2} cos((l+½)θ − π/4 + mπ/2)`.
pub fn legendre_asymptotic_main(l: i64, m: i64, theta: f64) -> Result<f64> {
    if l < 1 {
        return Err(Error::invalid("l", "asymptotic form needs l ≥ 1"));
    }
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::OutOfRange { coordinate: "theta", value: theta, lo: 0.0, hi: PI });
    }
    let lf = l as f64;
    let phase = (lf + 0.5) * theta - PI / 4.0 + m as f64 * PI / 2.0;
    Ok((2.0 / (lf * PI * theta.sin())).sqrt() * phase.cos())
}

/// Sup-norm residuals of the asymptotic form over `(ε, π−ε)` and their
/// power-law fit in `l`.
#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticFitReport {
    pub l_min: i64,
    pub l_max: i64,
    pub m: i64,
    pub epsilon: f64,
    pub residuals: Vec<(i64, f64)>,
    pub fitted_slope: f64,
    pub fit_r2: f64,
}

/// θ-samples per residual evaluation.
const RESIDUAL_GRID: usize = 2000;

pub fn asymptotic_residual_scan(l_min: i64, l_max: i64, m: i64, epsilon: f64) -> Result<AsymptoticFitReport> {
    if l_max < l_min {
        return Err(Error::Empty("l_range"));
    }
    if m < 0 || l_min < m + 1 {
        return Err(Error::invalid("l_range", format!("need 0 ≤ m and l_min ≥ m + 1 (m = {m})")));
    }
    if !(epsilon > 0.0 && epsilon < PI / 2.0) {
        return Err(Error::invalid("epsilon", format!("must lie in (0, π/2), got {epsilon}")));
    }
    let span = PI - 2.0 * epsilon;
    let thetas: Vec<f64> =
        (0..RESIDUAL_GRID).map(|i| epsilon + span * (i as f64 + 0.5) / RESIDUAL_GRID as f64).collect();
    let mut residuals = Vec::with_capacity((l_max - l_min + 1) as usize);
    for l in l_min..=l_max {
        let scale = (-(m as f64) * (l as f64).ln()).exp();
        let mut sup = 0.0f64;
        for &t in &thetas {
            let exact = legendre_assoc(l, m, t.cos())? * scale;
            let main = legendre_asymptotic_main(l, m, t)?;
            sup = sup.max((exact - main).abs());
        }
        residuals.push((l, sup));
    }
    let xs: Vec<f64> = residuals.iter().map(|(l, _)| *l as f64).collect();
    let ys: Vec<f64> = residuals.iter().map(|(_, r)| *r).collect();
    let LineFit { slope, r2, .. } = fit::log_log_fit(&xs, &ys)?;
    Ok(AsymptoticFitReport { l_min, l_max, m, epsilon, residuals, fitted_slope: slope, fit_r2: r2 })
}

impl AsymptoticFitReport {
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["l", "sup_residual"])?;
        for (l, r) in &self.residuals {
            w.write_record([l.to_string(), r.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({ "slope": self.fitted_slope, "r2": self.fit_r2 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::GaussRule;

    /// Direct expansion of the Rodrigues formula with exact polynomial
    /// coefficients (valid for small l only).
    fn rodrigues(l: usize, m: usize, x: f64) -> f64 {
        // (x² - 1)^l = Σ_k C(l,k) (-1)^{l-k} x^{2k}
        let mut coeffs = vec![0.0f64; 2 * l + 1];
        let mut binom = 1.0;
        for k in 0..=l {
            coeffs[2 * k] = binom * if (l - k).is_multiple_of(2) { 1.0 } else { -1.0 };
            binom = binom * (l - k) as f64 / (k + 1) as f64;
        }
        for _ in 0..(l + m) {
            coeffs = (1..coeffs.len()).map(|i| coeffs[i] * i as f64).collect();
        }
        let poly: f64 = coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c);
        let fact_l: f64 = (1..=l).map(|k| k as f64).product();
        let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
        sign / (2f64.powi(l as i32) * fact_l) * (1.0 - x * x).powf(m as f64 / 2.0) * poly
    }

    #[test]
    fn small_cases() {
        for x in [-1.0, -0.3, 0.0, 0.7, 1.0] {
            assert_eq!(legendre_assoc(0, 0, x).unwrap(), 1.0);
        }
        assert!((legendre_assoc(1, 1, 0.5).unwrap() + 0.75f64.sqrt()).abs() < 1e-15);
        assert!((legendre_assoc(2, 0, 0.5).unwrap() + 0.125).abs() < 1e-15);
        assert!((ylm_radial(0, 0, 1.234).unwrap() - 1.0 / (4.0 * PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn recurrence_matches_rodrigues() {
        for l in 0..=10usize {
            for m in 0..=l {
                for k in 0..21 {
                    let x = (PI * (k as f64 + 0.5) / 21.0).cos();
                    let exact = rodrigues(l, m, x);
                    let got = legendre_assoc(l as i64, m as i64, x).unwrap();
                    let tol = 1e-12 * exact.abs().max(1e-300) + 1e-14;
                    assert!(
                        (got - exact).abs() <= tol.max(1e-12 * (1.0 + exact.abs())),
                        "l={l} m={m} x={x}: {got} vs {exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn errors() {
        assert!(legendre_assoc(2, 3, 0.0).is_err());
        assert!(legendre_assoc(2, 1, 1.5).is_err());
        assert!(ylm_radial(2, -3, 0.0).is_err());
        assert!(legendre_asymptotic_main(10, 0, 0.0).is_err());
        assert!(legendre_asymptotic_main(10, 0, PI).is_err());
        assert!(asymptotic_residual_scan(30, 20, 0, 0.3).is_err());
        assert!(asymptotic_residual_scan(2, 20, 2, 0.3).is_err());
        assert!(asymptotic_residual_scan(20, 30, 0, 1.7).is_err());
    }

    #[test]
    fn orthogonality_of_legendre() {
        let rule = GaussRule::new(40);
        for m in 0..=3i64 {
            for l in m..=15 {
                for lp in (l + 1)..=15 {
                    let v = rule.integrate(
                        |x| legendre_assoc(l, m, x).unwrap() * legendre_assoc(lp, m, x).unwrap(),
                        -1.0,
                        1.0,
                    );
                    let scale = rule.integrate(|x| legendre_assoc(lp, m, x).unwrap().powi(2), -1.0, 1.0);
                    assert!(v.abs() < 1e-10 * scale.max(1.0), "l={l} l'={lp} m={m}: {v}");
                }
            }
        }
    }

    #[test]
    fn normalization_up_to_l50() {
        let rule = GaussRule::new(120);
        for l in [0i64, 1, 7, 23, 50] {
            for m in [0, l / 3, l] {
                let v = 2.0 * PI * rule.integrate(|t| ylm_radial(l, m, t).unwrap().powi(2) * t.sin(), 0.0, PI);
                assert!((v - 1.0).abs() < 1e-9, "l={l} m={m}: {v}");
            }
        }
    }

    #[test]
    fn column_matches_log_space_route() {
        for m in [-3i64, 0, 2, 7] {
            for theta in [0.1, 0.9, PI / 2.0, 2.5] {
                let col = ylm_radial_column(m, 300, theta).unwrap();
                for (i, v) in col.iter().enumerate() {
                    let l = m.abs() + i as i64;
                    let direct = ylm_radial(l, m, theta).unwrap();
                    assert!(
                        (v - direct).abs() < 1e-10 * (1.0 + direct.abs()),
                        "l={l} m={m} θ={theta}: {v} vs {direct}"
                    );
                }
            }
        }
    }

    #[test]
    fn large_degree_does_not_overflow() {
        let v = ylm_radial(400, 400, PI / 2.0).unwrap();
        assert!(v.is_finite() && v.abs() > 0.0);
        let v = legendre_assoc(170, 85, 0.3).unwrap();
        assert!(v.is_finite());
    }

    #[test]
    fn highest_weight_concentrates_at_equator() {
        let eq = ylm_radial(20, 20, PI / 2.0).unwrap().abs();
        let off = ylm_radial(20, 20, PI / 4.0).unwrap().abs();
        assert!(off < 1e-2 * eq);
    }

    #[test]
    fn asymptotic_phase_shift() {
        for theta in [0.4, 1.1, 2.0] {
            let a = legendre_asymptotic_main(50, 1, theta).unwrap();
            let lf = 50.0;
            let b = (2.0 / (lf * PI * f64::sin(theta))).sqrt() * ((lf + 0.5) * theta - PI / 4.0 + PI / 2.0).cos();
            assert!((a - b).abs() < 1e-15);
        }
        let main = legendre_asymptotic_main(40, 0, PI / 2.0).unwrap();
        assert!((main - (2.0 / (40.0 * PI)).sqrt() * (40.5 * PI / 2.0 - PI / 4.0).cos()).abs() < 1e-15);
    }

    #[test]
    fn residual_shrinks_with_l() {
        let r = |l: i64| (legendre_assoc(l, 0, 0.0).unwrap() - legendre_asymptotic_main(l, 0, PI / 2.0).unwrap()).abs();
        assert!(r(100) < r(10));
    }

    #[test]
    fn parity() {
        for l in 0..12i64 {
            for m in 0..=l {
                for x in [0.1, 0.45, 0.8] {
                    let sign = if (l + m) % 2 == 0 { 1.0 } else { -1.0 };
                    let a = legendre_assoc(l, m, -x).unwrap();
                    let b = sign * legendre_assoc(l, m, x).unwrap();
                    assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
                }
            }
        }
    }
}
