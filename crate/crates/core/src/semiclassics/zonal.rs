//! Concentration of the highest-weight harmonics `Y_{l,l}` at the equator.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::{semi_log_fit, LineFit};
use crate::quad::GaussRule;
use crate::specfun::ylm_radial;

const PANELS: usize = 64;

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < FRAC_PI_2) {
        return Err(Error::OutOfRange { coordinate: "epsilon", value: epsilon, lo: 0.0, hi: FRAC_PI_2 });
    }
    Ok(())
}

/// Mass of `|Y_{l,l}|²` outside the band `|θ − π/2| ≤ ε`.
pub fn zonal_mass(l: i64, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    if l < 0 {
        return Err(Error::invalid("l", format!("must be ≥ 0, got {l}")));
    }
    let rule = GaussRule::new(20);
    let density = |t: f64| {
        let y = ylm_radial(l, l, t).expect("l ≥ 0 and m = l");
        2.0 * PI * y * y * t.sin()
    };
    let piece = |a: f64, b: f64| -> f64 {
        let w = (b - a) / PANELS as f64;
        (0..PANELS).map(|k| rule.integrate(density, a + k as f64 * w, a + (k + 1) as f64 * w)).sum()
    };
    Ok(piece(0.0, FRAC_PI_2 - epsilon) + piece(FRAC_PI_2 + epsilon, PI))
}

#[derive(Debug, Clone, Serialize)]
pub struct ZonalReport {
    pub epsilon: f64,
    pub masses: Vec<(i64, f64)>,
    /// Fit of `log mass` against `l`.
    pub fit: LineFit,
    /// Decay rate `c(ε) = −slope`.
    pub decay_rate: f64,
}

impl ZonalReport {
    /// Writes `l,zonal_mass` rows.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["l", "zonal_mass"])?;
        for (l, m) in &self.masses {
            w.write_record([l.to_string(), m.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn zonal_report(l_min: i64, l_max: i64, epsilon: f64) -> Result<ZonalReport> {
    if l_min < 0 || l_max <= l_min {
        return Err(Error::invalid("l range", format!("need 0 ≤ l_min < l_max, got [{l_min}, {l_max}]")));
    }
    let masses = (l_min..=l_max).map(|l| Ok((l, zonal_mass(l, epsilon)?))).collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = masses.iter().map(|(l, _)| *l as f64).collect();
    let ys: Vec<f64> = masses.iter().map(|(_, m)| *m).collect();
    let fit = semi_log_fit(&xs, &ys)?;
    Ok(ZonalReport { epsilon, masses, fit, decay_rate: -fit.slope })
}
