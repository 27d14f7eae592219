//! Spectral windows `J(h)` and the spectra they are drawn from.

use rayon::prelude::*;
use serde::Serialize;

use super::partition::CharacterFamily;
use crate::error::{Error, Result};
use crate::geometry::{build_profile, ProfileCurve, SurfaceSpec};
use crate::spectral::{closed_form_sphere_range, flatten, flatten_order, EigenPair, ModeSpectrum, SpectrumEntry};

/// The index set `J(h) = {j : h²E_j ∈ [c, c + h^β], m_j ∈ W_h}`.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralWindow {
    pub c: f64,
    pub beta: f64,
    pub h: f64,
    /// `W_h` at this `h`.
    pub family: Vec<i64>,
    /// 0-based positions of the members in the flattened spectrum.
    pub indices: Vec<usize>,
    pub entries: Vec<SpectrumEntry>,
}

impl SpectralWindow {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Energy range `[c/h², (c + h^β)/h²]` of the window.
    pub fn energy_range(&self) -> (f64, f64) {
        energy_range(self.c, self.beta, self.h)
    }
}

fn energy_range(c: f64, beta: f64, h: f64) -> (f64, f64) {
    (c / (h * h), (c + h.powf(beta)) / (h * h))
}

fn in_window(e: f64, c: f64, beta: f64, h: f64) -> bool {
    let scaled = h * h * e;
    scaled >= c && scaled <= c + h.powf(beta)
}

fn check_window_args(c: f64, beta: f64, h: f64) -> Result<()> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::invalid("c", format!("must be > 0, got {c}")));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::invalid("beta", format!("must be > 0, got {beta}")));
    }
    if !(h > 0.0 && h <= 1.0) {
        return Err(Error::invalid("h", format!("must lie in (0, 1], got {h}")));
    }
    Ok(())
}

/// Enumerates `J(h)` over a spectrum already in flattened order.
pub fn spectral_window(
    spectrum: &[SpectrumEntry],
    c: f64,
    beta: f64,
    h: f64,
    family: &CharacterFamily,
) -> Result<SpectralWindow> {
    check_window_args(c, beta, h)?;
    family.validate()?;
    let (indices, entries) = spectrum
        .iter()
        .enumerate()
        .filter(|(_, e)| in_window(e.energy, c, beta, h) && family.contains(h, e.m))
        .map(|(i, e)| (i, *e))
        .unzip();
    Ok(SpectralWindow { c, beta, h, family: family.members(h), indices, entries })
}

/// Where eigenpairs come from: spherical harmonics on the round sphere, or
/// numerically solved modes on any profile.
#[derive(Debug, Clone)]
pub enum SpectrumSource {
    ClosedFormSphere {
        curve: ProfileCurve,
        /// Grid intervals per unit of the largest degree needed.
        nodes_per_degree: usize,
    },
    Numeric {
        curve: ProfileCurve,
        spectra: Vec<ModeSpectrum>,
    },
}

impl SpectrumSource {
    pub fn closed_form_sphere(nodes_per_degree: usize) -> Result<Self> {
        if nodes_per_degree < 4 {
            return Err(Error::invalid("nodes_per_degree", format!("must be ≥ 4, got {nodes_per_degree}")));
        }
        Ok(SpectrumSource::ClosedFormSphere {
            curve: build_profile(&SurfaceSpec::round_sphere(4096))?,
            nodes_per_degree,
        })
    }

    pub fn numeric(curve: ProfileCurve, spectra: Vec<ModeSpectrum>) -> Self {
        SpectrumSource::Numeric { curve, spectra }
    }

    /// Profile used for targets and reference volumes.
    pub fn curve(&self) -> &ProfileCurve {
        match self {
            SpectrumSource::ClosedFormSphere { curve, .. } | SpectrumSource::Numeric { curve, .. } => curve,
        }
    }

    /// Flattened spectrum of the modes in `family` up to energy `e_max`.
    ///
    /// Numeric spectra must reach past `e_max` in every requested mode,
    /// otherwise the window could silently miss eigenvalues.
    pub fn entries(&self, family: &[i64], e_max: f64) -> Result<Vec<SpectrumEntry>> {
        let mut out = match self {
            SpectrumSource::ClosedFormSphere { .. } => {
                let l_top = top_degree(e_max);
                family
                    .iter()
                    .flat_map(|&m| {
                        (m.abs()..=l_top.max(m.abs() - 1)).map(move |l| SpectrumEntry {
                            m,
                            k: (l - m.abs()) as usize,
                            l_label: Some(l),
                            energy: (l * (l + 1)) as f64,
                        })
                    })
                    .collect::<Vec<_>>()
            }
            SpectrumSource::Numeric { spectra, .. } => {
                for &m in family {
                    let spec = spectra
                        .iter()
                        .find(|s| s.m == m)
                        .ok_or_else(|| Error::Resolution(format!("mode m = {m} was not solved")))?;
                    let top = spec.pairs.last().map_or(f64::NEG_INFINITY, |p| p.energy);
                    if top <= e_max {
                        return Err(Error::Resolution(format!(
                            "mode m = {m} reaches E = {top}, window needs E > {e_max}; solve more pairs"
                        )));
                    }
                }
                let chosen: Vec<ModeSpectrum> = spectra.iter().filter(|s| family.contains(&s.m)).cloned().collect();
                flatten(&chosen).into_iter().filter(|e| e.energy <= e_max).collect()
            }
        };
        out.sort_by(flatten_order);
        Ok(out)
    }

    /// `J(h)` over this source, with the spectrum cut just above the window.
    pub fn window(&self, c: f64, beta: f64, h: f64, family: &CharacterFamily) -> Result<SpectralWindow> {
        check_window_args(c, beta, h)?;
        family.validate()?;
        let (_, top) = energy_range(c, beta, h);
        let entries = self.entries(&family.members(h), top * (1.0 + 1e-9))?;
        spectral_window(&entries, c, beta, h, family)
    }

    /// Eigenpairs of the window members, in window order.
    pub fn pairs(&self, window: &SpectralWindow) -> Result<Vec<EigenPair>> {
        match self {
            SpectrumSource::ClosedFormSphere { nodes_per_degree, .. } => {
                let Some(l_max) = window.entries.iter().filter_map(|e| e.l_label).max() else {
                    return Ok(Vec::new());
                };
                let l_min = window.entries.iter().filter_map(|e| e.l_label).min().unwrap();
                let n = (nodes_per_degree * (l_max as usize + 1)).max(256).next_multiple_of(2);
                let grid = build_profile(&SurfaceSpec::round_sphere(n))?;
                let mut modes: Vec<i64> = window.entries.iter().map(|e| e.m).collect();
                modes.sort_unstable();
                modes.dedup();
                let columns: Vec<(i64, Vec<EigenPair>)> = modes
                    .par_iter()
                    .map(|&m| Ok((m, closed_form_sphere_range(m, l_min, l_max, &grid)?)))
                    .collect::<Result<_>>()?;
                window
                    .entries
                    .iter()
                    .map(|e| {
                        let (_, pairs) = columns.iter().find(|(m, _)| *m == e.m).unwrap();
                        let l = e.l_label.unwrap();
                        Ok(pairs.iter().find(|p| p.l_label == Some(l)).unwrap().clone())
                    })
                    .collect()
            }
            SpectrumSource::Numeric { spectra, .. } => {
                window
                    .entries
                    .iter()
                    .map(|e| {
                        spectra.iter().find(|s| s.m == e.m).and_then(|s| s.pairs.get(e.k)).cloned().ok_or_else(|| {
                            Error::Resolution(format!("pair (m = {}, k = {}) is not available", e.m, e.k))
                        })
                    })
                    .collect()
            }
        }
    }
}

/// Largest `l` with `l(l + 1) ≤ e`.
fn top_degree(e: f64) -> i64 {
    if e < 0.0 {
        return -1;
    }
    let mut l = ((e + 0.25).sqrt() - 0.5).floor() as i64;
    while ((l + 1) * (l + 2)) as f64 <= e {
        l += 1;
    }
    while l >= 0 && (l * (l + 1)) as f64 > e {
        l -= 1;
    }
    l
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(w: &SpectralWindow) -> Vec<(i64, i64)> {
        w.entries.iter().map(|e| (e.l_label.unwrap(), e.m)).collect()
    }

    #[test]
    fn sphere_window_examples() {
        let src = SpectrumSource::closed_form_sphere(8).unwrap();
        let w = src.window(1.0, 1.0 / 6.0, 0.1, &CharacterFamily::fixed([0])).unwrap();
        assert_eq!(labels(&w), [(10, 0), (11, 0), (12, 0)]);
        let w = src.window(1.0, 1.0 / 6.0, 0.1, &CharacterFamily::fixed([-1, 0, 1])).unwrap();
        assert_eq!(w.len(), 9);
        // ties at equal energy: |m| first, then negative before positive
        assert_eq!(labels(&w)[..3], [(10, 0), (10, -1), (10, 1)]);
        let w = src.window(1.0, 1.0 / 6.0, 0.01, &CharacterFamily::fixed([0])).unwrap();
        assert_eq!(w.len(), 21);
        assert_eq!(w.entries[0].l_label, Some(100));
        assert_eq!(w.entries[20].l_label, Some(120));
    }

    #[test]
    fn window_below_the_spectrum_is_empty() {
        let spectrum = [SpectrumEntry { m: 0, k: 0, l_label: None, energy: 50.0 }];
        let w = spectral_window(&spectrum, 1.0, 0.1, 0.5, &CharacterFamily::fixed([0])).unwrap();
        assert!(w.is_empty());
    }

    #[test]
    fn closed_form_pairs_follow_the_window() {
        let src = SpectrumSource::closed_form_sphere(8).unwrap();
        let w = src.window(1.0, 1.0 / 6.0, 0.1, &CharacterFamily::fixed([-1, 0, 1])).unwrap();
        let pairs = src.pairs(&w).unwrap();
        for (p, e) in pairs.iter().zip(&w.entries) {
            assert_eq!((p.m, p.l_label), (e.m, e.l_label));
            p.check_normalized().unwrap();
        }
    }

    #[test]
    fn degree_inversion() {
        assert_eq!(top_degree(0.0), 0);
        assert_eq!(top_degree(1.9), 0);
        assert_eq!(top_degree(2.0), 1);
        assert_eq!(top_degree(14642.0), 120);
        assert_eq!(top_degree(-1.0), -1);
    }
}
