//! Experiment configuration: one JSON document, optionally patched by
//! `key=value` overrides, validated before any work starts.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::geometry::{read_table_file, SurfaceSpec};
use crate::semiclassics::{admissible_exponents, CharacterFamily, TestFunction};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SurfaceConfig {
    RoundSphere,
    Ellipsoid {
        axis_ratio: f64,
    },
    /// `t,R,z` CSV; relative paths are resolved against the config file.
    Table {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    /// Closed form on the round sphere, numeric otherwise.
    Auto,
    ClosedForm,
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QlimitConfig {
    pub l_min: i64,
    pub l_max: i64,
}

impl Default for QlimitConfig {
    fn default() -> Self {
        Self { l_min: 20, l_max: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LegendreConfig {
    pub l_min: i64,
    pub l_max: i64,
    pub modes: Vec<i64>,
    pub epsilon: f64,
}

impl Default for LegendreConfig {
    fn default() -> Self {
        Self { l_min: 20, l_max: 200, modes: vec![0, 2], epsilon: 0.3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ZonalConfig {
    pub l_min: i64,
    pub l_max: i64,
    pub epsilons: Vec<f64>,
}

impl Default for ZonalConfig {
    fn default() -> Self {
        Self { l_min: 5, l_max: 40, epsilons: vec![0.5, 0.8] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowConfig {
    pub samples: usize,
    pub t_end: f64,
    pub dt: f64,
    /// Keep every n-th integrator step in trajectory exports.
    pub sample_every: usize,
    /// Time for the averaging/evolution commutation check.
    pub commutation_time: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self { samples: 4, t_end: 10.0, dt: 1e-3, sample_every: 100, commutation_time: 0.7 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PartitionConfig {
    /// `"sphere"` for `a_j = j(j+1)`, `"spectrum"` for the solved
    /// eigenvalues (zero dropped), or a path to a one-column CSV.
    pub sequence: String,
    pub length: usize,
}

impl Default for PartitionConfig {
    fn default() -> Self {
        Self { sequence: "sphere".into(), length: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub surface: SurfaceConfig,
    /// Intervals of the uniform θ grid.
    pub grid: usize,
    pub modes: Vec<i64>,
    pub pairs_per_mode: usize,
    /// Numeric solves stop at `|m| + k = l_cap`.
    pub l_cap: i64,
    pub c: f64,
    pub beta: f64,
    pub vartheta: f64,
    /// Fixed character set; when absent the growing family `|k| ≤ h^{-ϑ}`.
    pub family_members: Option<Vec<i64>>,
    pub h_list: Vec<f64>,
    /// `one`, `theta`, `cos`, `theta2`, or `table:<path>` (`theta,a` CSV).
    pub test_functions: Vec<String>,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub source: SourceKind,
    /// Grid intervals per degree for closed-form eigenpairs.
    pub nodes_per_degree: usize,
    pub qlimit: QlimitConfig,
    pub legendre: LegendreConfig,
    pub zonal: ZonalConfig,
    pub flow: FlowConfig,
    pub partition: PartitionConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            surface: SurfaceConfig::RoundSphere,
            grid: 2000,
            modes: vec![0, 1, 2],
            pairs_per_mode: 40,
            l_cap: 60,
            c: 1.0,
            beta: 1.0 / 6.0,
            vartheta: 0.0,
            family_members: Some(vec![0]),
            h_list: vec![1e-1, 1e-2, 1e-3],
            test_functions: vec!["theta".into(), "cos".into(), "theta2".into()],
            out_dir: PathBuf::from("out"),
            seed: 0,
            source: SourceKind::Auto,
            nodes_per_degree: 20,
            qlimit: QlimitConfig::default(),
            legendre: LegendreConfig::default(),
            zonal: ZonalConfig::default(),
            flow: FlowConfig::default(),
            partition: PartitionConfig::default(),
        }
    }
}

fn config_err(field: &str, reason: impl Into<String>) -> Error {
    Error::Config { field: field.to_string(), reason: reason.into() }
}

/// Sets `path` (dotted) in a JSON object to `raw`, parsed as JSON when it
/// parses and taken as a string otherwise.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) =
        assignment.split_once('=').ok_or_else(|| config_err(assignment, "override must look like key=value"))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = doc;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = node.as_object_mut().ok_or_else(|| config_err(key, "cannot descend into a non-object"))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    Err(config_err(key, "empty key"))
}

impl ExperimentConfig {
    /// Parses a JSON document after applying overrides, then validates.
    pub fn from_json(text: &str, overrides: &[String]) -> Result<Self> {
        let mut doc: Value = serde_json::from_str(text).map_err(|e| config_err("<document>", e.to_string()))?;
        if !doc.is_object() {
            return Err(config_err("<document>", "top level must be an object"));
        }
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let cfg: Self = serde_json::from_value(doc).map_err(|e| config_err("<document>", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads a config file; relative paths inside it become relative to
    /// the file's directory.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err("--config", format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text, overrides)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let SurfaceConfig::Table { path } = &mut cfg.surface {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
        for spec in &mut cfg.test_functions {
            if let Some(p) = spec.strip_prefix("table:") {
                if Path::new(p).is_relative() {
                    *spec = format!("table:{}", base.join(p).display());
                }
            }
        }
        if cfg.partition.sequence != "sphere" && cfg.partition.sequence != "spectrum" {
            let p = Path::new(&cfg.partition.sequence);
            if p.is_relative() {
                cfg.partition.sequence = base.join(p).display().to_string();
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if let SurfaceConfig::Ellipsoid { axis_ratio } = self.surface {
            if !(axis_ratio > 0.0 && axis_ratio.is_finite()) {
                return Err(config_err("surface.axis_ratio", format!("must be > 0, got {axis_ratio}")));
            }
        }
        if self.grid < crate::spectral::MIN_GRID {
            return Err(config_err("grid", format!("must be ≥ {}, got {}", crate::spectral::MIN_GRID, self.grid)));
        }
        if self.modes.is_empty() {
            return Err(config_err("modes", "must not be empty"));
        }
        if self.pairs_per_mode == 0 {
            return Err(config_err("pairs_per_mode", "must be ≥ 1"));
        }
        if self.l_cap < 0 {
            return Err(config_err("l_cap", "must be ≥ 0"));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(config_err("c", format!("must be > 0, got {}", self.c)));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(config_err("beta", format!("must be > 0, got {}", self.beta)));
        }
        if !(self.vartheta >= 0.0 && self.vartheta.is_finite()) {
            return Err(config_err("vartheta", format!("must be ≥ 0, got {}", self.vartheta)));
        }
        if let Some(members) = &self.family_members {
            if members.is_empty() {
                return Err(config_err("family_members", "must not be empty"));
            }
        }
        if self.h_list.is_empty() {
            return Err(config_err("h_list", "must not be empty"));
        }
        if let Some(h) = self.h_list.iter().find(|h| !(**h > 0.0 && **h <= 1.0)) {
            return Err(config_err("h_list", format!("entries must lie in (0, 1], got {h}")));
        }
        for spec in &self.test_functions {
            if !spec.starts_with("table:") {
                spec.parse::<TestFunction>().map_err(|e| config_err("test_functions", e.to_string()))?;
            }
        }
        if self.nodes_per_degree < 4 {
            return Err(config_err("nodes_per_degree", "must be ≥ 4"));
        }
        if !(0 <= self.qlimit.l_min && self.qlimit.l_min < self.qlimit.l_max) {
            return Err(config_err("qlimit", "need 0 ≤ l_min < l_max"));
        }
        if !(0 <= self.legendre.l_min && self.legendre.l_min < self.legendre.l_max) {
            return Err(config_err("legendre", "need 0 ≤ l_min < l_max"));
        }
        if !(self.legendre.epsilon > 0.0 && self.legendre.epsilon < std::f64::consts::FRAC_PI_2) {
            return Err(config_err("legendre.epsilon", "must lie in (0, π/2)"));
        }
        if !(0 <= self.zonal.l_min && self.zonal.l_min < self.zonal.l_max) {
            return Err(config_err("zonal", "need 0 ≤ l_min < l_max"));
        }
        if let Some(e) = self.zonal.epsilons.iter().find(|e| !(**e > 0.0 && **e < std::f64::consts::FRAC_PI_2)) {
            return Err(config_err("zonal.epsilons", format!("entries must lie in (0, π/2), got {e}")));
        }
        if !(self.flow.dt > 0.0) || !(self.flow.t_end > 0.0) || self.flow.sample_every == 0 {
            return Err(config_err("flow", "need dt > 0, t_end > 0 and sample_every ≥ 1"));
        }
        if self.partition.length == 0 {
            return Err(config_err("partition.length", "must be ≥ 1"));
        }
        Ok(())
    }

    /// Checks `ϑ < 1/5` and `0 < β ≤ (1 − 5ϑ)/6` for the QE experiments.
    ///
    /// The upper end is accepted because the pinned experiments use it.
    pub fn validate_exponents(&self) -> Result<()> {
        let vartheta = if self.family_members.is_some() { 0.0 } else { self.vartheta };
        let (_, hi) = admissible_exponents(vartheta).map_err(|e| config_err("vartheta", e.to_string()))?;
        if self.beta > hi * (1.0 + 1e-12) {
            return Err(config_err("beta", format!("must lie in (0, {hi}] for ϑ = {vartheta}, got {}", self.beta)));
        }
        Ok(())
    }

    pub fn family(&self) -> CharacterFamily {
        match &self.family_members {
            Some(m) => CharacterFamily::fixed(m.iter().copied()),
            None => CharacterFamily::growing(self.vartheta),
        }
    }

    pub fn surface_spec(&self) -> Result<SurfaceSpec> {
        Ok(match &self.surface {
            SurfaceConfig::RoundSphere => SurfaceSpec::round_sphere(self.grid),
            SurfaceConfig::Ellipsoid { axis_ratio } => SurfaceSpec::ellipsoid(*axis_ratio, self.grid),
            SurfaceConfig::Table { path } => SurfaceSpec::table(read_table_file(path)?, self.grid),
        })
    }

    pub fn test_functions(&self) -> Result<Vec<TestFunction>> {
        self.test_functions
            .iter()
            .map(|s| match s.strip_prefix("table:") {
                Some(p) => TestFunction::from_table_file(Path::new(p)),
                None => s.parse(),
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let cfg = ExperimentConfig::from_json("{}", &[]).unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        cfg.validate_exponents().unwrap();
    }

    #[test]
    fn overrides_patch_nested_keys() {
        let cfg = ExperimentConfig::from_json(
            r#"{"surface": {"kind": "ellipsoid", "axis_ratio": 2.0}}"#,
            &["grid=800".into(), "flow.dt=0.01".into(), "out_dir=results".into(), "surface.axis_ratio=1.5".into()],
        )
        .unwrap();
        assert_eq!(cfg.grid, 800);
        assert_eq!(cfg.flow.dt, 0.01);
        assert_eq!(cfg.out_dir, PathBuf::from("results"));
        assert_eq!(cfg.surface, SurfaceConfig::Ellipsoid { axis_ratio: 1.5 });
    }

    #[test]
    fn errors_name_the_field() {
        let msg = |json: &str| ExperimentConfig::from_json(json, &[]).unwrap_err().to_string();
        assert!(msg(r#"{"grid": 10}"#).contains("`grid`"));
        assert!(msg(r#"{"h_list": [2.0]}"#).contains("`h_list`"));
        assert!(msg(r#"{"test_functions": ["sin"]}"#).contains("`test_functions`"));
        assert!(msg(r#"{"surface": {"kind": "ellipsoid", "axis_ratio": -1}}"#).contains("axis_ratio"));
        assert!(msg(r#"{"gird": 100}"#).contains("gird"));
        let cfg = ExperimentConfig::from_json(r#"{"vartheta": 0.25, "family_members": null}"#, &[]).unwrap();
        assert!(cfg.validate_exponents().unwrap_err().to_string().contains("`vartheta`"));
        let cfg = ExperimentConfig::from_json(r#"{"beta": 0.3}"#, &[]).unwrap();
        assert!(cfg.validate_exponents().is_err());
        assert!(ExperimentConfig::from_json("{}", &["novalue".into()]).is_err());
    }
}
