//! Subcommand runners behind the `revqe` binary.
//!
//! Every subcommand writes CSV series and a `<name>_summary.json` into the
//! output directory. Summaries embed the resolved configuration and contain
//! no timestamps, so identical configurations give identical files.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, SourceKind};
use crate::dynamics::{
    birkhoff_average, check_evolvred, integrate_with, reduce, reduced_flow, reduced_period, sample_states,
    space_average_reduced_shell, IntegratorConfig, PhaseState,
};
use crate::error::{Error, Result};
use crate::geometry::{build_profile, ProfileCurve, SurfaceSpec};
use crate::semiclassics::{
    limit_target, partition, qe_stat_point, quantum_limit, weyl_statistic, zonal_report, SpectrumSource, TestFunction,
};
use crate::specfun::asymptotic_residual_scan;
use crate::spectral::{closed_form_sphere_range, flatten, solve_modes, write_spectrum_csv, ModeSpectrum};
use crate::verify::{run_all, VerifyOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Spectrum,
    Qlimit,
    Partition,
    Window,
    QeStat,
    Weyl,
    Legendre,
    Zonal,
    Flow,
    Verify,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Spectrum => "spectrum",
            Subcommand::Qlimit => "qlimit",
            Subcommand::Partition => "partition",
            Subcommand::Window => "window",
            Subcommand::QeStat => "qe-stat",
            Subcommand::Weyl => "weyl",
            Subcommand::Legendre => "legendre",
            Subcommand::Zonal => "zonal",
            Subcommand::Flow => "flow",
            Subcommand::Verify => "verify",
        }
    }
}

/// What a run produced.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    /// Set by `verify` when any acceptance check failed.
    pub acceptance_failed: bool,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_ACCEPTANCE: i32 = 3;

pub fn exit_code(result: &Result<RunOutcome>) -> i32 {
    match result {
        Ok(o) if o.acceptance_failed => EXIT_ACCEPTANCE,
        Ok(_) => EXIT_OK,
        Err(e) if e.is_validation() => EXIT_VALIDATION,
        Err(_) => EXIT_NUMERICAL,
    }
}

struct Output<'a> {
    dir: &'a Path,
    config: &'a ExperimentConfig,
    files: Vec<PathBuf>,
}

impl<'a> Output<'a> {
    fn new(dir: &'a Path, config: &'a ExperimentConfig) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir, config, files: Vec::new() })
    }

    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        self.files.push(path.clone());
        Ok(BufWriter::new(File::create(path)?))
    }

    fn csv(&mut self, name: &str, write: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
        let mut f = self.create(name)?;
        write(&mut f)?;
        f.flush()?;
        Ok(())
    }

    fn summary(&mut self, cmd: Subcommand, results: impl Serialize) -> Result<()> {
        let doc = json!({ "subcommand": cmd.name(), "config": self.config, "results": results });
        let mut f = self.create(&format!("{}_summary.json", cmd.name().replace('-', "_")))?;
        serde_json::to_writer_pretty(&mut f, &doc)?;
        f.write_all(b"\n")?;
        f.flush()?;
        Ok(())
    }

    fn finish(self, acceptance_failed: bool) -> RunOutcome {
        RunOutcome { files: self.files, acceptance_failed }
    }
}

/// Runs `cmd`, writing into `out_dir` (or the configured directory).
pub fn run(cmd: Subcommand, config: &ExperimentConfig, out_dir: Option<&Path>) -> Result<RunOutcome> {
    config.validate()?;
    let dir = out_dir.unwrap_or(&config.out_dir);
    let mut out = Output::new(dir, config)?;
    let mut failed = false;
    match cmd {
        Subcommand::Spectrum => spectrum(config, &mut out)?,
        Subcommand::Qlimit => qlimit(config, &mut out)?,
        Subcommand::Partition => partition_cmd(config, &mut out)?,
        Subcommand::Window => window(config, &mut out)?,
        Subcommand::QeStat => qe_stat(config, &mut out)?,
        Subcommand::Weyl => weyl(config, &mut out)?,
        Subcommand::Legendre => legendre(config, &mut out)?,
        Subcommand::Zonal => zonal(config, &mut out)?,
        Subcommand::Flow => flow(config, &mut out)?,
        Subcommand::Verify => failed = verify(config, &mut out)?,
    }
    Ok(out.finish(failed))
}

fn file_tag(tf: &TestFunction) -> String {
    tf.name().chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect()
}

fn numeric_spectra(cfg: &ExperimentConfig, curve: &ProfileCurve, modes: &[i64]) -> Result<Vec<ModeSpectrum>> {
    let highest = modes.iter().map(|m| m.abs()).max().unwrap_or(0);
    if highest > cfg.l_cap {
        return Err(Error::Config {
            field: "l_cap".into(),
            reason: format!("mode {highest} exceeds the cap {}", cfg.l_cap),
        });
    }
    let mut spectra = Vec::with_capacity(modes.len());
    for &m in modes {
        let count = cfg.pairs_per_mode.min((cfg.l_cap - m.abs() + 1) as usize);
        spectra.extend(solve_modes(curve, &[m], cfg.grid, count)?);
    }
    Ok(spectra)
}

fn use_closed_form(cfg: &ExperimentConfig, curve: &ProfileCurve) -> Result<bool> {
    match cfg.source {
        SourceKind::Auto => Ok(curve.is_round_sphere()),
        SourceKind::Numeric => Ok(false),
        SourceKind::ClosedForm if curve.is_round_sphere() => Ok(true),
        SourceKind::ClosedForm => {
            Err(Error::Config { field: "source".into(), reason: "closed-form eigenpairs need the round sphere".into() })
        }
    }
}

/// Spectrum source covering every mode the family takes over the schedule.
fn spectrum_source(cfg: &ExperimentConfig, curve: &ProfileCurve) -> Result<SpectrumSource> {
    if use_closed_form(cfg, curve)? {
        return SpectrumSource::closed_form_sphere(cfg.nodes_per_degree);
    }
    let family = cfg.family();
    let mut modes: Vec<i64> = cfg.h_list.iter().flat_map(|&h| family.members(h)).collect();
    modes.sort_unstable();
    modes.dedup();
    Ok(SpectrumSource::numeric(curve.clone(), numeric_spectra(cfg, curve, &modes)?))
}

fn spectrum(cfg: &ExperimentConfig, out: &mut Output) -> Result<()> {
    let curve = build_profile(&cfg.surface_spec()?)?;
    let spectra = numeric_spectra(cfg, &curve, &cfg.modes)?;
    out.csv("profile.csv", |w| curve.write_csv(w))?;
    let entries = flatten(&spectra);
    out.csv("spectrum.csv", |w| write_spectrum_csv(&entries, w))?;
    let mut modes = Vec::new();
    for s in &spectra {
        for p in &s.pairs {
            out.csv(&format!("eigenfunctions/m{}_k{}.csv", s.m, p.k), |w| p.write_csv(w))?;
        }
        let label_error = s
            .pairs
            .iter()
            .filter_map(|p| p.l_label.map(|l| (p.energy, (l * (l + 1)) as f64)))
            .filter(|(_, exact)| *exact > 0.0)
            .fold(None, |acc: Option<f64>, (e, exact)| Some(acc.unwrap_or(0.0).max((e / exact - 1.0).abs())));
        modes.push(json!({
            "m": s.m,
            "pairs": s.pairs.len(),
            "gram_deviation": s.gram_deviation(),
            "max_relative_error_vs_l_l_plus_1": label_error,
        }));
    }
    out.summary(Subcommand::Spectrum, json!({ "length": curve.length(), "area": curve.area(), "modes": modes }))
}

fn qlimit(cfg: &ExperimentConfig, out: &mut Output) -> Result<()> {
    let curve = build_profile(&cfg.surface_spec()?)?;
    let closed = use_closed_form(cfg, &curve)?;
    let pairs = if closed {
        let n = (cfg.nodes_per_degree * (cfg.qlimit.l_max as usize + 1)).next_multiple_of(2);
        let grid = build_profile(&SurfaceSpec::round_sphere(n))?;
        let mut all = Vec::new();
        for &m in &cfg.modes {
            all.extend(closed_form_sphere_range(m, cfg.qlimit.l_min, cfg.qlimit.l_max, &grid)?);
        }
        all
    } else {
        numeric_spectra(cfg, &curve, &cfg.modes)?.into_iter().flat_map(|s| s.pairs).collect()
    };
    let mut results = Vec::new();
    for tf in cfg.test_functions()? {
        let report = quantum_limit(&curve, &pairs, &tf)?;
        let mut per_mode = Vec::new();
        for &m in &cfg.modes {
            out.csv(&format!("qlimit_{}_m{m}.csv", file_tag(&tf)), |w| report.write_csv(m, w))?;
            let freq: Vec<f64> = report.entries.iter().filter(|e| e.m == m).map(|e| e.frequency()).collect();
            let (lo, hi) = freq.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
            let subset = crate::semiclassics::QuantumLimitReport {
                entries: report.entries.iter().filter(|e| e.m == m).copied().collect(),
                ..report.clone()
            };
            per_mode.push(json!({
                "m": m,
                "max_deviation": subset.max_deviation(),
                "fit": subset.fit_over(lo, hi).ok(),
            }));
        }
        results.push(json!({
            "test_function": tf.name(),
            "target": report.target,
            "max_deviation": report.max_deviation(),
            "modes": per_mode,
        }));
    }
    out.summary(
        Subcommand::Qlimit,
        json!({ "source": if closed { "closed_form" } else { "numeric" }, "test_functions": results }),
    )
}

fn partition_sequence(cfg: &ExperimentConfig) -> Result<Vec<f64>> {
    let n = cfg.partition.length;
    match cfg.partition.sequence.as_str() {
        "sphere" => Ok((1..=n).map(|j| (j * (j + 1)) as f64).collect()),
        "spectrum" => {
            let curve = build_profile(&cfg.surface_spec()?)?;
            let spectra = numeric_spectra(cfg, &curve, &cfg.modes)?;
            Ok(flatten(&spectra).into_iter().map(|e| e.energy).filter(|&e| e > 1e-9).take(n).collect())
        }
        path => {
            let mut rdr = csv::Reader::from_path(path)
                .map_err(|e| Error::Config { field: "partition.sequence".into(), reason: e.to_string() })?;
            let mut values = Vec::new();
            for row in rdr.records() {
                let row = row?;
                let v: f64 = row.get(0).unwrap_or("").trim().parse().map_err(|_| Error::Config {
                    field: "partition.sequence".into(),
                    reason: format!("non-numeric entry `{}`", row.get(0).unwrap_or("")),
                })?;
                values.push(v);
            }
            values.truncate(n);
            Ok(values)
        }
    }
}

fn partition_cmd(cfg: &ExperimentConfig, out: &mut Output) -> Result<()> {
    let a = partition_sequence(cfg)?;
    let part = partition(&a, cfg.beta)?;
    out.csv("partition.csv", |w| {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["j", "a", "P"])?;
        for (i, (v, p)) in a.iter().zip(&part.p).enumerate() {
            w.write_record([(i + 1).to_string(), v.to_string(), p.to_string()])?;
        }
        w.flush()?;
        Ok(())
    })?;
    out.csv("partition_jk.txt", |w| {
        let line: Vec<String> = part.jk.iter().map(|j| j.to_string()).collect();
        writeln!(w, "{}", line.join(","))?;
        Ok(())
    })?;
    out.summary(
        Subcommand::Partition,
        json!({ "beta": part.beta, "jk": part.jk, "bracket_holds": part.bracket_holds(&a), "length": a.len() }),
    )
}

fn window(cfg: &ExperimentConfig, out: &mut Output) -> Result<()> {
    cfg.validate_exponents()?;
    let curve = build_profile(&cfg.surface_spec()?)?;
    let source = spectrum_source(cfg, &curve)?;
    let family = cfg.family();
    let tf = cfg.test_functions()?.into_iter().next().unwrap_or(TestFunction::Theta);
    let mut results = Vec::new();
    for (i, &h) in cfg.h_list.iter().enumerate() {
        let (point, win) = qe_stat_point(&source, &tf, cfg.c, cfg.beta, &family, h)?;
        out.csv(&format!("window_h{i}.csv"), |w| {
            let mut w = csv::Writer::from_writer(w);
            w.write_record(["j", "m", "k", "l_label", "E", "in_lambda"])?;
            for (pos, (j, e)) in win.indices.iter().zip(&win.entries).enumerate() {
                w.write_record([
                    j.to_string(),
                    e.m.to_string(),
                    e.k.to_string(),
                    e.l_label.map(|l| l.to_string()).unwrap_or_default(),
                    e.energy.to_string(),
                    point.selection.lambda.binary_search(&pos).is_ok().to_string(),
                ])?;
            }
            w.flush()?;
            Ok(())
        })?;
        let (lo, hi) = win.energy_range();
        results.push(json!({
            "h": h,
            "energy_range": [lo, hi],
            "family": win.family,
            "window_size": win.len(),
            "lambda_size": point.selection.lambda.len(),
            "gamma_size": point.selection.gamma.len(),
            "threshold": point.selection.threshold,
            "density_ratio": point.selection.density_ratio,
        }));
    }
    out.summary(Subcommand::Window, json!({ "test_function": tf.name(), "windows": results }))
}

fn qe_stat(cfg: &ExperimentConfig, out: &mut Output) -> Result<()> {
    cfg.validate_exponents()?;
    let curve = build_profile(&cfg.surface_spec()?)?;
    let source = spectrum_source(cfg, &curve)?;
    let family = cfg.family();
    let weyl: Vec<_> =
        cfg.h_list.iter().map(|&h| weyl_statistic(&source, cfg.c, cfg.beta, &family, h)).collect::<Result<_>>()?;
    let mut results = Vec::new();
    for tf in cfg.test_functions()? {
        let points = cfg
            .h_list
            .iter()
            .map(|&h| Ok(qe_stat_point(&source, &tf, cfg.c, cfg.beta, &family, h)?.0))
            .collect::<Result<Vec<_>>>()?;
        out.csv(&format!("qe_stat_{}.csv", file_tag(&tf)), |w| {
            let mut w = csv::Writer::from_writer(w);
            w.write_record(["h", "S", "weyl_stat", "ref_volume"])?;
            for (p, wp) in points.iter().zip(&weyl) {
                w.write_record([
                    p.h.to_string(),
                    p.statistic.to_string(),
                    wp.statistic.to_string(),
                    wp.reference_volume.to_string(),
                ])?;
            }
            w.flush()?;
            Ok(())
        })?;
        results.push(json!({ "test_function": tf.name(), "points": points }));
    }
    out.summary(Subcommand::QeStat, json!({ "series": results, "weyl": weyl }))
}

fn weyl(cfg: &ExperimentConfig, out: &mut Output) -> Result<()> {
    cfg.validate_exponents()?;
    let curve = build_profile(&cfg.surface_spec()?)?;
    let source = spectrum_source(cfg, &curve)?;
    let family = cfg.family();
    let points: Vec<_> =
        cfg.h_list.iter().map(|&h| weyl_statistic(&source, cfg.c, cfg.beta, &family, h)).collect::<Result<_>>()?;
    out.csv("weyl.csv", |w| {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["h", "window_size", "family_size", "weyl_stat", "ref_volume", "ratio"])?;
        for p in &points {
            w.write_record([
                p.h.to_string(),
                p.window_size.to_string(),
                p.family_size.to_string(),
                p.statistic.to_string(),
                p.reference_volume.to_string(),
                p.ratio.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    })?;
    out.summary(Subcommand::Weyl, json!({ "points": points }))
}

fn legendre(cfg: &ExperimentConfig, out: &mut Output) -> Result<()> {
    let lc = &cfg.legendre;
    let mut results = Vec::new();
    for &m in &lc.modes {
        let report = asymptotic_residual_scan(lc.l_min, lc.l_max, m, lc.epsilon)?;
        out.csv(&format!("legendre_m{m}.csv"), |w| report.write_csv(w))?;
        results.push(json!({ "m": m, "fit": report.summary_json() }));
    }
    out.summary(Subcommand::Legendre, json!({ "epsilon": lc.epsilon, "modes": results }))
}

fn zonal(cfg: &ExperimentConfig, out: &mut Output) -> Result<()> {
    let zc = &cfg.zonal;
    let mut results = Vec::new();
    for (i, &eps) in zc.epsilons.iter().enumerate() {
        let report = zonal_report(zc.l_min, zc.l_max, eps)?;
        out.csv(&format!("zonal_eps{i}.csv"), |w| report.write_csv(w))?;
        results.push(json!({ "epsilon": eps, "fit": report.fit, "decay_rate": report.decay_rate }));
    }
    out.summary(Subcommand::Zonal, json!({ "bands": results }))
}

fn flow(cfg: &ExperimentConfig, out: &mut Output) -> Result<()> {
    let fc = &cfg.flow;
    let curve = build_profile(&cfg.surface_spec()?)?;
    let mut icfg = IntegratorConfig::new(fc.dt);
    icfg.sample_every = fc.sample_every;
    let states = sample_states(&curve, fc.samples, cfg.seed, false);
    let mut trajectories = Vec::new();
    for (i, s0) in states.iter().enumerate() {
        let rep = integrate_with(&curve, s0, fc.t_end, &icfg)?;
        out.csv(&format!("trajectory_{i}.csv"), |w| rep.write_csv(w))?;
        trajectories.push(json!({
            "start": s0,
            "energy_drift": rep.energy_drift,
            "p_phi_drift": rep.p_phi_drift,
            "steps": rep.steps,
        }));
    }

    let meridian = sample_states(&curve, 1, cfg.seed, true)[0];
    let r0 = reduce(&meridian)?;
    let c = r0.p_theta * r0.p_theta;
    let reduced = reduced_flow(&curve, &r0, fc.t_end, 1000)?;
    out.csv("reduced_trajectory.csv", |w| reduced.write_csv(w))?;

    let shell_r0 = crate::dynamics::ReducedState::new(r0.theta, cfg.c.sqrt());
    let period = reduced_period(&curve, cfg.c)?;
    let mut averages = Vec::new();
    for tf in cfg.test_functions()? {
        let f = |t: f64, _: f64| tf.eval(t);
        let birkhoff = birkhoff_average(&curve, &f, &shell_r0, period)?;
        let shell = space_average_reduced_shell(&curve, &f, cfg.c)?;
        let limit = limit_target(&curve, &|t| tf.eval(t));
        averages.push((tf.name().to_string(), birkhoff, shell.mean, limit));
    }
    out.csv("flow_averages.csv", |w| {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["function", "birkhoff", "shell", "limit"])?;
        for (name, b, s, l) in &averages {
            w.write_record([name.clone(), b.to_string(), s.to_string(), l.to_string()])?;
        }
        w.flush()?;
        Ok(())
    })?;

    let a = |s: &PhaseState| s.phi.cos() * (1.0 + s.theta * s.theta);
    let commutation = check_evolvred(&curve, &a, fc.commutation_time, &states, &IntegratorConfig::new(fc.dt), 16)?;
    out.summary(
        Subcommand::Flow,
        json!({
            "trajectories": trajectories,
            "reduced": { "c": c, "period": reduced.period, "pole_hits": reduced.pole_hits.len(), "both_branches": reduced.visits_both_branches() },
            "shell_volume": space_average_reduced_shell(&curve, &|_, _| 1.0, cfg.c)?.volume,
            "averages": averages.iter().map(|(n, b, s, l)| json!({ "function": n, "birkhoff": b, "shell": s, "limit": l })).collect::<Vec<Value>>(),
            "commutation_discrepancy": commutation,
        }),
    )
}

fn verify(cfg: &ExperimentConfig, out: &mut Output) -> Result<bool> {
    let checks = run_all(&VerifyOptions { seed: cfg.seed });
    let passed = checks.iter().all(|c| c.passed);
    out.csv("verify.txt", |w| {
        for c in &checks {
            writeln!(w, "{}", c.line())?;
        }
        Ok(())
    })?;
    out.summary(Subcommand::Verify, json!({ "passed": passed, "checks": checks }))?;
    Ok(!passed)
}
