//! Line-oriented `key = value` configuration.
//!
//! ```text
//! # comment
//! [physics]
//! g = 266
//! [pulse]
//! cutoff_half_width = 10
//! ```
//!
//! Section headers are optional: every key has exactly one home section and
//! may also appear before any header. Lists are comma separated. Unset keys
//! take defaults that depend on the run mode; [`SimulationConfig::to_text`]
//! writes every key explicitly, so the resolved text re-parses to the same
//! configuration.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use fastlight_core::analytic::sf_delay_mean;
use fastlight_core::ensemble::PhaseMode;
use fastlight_core::quadrature::{QuadratureScheme, DEFAULT_DETUNING_NODES};
use fastlight_core::solver::GridOptions;
use fastlight_core::{MediumSpec, PhysicalParams, PulseSpec, SPEED_OF_LIGHT};

use crate::error::CliError;

/// Every recognized key with its section.
pub const KEYS: &[(&str, &str)] = &[
    ("run", "mode"),
    ("run", "figure"),
    ("run", "seed"),
    ("run", "velocity"),
    ("physics", "g"),
    ("physics", "t2_star"),
    ("physics", "tau"),
    ("physics", "density"),
    ("physics", "wavelength"),
    ("medium", "x0"),
    ("medium", "length"),
    ("pulse", "shape"),
    ("pulse", "peak_time"),
    ("pulse", "cutoff_half_width"),
    ("pulse", "amplitude"),
    ("grid", "dx"),
    ("grid", "dt"),
    ("grid", "detuning_nodes"),
    ("grid", "quadrature"),
    ("grid", "span_sigmas"),
    ("grid", "t_min"),
    ("grid", "t_max"),
    ("grid", "allow_unresolved"),
    ("sf", "seeding"),
    ("sf", "phase"),
    ("sf", "lengths"),
    ("sf", "runs"),
    ("sf", "window_factor"),
    ("output", "out"),
    ("output", "snapshot_times"),
    ("output", "snapshot_x_min"),
    ("output", "snapshot_x_max"),
    ("output", "snapshot_points"),
    ("output", "probes"),
    ("output", "plot_scripts"),
];

pub const FIGURES: &[u8] = &[2, 4, 5, 6, 7, 8];

fn section_of(key: &str) -> Option<&'static str> {
    KEYS.iter().find(|(_, k)| *k == key).map(|(s, _)| *s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Analytic,
    Propagate,
    Sf,
    Sweep,
    Fig,
}

impl Mode {
    pub fn parse(s: &str) -> Option<Mode> {
        Some(match s {
            "analytic" => Mode::Analytic,
            "propagate" => Mode::Propagate,
            "sf" => Mode::Sf,
            "sweep" => Mode::Sweep,
            "fig" => Mode::Fig,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Analytic => "analytic",
            Mode::Propagate => "propagate",
            Mode::Sf => "sf",
            Mode::Sweep => "sweep",
            Mode::Fig => "fig",
        }
    }
}

/// What a run actually computes once a figure recipe is expanded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Analytic,
    Propagate,
    Sf,
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Velocity {
    Limit,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Seeding {
    None,
    Tipping,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub mode: Mode,
    pub figure: Option<u8>,
    pub seed: u64,
    pub velocity: Velocity,
    pub params: PhysicalParams,
    /// Entrance face, cm.
    pub x0: f64,
    /// Medium length, cm.
    pub length: f64,
    pub pulse: Option<PulseSpec>,
    pub grid: GridOptions,
    /// Retarded-time window, ns; `None` picks a mode-dependent default.
    pub window: (Option<f64>, Option<f64>),
    pub seeding: Seeding,
    pub phase: PhaseMode,
    /// Sweep lengths, cm.
    pub lengths: Vec<f64>,
    pub runs: usize,
    pub window_factor: f64,
    pub out: PathBuf,
    /// Lab times of the snapshots, units of τ.
    pub snapshot_times: Vec<f64>,
    /// Snapshot x-range, units of cτ.
    pub snapshot_x: (f64, f64),
    pub snapshot_points: usize,
    /// Atom-history probe positions, cm.
    pub probes: Vec<f64>,
    pub plot_scripts: bool,
}

impl SimulationConfig {
    pub fn medium(&self) -> MediumSpec {
        MediumSpec { x0: self.x0, x1: self.x0 + self.length }
    }

    pub fn scenario(&self) -> Scenario {
        scenario(self.mode, self.figure)
    }

    /// Writes every key; the output re-parses to an identical config.
    pub fn to_text(&self) -> String {
        let mut entries: BTreeMap<&str, String> = BTreeMap::new();
        let p = &self.params;
        entries.insert("mode", self.mode.name().into());
        entries.insert("figure", self.figure.map_or("none".into(), |f| f.to_string()));
        entries.insert("seed", self.seed.to_string());
        entries.insert(
            "velocity",
            match self.velocity {
                Velocity::Limit => "limit",
                Velocity::Quadrature => "quadrature",
            }
            .into(),
        );
        entries.insert("g", num(p.g));
        entries.insert("t2_star", num(p.t2_star));
        entries.insert("tau", num(p.tau));
        entries.insert("density", num(p.density));
        entries.insert("wavelength", num(p.wavelength));
        entries.insert("x0", num(self.x0));
        entries.insert("length", num(self.length));
        match &self.pulse {
            None => {
                entries.insert("shape", "none".into());
            }
            Some(pulse) => {
                entries.insert("shape", "sech".into());
                entries.insert("peak_time", num(pulse.peak_time));
                entries.insert("cutoff_half_width", opt(pulse.cutoff_half_width));
                entries.insert("amplitude", num(pulse.peak_amplitude));
            }
        }
        entries.insert("dx", opt(self.grid.dx));
        entries.insert("dt", opt(self.grid.dt));
        entries.insert("detuning_nodes", self.grid.detuning_nodes.to_string());
        match self.grid.scheme {
            QuadratureScheme::GaussHermite => {
                entries.insert("quadrature", "gauss-hermite".into());
            }
            QuadratureScheme::UniformMidpoint { span_sigmas } => {
                entries.insert("quadrature", "uniform".into());
                entries.insert("span_sigmas", num(span_sigmas));
            }
        }
        entries.insert("t_min", opt(self.window.0));
        entries.insert("t_max", opt(self.window.1));
        entries.insert("allow_unresolved", self.grid.allow_unresolved.to_string());
        entries.insert(
            "seeding",
            match self.seeding {
                Seeding::None => "none",
                Seeding::Tipping => "tipping",
            }
            .into(),
        );
        entries.insert(
            "phase",
            match self.phase {
                PhaseMode::Binary => "binary",
                PhaseMode::Uniform => "uniform",
            }
            .into(),
        );
        entries.insert("lengths", list(&self.lengths));
        entries.insert("runs", self.runs.to_string());
        entries.insert("window_factor", num(self.window_factor));
        entries.insert("out", self.out.display().to_string());
        entries.insert("snapshot_times", list(&self.snapshot_times));
        entries.insert("snapshot_x_min", num(self.snapshot_x.0));
        entries.insert("snapshot_x_max", num(self.snapshot_x.1));
        entries.insert("snapshot_points", self.snapshot_points.to_string());
        entries.insert("probes", list(&self.probes));
        entries.insert("plot_scripts", self.plot_scripts.to_string());

        let mut text = String::new();
        let mut current = "";
        for (section, key) in KEYS {
            if let Some(value) = entries.get(key) {
                if *section != current {
                    if !text.is_empty() {
                        text.push('\n');
                    }
                    let _ = writeln!(text, "[{section}]");
                    current = section;
                }
                let _ = writeln!(text, "{key} = {value}");
            }
        }
        text
    }

    /// Checks every cross-field invariant; called by [`resolve`].
    pub fn validate(&self) -> Result<(), CliError> {
        let v = |e: fastlight_core::Error| CliError::Validation(e.to_string());
        self.params.validate().map_err(v)?;
        let medium = self.medium();
        medium.validate().map_err(v)?;
        if let Some(pulse) = &self.pulse {
            pulse.validate().map_err(v)?;
        }
        let fail = |msg: String| Err(CliError::Validation(msg));
        if self.mode == Mode::Fig && self.figure.is_none() {
            return fail("mode = fig requires figure to be one of 2, 4, 5, 6, 7, 8".into());
        }
        if self.mode != Mode::Fig && self.figure.is_some() {
            return fail(format!("figure is only meaningful with mode = fig (mode = {})", self.mode.name()));
        }
        match self.scenario() {
            Scenario::Analytic => {
                let Some(pulse) = &self.pulse else {
                    return fail("analytic mode needs shape = sech".into());
                };
                if pulse.cutoff_half_width.is_some() {
                    return fail("analytic mode describes infinite-wing pulses; unset cutoff_half_width".into());
                }
                if (pulse.peak_amplitude * self.params.tau - 2.0).abs() > 1e-12 {
                    return fail("analytic mode requires amplitude = 2/tau (area 2π)".into());
                }
            }
            Scenario::Propagate => {
                if self.pulse.is_none() {
                    return fail("propagate mode requires an input pulse (shape = sech)".into());
                }
            }
            Scenario::Sf | Scenario::Sweep => {
                if self.pulse.is_some() {
                    return fail(format!("{} runs have no input pulse; set shape = none", self.mode.name()));
                }
                if self.seeding != Seeding::Tipping {
                    return fail("superfluorescence runs require seeding = tipping".into());
                }
            }
        }
        if self.scenario() == Scenario::Sweep {
            if self.lengths.is_empty() {
                return fail("lengths must list at least one medium length".into());
            }
            if self.runs == 0 {
                return fail("runs must be >= 1".into());
            }
        }
        if let Some(&l) = self.lengths.iter().find(|&&l| !(l > 0.0 && l.is_finite())) {
            return fail(format!("lengths entry {l} must be > 0"));
        }
        if !(self.window_factor > 0.0 && self.window_factor.is_finite()) {
            return fail(format!("window_factor {} must be > 0", self.window_factor));
        }
        if let (Some(a), Some(b)) = self.window {
            if !(b > a) {
                return fail(format!("t_max = {b} must exceed t_min = {a}"));
            }
        }
        for (what, value) in [("dx", self.grid.dx), ("dt", self.grid.dt)] {
            if let Some(x) = value {
                if !(x > 0.0 && x.is_finite()) {
                    return fail(format!("{what} = {x} must be > 0"));
                }
            }
        }
        if !(self.snapshot_x.1 > self.snapshot_x.0) {
            return fail(format!(
                "snapshot_x_max = {} must exceed snapshot_x_min = {}",
                self.snapshot_x.1, self.snapshot_x.0
            ));
        }
        if self.snapshot_points < 2 {
            return fail("snapshot_points must be >= 2".into());
        }
        if let Some(&x) = self.probes.iter().find(|&&x| !medium.contains(x)) {
            return fail(format!("probe {x} cm lies outside the medium [{}, {}]", medium.x0, medium.x1));
        }
        if self.snapshot_times.iter().any(|t| !t.is_finite()) {
            return fail("snapshot_times must be finite".into());
        }
        Ok(())
    }
}

fn scenario(mode: Mode, figure: Option<u8>) -> Scenario {
    match (mode, figure) {
        (Mode::Analytic, _) | (Mode::Fig, Some(2)) => Scenario::Analytic,
        (Mode::Sf, _) | (Mode::Fig, Some(8)) => Scenario::Sf,
        (Mode::Sweep, _) | (Mode::Fig, Some(6)) => Scenario::Sweep,
        _ => Scenario::Propagate,
    }
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map_or("auto".into(), num)
}

fn list(xs: &[f64]) -> String {
    xs.iter().map(|&x| num(x)).collect::<Vec<_>>().join(", ")
}

/// Explicitly set keys with the line each came from (0 for overrides).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<&'static str, (String, usize)>,
}

impl RawConfig {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    fn line(&self, key: &str) -> usize {
        self.entries.get(key).map_or(0, |(_, l)| *l)
    }

    /// Sets `key` (bare or `section.key`), replacing any earlier value.
    pub fn set(&mut self, spec: &str, value: &str) -> Result<(), CliError> {
        let key = canonical_key(spec.trim(), None, 0)?;
        self.entries.insert(key, (value.trim().to_string(), 0));
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<(), CliError> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| CliError::parse(0, format!("override '{assignment}' is not key=value")))?;
        self.set(k, v)
    }
}

fn canonical_key(spec: &str, section: Option<&str>, line: usize) -> Result<&'static str, CliError> {
    let (sec, key) = match spec.split_once('.') {
        Some((s, k)) => (Some(s.trim()), k.trim()),
        None => (section, spec),
    };
    let Some(&(home, canonical)) = KEYS.iter().find(|(_, k)| *k == key) else {
        return Err(CliError::parse(line, format!("unknown key '{key}'")));
    };
    if let Some(s) = sec {
        if s != home {
            return Err(CliError::parse(line, format!("key '{key}' belongs in [{home}], not [{s}]")));
        }
    }
    Ok(canonical)
}

/// Parses text into explicit entries without applying defaults.
pub fn parse_raw(text: &str) -> Result<RawConfig, CliError> {
    let mut raw = RawConfig::default();
    let mut section: Option<String> = None;
    for (idx, line) in text.lines().enumerate() {
        let n = idx + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| CliError::parse(n, format!("malformed section header '{content}'")))?
                .trim();
            if !KEYS.iter().any(|(s, _)| *s == name) {
                return Err(CliError::parse(n, format!("unknown section '[{name}]'")));
            }
            section = Some(name.to_string());
            continue;
        }
        let (k, v) = content
            .split_once('=')
            .ok_or_else(|| CliError::parse(n, format!("expected 'key = value', found '{content}'")))?;
        let key = canonical_key(k.trim(), section.as_deref(), n)?;
        if let Some((_, first)) = raw.entries.get(key) {
            return Err(CliError::parse(n, format!("duplicate key '{key}' (first set on line {first})")));
        }
        raw.entries.insert(key, (v.trim().to_string(), n));
    }
    Ok(raw)
}

/// Parses and resolves a configuration.
pub fn parse_config(text: &str) -> Result<SimulationConfig, CliError> {
    resolve(&parse_raw(text)?)
}

struct Reader<'a> {
    raw: &'a RawConfig,
}

impl Reader<'_> {
    fn err(&self, key: &str, msg: String) -> CliError {
        CliError::parse(self.raw.line(key), format!("{key}: {msg}"))
    }

    fn str(&self, key: &str) -> Option<&str> {
        debug_assert!(section_of(key).is_some(), "{key}");
        self.raw.get(key)
    }

    fn f64(&self, key: &str, default: f64) -> Result<f64, CliError> {
        self.str(key).map_or(Ok(default), |s| parse_f64(s).map_err(|m| self.err(key, m)))
    }

    fn opt_f64(&self, key: &str, default: Option<f64>) -> Result<Option<f64>, CliError> {
        match self.str(key) {
            None => Ok(default),
            Some("auto") | Some("none") => Ok(None),
            Some(s) => parse_f64(s).map(Some).map_err(|m| self.err(key, m)),
        }
    }

    fn uint<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        match self.str(key) {
            None => Ok(default),
            Some(s) => s.parse().map_err(|_| self.err(key, format!("'{s}' is not a non-negative integer"))),
        }
    }

    fn bool(&self, key: &str, default: bool) -> Result<bool, CliError> {
        match self.str(key) {
            None => Ok(default),
            Some("true") => Ok(true),
            Some("false") => Ok(false),
            Some(s) => Err(self.err(key, format!("'{s}' is not true or false"))),
        }
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        match self.str(key) {
            None => Ok(None),
            Some("") => Ok(Some(Vec::new())),
            Some(s) => s
                .split(',')
                .map(|item| parse_f64(item.trim()).map_err(|m| self.err(key, m)))
                .collect::<Result<Vec<_>, _>>()
                .map(Some),
        }
    }

    fn choice<T: Copy>(&self, key: &str, default: T, options: &[(&str, T)]) -> Result<T, CliError> {
        match self.str(key) {
            None => Ok(default),
            Some(s) => options.iter().find(|(name, _)| *name == s).map(|(_, v)| *v).ok_or_else(|| {
                let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
                self.err(key, format!("'{s}' is not one of {}", names.join(", ")))
            }),
        }
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.parse::<f64>().map_err(|_| format!("'{s}' is not a number"))
}

/// Default sweep lengths: nine values evenly spaced over `(0.5–5)·cτ`.
pub fn default_sweep_lengths(p: &PhysicalParams) -> Vec<f64> {
    (0..9).map(|i| (0.5 + 4.5 * i as f64 / 8.0) * p.c_tau()).collect()
}

/// Default snapshot lab times (units of τ) for pulse runs.
pub const PULSE_SNAPSHOT_TIMES: [f64; 4] = [-5.0, -1.5, -0.3, 3.0];

/// Superfluorescence snapshots are taken at these fractions of the mean delay.
pub const SF_SNAPSHOT_FRACTIONS: [f64; 4] = [0.5, 0.8, 1.0, 1.2];

/// Applies mode-dependent defaults to explicit entries and validates.
pub fn resolve(raw: &RawConfig) -> Result<SimulationConfig, CliError> {
    let r = Reader { raw };
    let mode = match r.str("mode") {
        None => Mode::Propagate,
        Some(s) => Mode::parse(s)
            .ok_or_else(|| r.err("mode", format!("'{s}' is not one of analytic, propagate, sf, sweep, fig")))?,
    };
    let figure = match r.str("figure") {
        None | Some("none") => None,
        Some(s) => match s.parse::<u8>() {
            Ok(f) if FIGURES.contains(&f) => Some(f),
            _ => return Err(r.err("figure", format!("'{s}' is not one of 2, 4, 5, 6, 7, 8"))),
        },
    };
    let scen = scenario(mode, figure);

    let defaults = PhysicalParams::default();
    let params = PhysicalParams {
        g: r.f64("g", defaults.g)?,
        t2_star: r.f64("t2_star", defaults.t2_star)?,
        tau: r.f64("tau", defaults.tau)?,
        density: r.f64("density", defaults.density)?,
        wavelength: r.f64("wavelength", defaults.wavelength)?,
    };
    let x0 = r.f64("x0", 0.0)?;
    let length = r.f64("length", 2.0 * SPEED_OF_LIGHT * params.tau)?;
    let x1 = x0 + length;

    let wants_pulse = matches!(scen, Scenario::Analytic | Scenario::Propagate);
    let shape = r.choice("shape", wants_pulse, &[("sech", true), ("none", false)])?;
    let recipe_cutoff = matches!(figure, Some(4 | 5 | 7)).then_some(10.0);
    let pulse = if shape {
        Some(PulseSpec {
            peak_time: r.f64("peak_time", 0.0)?,
            tau: params.tau,
            cutoff_half_width: r.opt_f64("cutoff_half_width", recipe_cutoff)?,
            peak_amplitude: r.f64("amplitude", 2.0 / params.tau)?,
        })
    } else {
        for key in ["peak_time", "cutoff_half_width", "amplitude"] {
            if raw.get(key).is_some() {
                return Err(CliError::Validation(format!("{key} is set but shape = none")));
            }
        }
        None
    };

    let quadrature = r.choice("quadrature", false, &[("gauss-hermite", false), ("uniform", true)])?;
    let scheme = if quadrature {
        QuadratureScheme::UniformMidpoint { span_sigmas: r.f64("span_sigmas", 4.0)? }
    } else {
        if raw.get("span_sigmas").is_some() {
            return Err(CliError::Validation("span_sigmas applies only to quadrature = uniform".into()));
        }
        QuadratureScheme::GaussHermite
    };
    let grid = GridOptions {
        dx: r.opt_f64("dx", None)?,
        dt: r.opt_f64("dt", None)?,
        detuning_nodes: r.uint("detuning_nodes", DEFAULT_DETUNING_NODES)?,
        scheme,
        allow_unresolved: r.bool("allow_unresolved", false)?,
    };
    let window = (r.opt_f64("t_min", None)?, r.opt_f64("t_max", None)?);

    let sf_like = matches!(scen, Scenario::Sf | Scenario::Sweep);
    let default_seeding = if sf_like || figure == Some(7) { Seeding::Tipping } else { Seeding::None };
    let seeding = r.choice("seeding", default_seeding, &[("none", Seeding::None), ("tipping", Seeding::Tipping)])?;
    let phase =
        r.choice("phase", PhaseMode::Binary, &[("binary", PhaseMode::Binary), ("uniform", PhaseMode::Uniform)])?;
    let lengths = match r.list("lengths")? {
        Some(l) => l,
        None if scen == Scenario::Sweep => default_sweep_lengths(&params),
        None => Vec::new(),
    };
    let runs = r.uint("runs", if scen == Scenario::Sweep { 20 } else { 1 })?;
    let window_factor = r.f64("window_factor", 2.5)?;

    let snapshot_times = match r.list("snapshot_times")? {
        Some(t) => t,
        None if scen == Scenario::Sf => match sf_delay_mean(length, &params) {
            Ok(d) if d.is_finite() => SF_SNAPSHOT_FRACTIONS.iter().map(|f| f * d / params.tau).collect(),
            _ => Vec::new(),
        },
        None => PULSE_SNAPSHOT_TIMES.to_vec(),
    };
    let probes = match r.list("probes")? {
        Some(p) => p,
        None if scen == Scenario::Sweep => Vec::new(),
        None => vec![x1],
    };

    let cfg = SimulationConfig {
        mode,
        figure,
        seed: r.uint("seed", 0u64)?,
        velocity: r.choice(
            "velocity",
            Velocity::Limit,
            &[("limit", Velocity::Limit), ("quadrature", Velocity::Quadrature)],
        )?,
        params,
        x0,
        length,
        pulse,
        grid,
        window,
        seeding,
        phase,
        lengths,
        runs,
        window_factor,
        out: PathBuf::from(r.str("out").unwrap_or("out")),
        snapshot_times,
        snapshot_x: (r.f64("snapshot_x_min", -8.0)?, r.f64("snapshot_x_max", 10.0)?),
        snapshot_points: r.uint("snapshot_points", 500)?,
        probes,
        plot_scripts: r.bool("plot_scripts", false)?,
    };
    cfg.validate()?;
    Ok(cfg)
}
