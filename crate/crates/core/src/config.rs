//! Experiment configuration: a `key = value` text file plus overrides.
//!
//! Lines starting with `#` and blank lines are ignored. Later assignments
//! win, so command-line overrides are applied after the file.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::analysis::ScanPlan;
use crate::dynamics::IntegratorConfig;
use crate::error::{Error, Result};
use crate::spectrum::{make_problem, ModeSpectrum, SearchProblem, SpectrumKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    Simulate,
    CompareRwa,
    Scan,
    SpectrumStats,
    FieldSnapshot,
}

impl RunMode {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "simulate" => RunMode::Simulate,
            "compare-rwa" => RunMode::CompareRwa,
            "scan" => RunMode::Scan,
            "spectrum-stats" => RunMode::SpectrumStats,
            "field-snapshot" => RunMode::FieldSnapshot,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            RunMode::Simulate => "simulate",
            RunMode::CompareRwa => "compare-rwa",
            RunMode::Scan => "scan",
            RunMode::SpectrumStats => "spectrum-stats",
            RunMode::FieldSnapshot => "field-snapshot",
        }
    }
}

/// How the searched mode is identified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SearchedMode {
    /// Position in the spectrum; `None` means `N / 2`.
    Position(Option<usize>),
    /// The given frequency must match exactly one mode.
    Frequency(f64),
}

/// Derivative initial conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VelocityInit {
    Zero,
    Random { seed: u64, band: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mode: RunMode,
    pub spectrum: SpectrumKind,
    pub n: usize,
    pub base_frequency: f64,
    pub initial_index: Option<u64>,
    pub searched: SearchedMode,
    pub t_max_tau: f64,
    pub samples_per_period: u32,
    pub record_stride: Option<u64>,
    pub step_cap: u64,
    pub phase_resync_interval: u32,
    pub velocity: VelocityInit,
    pub scan_sizes: Vec<usize>,
    pub snapshot_times_tau: Vec<f64>,
    pub field_intervals: Option<usize>,
    pub rwa_warn_ratio: f64,
    pub out_dir: PathBuf,
    pub workers: Option<usize>,
    pub verbose_modes: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            mode: RunMode::Simulate,
            spectrum: SpectrumKind::Quadratic,
            n: 100,
            base_frequency: 1.0,
            initial_index: None,
            searched: SearchedMode::Position(None),
            t_max_tau: 2.2,
            samples_per_period: IntegratorConfig::DEFAULT_SAMPLES,
            record_stride: None,
            step_cap: IntegratorConfig::DEFAULT_STEP_CAP,
            phase_resync_interval: IntegratorConfig::DEFAULT_PHASE_RESYNC,
            velocity: VelocityInit::Zero,
            scan_sizes: vec![25, 50, 100, 200],
            snapshot_times_tau: vec![0.0, 0.5, 1.0],
            field_intervals: None,
            rwa_warn_ratio: 20.0,
            out_dir: PathBuf::from("out"),
            workers: None,
            verbose_modes: false,
        }
    }
}

/// Keys accepted in configuration files and `--set` overrides.
pub const KEYS: &[&str] = &[
    "mode",
    "spectrum",
    "indices",
    "n",
    "base_frequency",
    "initial_index",
    "searched_position",
    "searched_frequency",
    "t_max_tau",
    "samples_per_period",
    "record_stride",
    "step_cap",
    "phase_resync_interval",
    "velocity_seed",
    "velocity_band",
    "scan_sizes",
    "snapshot_times_tau",
    "field_intervals",
    "rwa_warn_ratio",
    "out_dir",
    "workers",
    "verbose_modes",
];

/// Parses `key = value` lines into an ordered map.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::config(
                format!("line {}", lineno + 1),
                format!("expected `key = value`, got `{line}`"),
            )
        })?;
        insert_pair(&mut out, key.trim(), value.trim())?;
    }
    Ok(out)
}

fn insert_pair(map: &mut BTreeMap<String, String>, key: &str, value: &str) -> Result<()> {
    if !KEYS.contains(&key) {
        return Err(Error::config(key, "unknown key"));
    }
    map.insert(key.to_string(), value.to_string());
    Ok(())
}

/// Parses a single `key=value` override.
pub fn parse_override(s: &str) -> Result<(String, String)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| Error::config(s, "override must look like key=value"))?;
    let (k, v) = (k.trim(), v.trim());
    if !KEYS.contains(&k) {
        return Err(Error::config(k, "unknown key"));
    }
    Ok((k.to_string(), v.to_string()))
}

pub fn read_pairs(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_pairs(&text)
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::config(key, format!("cannot parse `{value}`")))
}

fn list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| num(key, s))
        .collect()
}

fn flag(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::config(key, format!("expected a boolean, got `{value}`"))),
    }
}

impl ExperimentConfig {
    /// Builds a configuration from key/value pairs on top of the defaults.
    pub fn from_pairs(pairs: &BTreeMap<String, String>) -> Result<Self> {
        let mut cfg = Self::default();
        let get = |k: &str| pairs.get(k).map(String::as_str);

        if let Some(v) = get("mode") {
            cfg.mode = RunMode::parse(v).ok_or_else(|| {
                Error::config(
                    "mode",
                    format!("unknown mode `{v}` (simulate, compare-rwa, scan, spectrum-stats, field-snapshot)"),
                )
            })?;
        }
        if let Some(v) = get("n") {
            cfg.n = num("n", v)?;
        }
        if let Some(v) = get("spectrum") {
            cfg.spectrum = match v {
                "linear" => SpectrumKind::Linear,
                "quadratic" => SpectrumKind::Quadratic,
                "custom" => {
                    let indices: Vec<u64> = list(
                        "indices",
                        get("indices").ok_or_else(|| {
                            Error::config("indices", "required for a custom spectrum")
                        })?,
                    )?;
                    if get("n").is_none() {
                        cfg.n = indices.len();
                    }
                    SpectrumKind::Custom(indices)
                }
                _ => {
                    return Err(Error::config(
                        "spectrum",
                        format!("unknown spectrum `{v}` (linear, quadratic, custom)"),
                    ))
                }
            };
        }
        if let Some(v) = get("base_frequency") {
            cfg.base_frequency = num("base_frequency", v)?;
        }
        if let Some(v) = get("initial_index") {
            cfg.initial_index = Some(num("initial_index", v)?);
        }
        match (get("searched_position"), get("searched_frequency")) {
            (Some(_), Some(_)) => {
                return Err(Error::config(
                    "searched_frequency",
                    "give either searched_position or searched_frequency, not both",
                ))
            }
            (Some(p), None) => cfg.searched = SearchedMode::Position(Some(num("searched_position", p)?)),
            (None, Some(f)) => cfg.searched = SearchedMode::Frequency(num("searched_frequency", f)?),
            (None, None) => {}
        }
        if let Some(v) = get("t_max_tau") {
            cfg.t_max_tau = num("t_max_tau", v)?;
        }
        if let Some(v) = get("samples_per_period") {
            cfg.samples_per_period = num("samples_per_period", v)?;
        }
        if let Some(v) = get("record_stride") {
            cfg.record_stride = Some(num("record_stride", v)?);
        }
        if let Some(v) = get("step_cap") {
            cfg.step_cap = num("step_cap", v)?;
        }
        if let Some(v) = get("phase_resync_interval") {
            cfg.phase_resync_interval = num("phase_resync_interval", v)?;
        }
        if let Some(v) = get("velocity_seed") {
            let band = match get("velocity_band") {
                Some(b) => num("velocity_band", b)?,
                None => cfg.base_frequency,
            };
            cfg.velocity = VelocityInit::Random {
                seed: num("velocity_seed", v)?,
                band,
            };
        } else if get("velocity_band").is_some() {
            return Err(Error::config("velocity_band", "needs velocity_seed"));
        }
        if let Some(v) = get("scan_sizes") {
            cfg.scan_sizes = list("scan_sizes", v)?;
        }
        if let Some(v) = get("snapshot_times_tau") {
            cfg.snapshot_times_tau = list("snapshot_times_tau", v)?;
        }
        if let Some(v) = get("field_intervals") {
            cfg.field_intervals = Some(num("field_intervals", v)?);
        }
        if let Some(v) = get("rwa_warn_ratio") {
            cfg.rwa_warn_ratio = num("rwa_warn_ratio", v)?;
        }
        if let Some(v) = get("out_dir") {
            cfg.out_dir = PathBuf::from(v);
        }
        if let Some(v) = get("workers") {
            cfg.workers = Some(num("workers", v)?);
        }
        if let Some(v) = get("verbose_modes") {
            cfg.verbose_modes = flag("verbose_modes", v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::config("n", "a search needs at least 2 modes"));
        }
        if !(self.base_frequency.is_finite() && self.base_frequency > 0.0) {
            return Err(Error::config("base_frequency", "must be positive"));
        }
        if !(self.t_max_tau.is_finite() && self.t_max_tau > 0.0) {
            return Err(Error::config("t_max_tau", "must be positive"));
        }
        if self.samples_per_period == 0 {
            return Err(Error::config("samples_per_period", "must be positive"));
        }
        if self.record_stride == Some(0) {
            return Err(Error::config("record_stride", "must be positive"));
        }
        if self.phase_resync_interval == 0 {
            return Err(Error::config("phase_resync_interval", "must be positive"));
        }
        if let VelocityInit::Random { band, .. } = self.velocity {
            if !(band.is_finite() && band >= 0.0) {
                return Err(Error::config("velocity_band", "must be non-negative"));
            }
        }
        if self.workers == Some(0) {
            return Err(Error::config("workers", "must be positive"));
        }
        if self.mode == RunMode::Scan && self.scan_sizes.is_empty() {
            return Err(Error::config("scan_sizes", "empty list"));
        }
        if self.snapshot_times_tau.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::config("snapshot_times_tau", "times must be non-negative"));
        }
        if let SpectrumKind::Custom(ref idx) = self.spectrum {
            if idx.len() != self.n {
                return Err(Error::config(
                    "indices",
                    format!("{} indices given but n = {}", idx.len(), self.n),
                ));
            }
        }
        Ok(())
    }

    pub fn build_spectrum(&self) -> Result<ModeSpectrum> {
        self.spectrum
            .build(self.n, self.base_frequency)
            .map_err(|e| Error::config("spectrum", e.to_string()))
    }

    /// Fully validated search problem for this configuration.
    pub fn problem(&self) -> Result<SearchProblem> {
        let spectrum = self.build_spectrum()?;
        let position = resolve_searched(self, &spectrum)?;
        let j = self
            .initial_index
            .unwrap_or_else(|| self.spectrum.default_initial_index(self.n));
        make_problem(spectrum, j, position).map_err(|e| {
            let field = if self.initial_index.is_some() {
                "initial_index"
            } else {
                "searched_position"
            };
            Error::config(field, e.to_string())
        })
    }

    pub fn integrator(&self, problem: &SearchProblem) -> IntegratorConfig {
        let mut cfg = IntegratorConfig::for_tau_multiple(problem, self.t_max_tau);
        cfg.samples_per_fastest_period = self.samples_per_period;
        cfg.record_stride = self.record_stride;
        cfg.step_cap = self.step_cap;
        cfg.phase_resync_interval = self.phase_resync_interval;
        cfg
    }

    pub fn scan_plan(&self) -> ScanPlan {
        let mut plan = ScanPlan::new(self.spectrum.clone(), self.scan_sizes.clone());
        plan.base_frequency = self.base_frequency;
        plan.t_max_tau = self.t_max_tau;
        plan.samples_per_fastest_period = self.samples_per_period;
        plan.record_stride = self.record_stride;
        plan.step_cap = self.step_cap;
        plan.workers = self.workers;
        plan
    }

    /// Resolved configuration as ordered `key = value` lines.
    pub fn describe(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = Vec::new();
        let mut put = |k: &str, v: String| out.push((k.to_string(), v));
        put("mode", self.mode.name().to_string());
        put("spectrum", self.spectrum.name().to_string());
        if let SpectrumKind::Custom(ref idx) = self.spectrum {
            put("indices", join(idx));
        }
        put("n", self.n.to_string());
        put("base_frequency", self.base_frequency.to_string());
        put(
            "initial_index",
            self.initial_index
                .unwrap_or_else(|| self.spectrum.default_initial_index(self.n))
                .to_string(),
        );
        match self.searched {
            SearchedMode::Position(p) => put("searched_position", p.unwrap_or(self.n / 2).to_string()),
            SearchedMode::Frequency(f) => put("searched_frequency", f.to_string()),
        }
        put("t_max_tau", self.t_max_tau.to_string());
        put("samples_per_period", self.samples_per_period.to_string());
        put(
            "record_stride",
            self.record_stride.map_or("auto".to_string(), |s| s.to_string()),
        );
        put("step_cap", self.step_cap.to_string());
        put("phase_resync_interval", self.phase_resync_interval.to_string());
        if let VelocityInit::Random { seed, band } = self.velocity {
            put("velocity_seed", seed.to_string());
            put("velocity_band", band.to_string());
        }
        match self.mode {
            RunMode::Scan => put("scan_sizes", join(&self.scan_sizes)),
            RunMode::FieldSnapshot => {
                put("snapshot_times_tau", join(&self.snapshot_times_tau));
                if let Some(m) = self.field_intervals {
                    put("field_intervals", m.to_string());
                }
            }
            _ => {}
        }
        put("rwa_warn_ratio", self.rwa_warn_ratio.to_string());
        put("verbose_modes", self.verbose_modes.to_string());
        out
    }

    /// Header comment block recording the resolved configuration.
    pub fn header_block(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# wavesearch {}", env!("CARGO_PKG_VERSION"));
        for (k, v) in self.describe() {
            let _ = writeln!(s, "# {k} = {v}");
        }
        s
    }
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

/// Position of the searched mode: either given directly or found by exact
/// match of the frequency against `w_0 * index`.
pub fn resolve_searched(config: &ExperimentConfig, spectrum: &ModeSpectrum) -> Result<usize> {
    match config.searched {
        SearchedMode::Position(Some(p)) => {
            if p >= spectrum.len() {
                return Err(Error::config(
                    "searched_position",
                    format!("{p} out of range for N = {}", spectrum.len()),
                ));
            }
            Ok(p)
        }
        SearchedMode::Position(None) => Ok(spectrum.len() / 2),
        SearchedMode::Frequency(f) => {
            let ratio = f / spectrum.base_frequency();
            let rounded = ratio.round();
            let no_match = || {
                Error::config(
                    "searched_frequency",
                    format!("no mode has frequency {f}"),
                )
            };
            // w_0 * index is one rounding away from f, and the division one more
            let slack = 4.0 * f64::EPSILON * rounded;
            if !(ratio.is_finite() && rounded >= 1.0 && (ratio - rounded).abs() <= slack) {
                return Err(no_match());
            }
            let index = rounded as u64;
            let matches: Vec<usize> = spectrum
                .indices()
                .iter()
                .enumerate()
                .filter(|&(_, &i)| i == index)
                .map(|(p, _)| p)
                .collect();
            match matches.as_slice() {
                [p] => Ok(*p),
                [] => Err(no_match()),
                _ => Err(Error::config(
                    "searched_frequency",
                    format!("frequency {f} matches several modes"),
                )),
            }
        }
    }
}
