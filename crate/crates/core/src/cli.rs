//! Command-line driver: argument parsing, mode dispatch and exit codes.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use crate::analysis::{find_peak, late_oscillation_metric, rwa_deviation, scaling_study, PEAK_WINDOW_TAU};
use crate::config::{self, ExperimentConfig, RunMode, VelocityInit};
use crate::dynamics::{default_initial, integrate, norm_deviation, randomized_initial, AmplitudeState, Stepper};
use crate::error::{Error, ErrorClass, Result};
use crate::field::{reconstruct, FieldGeometry};
use crate::output::{self, Summary};
use crate::rwa::{build_rwa, validity_ratio};
use crate::spectrum::{degeneracy_histogram, ModeSpectrum, SearchProblem};

#[derive(Debug, Parser)]
#[command(name = "wavesearch", version, about = "Mode search on a classical wave")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the coupled-mode equations and locate the search peak.
    Simulate(CommonArgs),
    /// Integrate and compare against the two-level model.
    CompareRwa(CommonArgs),
    /// Peak time against N, with a square-root fit.
    Scan(CommonArgs),
    /// Frequency-difference multiplicities of the spectrum.
    SpectrumStats(CommonArgs),
    /// Reconstruct the spatial field at chosen times.
    FieldSnapshot(CommonArgs),
    /// Run the mode named by `mode` in the configuration file.
    Run(CommonArgs),
}

#[derive(Debug, Args, Clone, Default)]
pub struct CommonArgs {
    /// Configuration file of `key = value` lines.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of modes in the search set.
    #[arg(long)]
    pub n: Option<usize>,
    /// linear, quadratic or custom.
    #[arg(long)]
    pub spectrum: Option<String>,
    /// Integration window in units of the optimal time.
    #[arg(long)]
    pub t_max_tau: Option<f64>,
    /// RK4 steps per period of the fastest mode.
    #[arg(long)]
    pub dt_samples: Option<u32>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Worker threads for scans.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Write every mode population to the trajectory file.
    #[arg(long)]
    pub verbose_modes: bool,
    /// Any configuration key, as key=value; may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

impl Command {
    fn parts(&self) -> (Option<RunMode>, &CommonArgs) {
        match self {
            Command::Simulate(a) => (Some(RunMode::Simulate), a),
            Command::CompareRwa(a) => (Some(RunMode::CompareRwa), a),
            Command::Scan(a) => (Some(RunMode::Scan), a),
            Command::SpectrumStats(a) => (Some(RunMode::SpectrumStats), a),
            Command::FieldSnapshot(a) => (Some(RunMode::FieldSnapshot), a),
            Command::Run(a) => (None, a),
        }
    }
}

/// Merges the configuration file, the named flags and `--set` overrides,
/// in that order of increasing priority.
pub fn resolve_config(mode: Option<RunMode>, args: &CommonArgs) -> Result<ExperimentConfig> {
    let mut pairs: BTreeMap<String, String> = match &args.config {
        Some(path) => config::read_pairs(path)?,
        None => BTreeMap::new(),
    };
    if let Some(m) = mode {
        pairs.insert("mode".into(), m.name().into());
    }
    let mut put = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            pairs.insert(k.to_string(), v);
        }
    };
    put("n", args.n.map(|v| v.to_string()));
    put("spectrum", args.spectrum.clone());
    put("t_max_tau", args.t_max_tau.map(|v| v.to_string()));
    put("samples_per_period", args.dt_samples.map(|v| v.to_string()));
    put("out_dir", args.out_dir.as_ref().map(|p| p.display().to_string()));
    put("workers", args.workers.map(|v| v.to_string()));
    if args.verbose_modes {
        pairs.insert("verbose_modes".into(), "true".into());
    }
    for s in &args.set {
        let (k, v) = config::parse_override(s)?;
        pairs.insert(k, v);
    }
    ExperimentConfig::from_pairs(&pairs)
}

/// Result of one command: summary lines plus any warnings for stderr.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub summary: Summary,
    pub warnings: Vec<String>,
}

pub fn execute(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut out = Outcome::default();
    out.summary.text("mode", cfg.mode.name());
    match cfg.mode {
        RunMode::Simulate => simulate(cfg, &mut out)?,
        RunMode::CompareRwa => compare_rwa(cfg, &mut out)?,
        RunMode::Scan => scan(cfg, &mut out)?,
        RunMode::SpectrumStats => spectrum_stats(cfg, &mut out)?,
        RunMode::FieldSnapshot => field_snapshot(cfg, &mut out)?,
    }
    Ok(out)
}

fn initial_state(cfg: &ExperimentConfig, problem: &SearchProblem) -> AmplitudeState {
    match cfg.velocity {
        VelocityInit::Zero => default_initial(problem),
        VelocityInit::Random { seed, band } => randomized_initial(problem, seed, band),
    }
}

fn describe_problem(cfg: &ExperimentConfig, problem: &SearchProblem, out: &mut Outcome) {
    let ratio = validity_ratio(problem);
    out.summary
        .text("spectrum", cfg.spectrum.name())
        .text("n", problem.n().to_string())
        .text("initial_index", problem.initial_index().to_string())
        .text("searched_index", problem.searched_index().to_string())
        .number("tau", build_rwa(problem).tau)
        .number("rabi_frequency", build_rwa(problem).rabi_frequency)
        .number("validity_ratio", ratio);
    if ratio < cfg.rwa_warn_ratio {
        out.warnings.push(format!(
            "validity ratio {ratio} is below {}; the two-level prediction may be inaccurate",
            cfg.rwa_warn_ratio
        ));
    }
}

fn full_run(cfg: &ExperimentConfig, problem: &SearchProblem, out: &mut Outcome) -> Result<crate::dynamics::Trajectory> {
    let integrator = cfg.integrator(problem);
    out.summary
        .number("dt", integrator.step_size(problem))
        .text("steps", integrator.step_count(problem).to_string());
    integrate(problem, &integrator, &initial_state(cfg, problem))
}

fn peak_summary(traj: &crate::dynamics::Trajectory, out: &mut Outcome) -> Result<()> {
    if traj.end_time() >= PEAK_WINDOW_TAU * traj.tau * (1.0 - 1e-12) {
        let peak = find_peak(traj)?;
        out.summary
            .number("t_star", peak.t_star)
            .number("t_star_over_tau", peak.t_star_over_tau)
            .number("p_star", peak.p_star);
    } else {
        out.warnings.push(format!(
            "window shorter than {PEAK_WINDOW_TAU} tau; peak not located"
        ));
    }
    let early = traj.truncated(2.0 * traj.tau);
    let spectator = (0..early.len()).map(|k| early.max_spectator(k)).fold(0.0, f64::max);
    out.summary
        .number("max_spectator", spectator)
        .number("norm_deviation", norm_deviation(traj));
    Ok(())
}

fn simulate(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
    let problem = cfg.problem()?;
    describe_problem(cfg, &problem, out);
    let traj = full_run(cfg, &problem, out)?;
    peak_summary(&traj, out)?;
    let labels = cfg.verbose_modes.then(|| problem.slot_indices());
    let path = cfg.out_dir.join("trajectory.csv");
    output::trajectory_csv(&cfg.header_block(), &traj, labels.as_deref()).write(&path)?;
    out.summary.path("trajectory", &path);
    Ok(())
}

fn compare_rwa(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
    let problem = cfg.problem()?;
    describe_problem(cfg, &problem, out);
    let full = full_run(cfg, &problem, out)?;
    peak_summary(&full, out)?;
    let model = build_rwa(&problem);
    let rwa = model.trajectory(&full.times);
    out.summary.number("rwa_deviation", rwa_deviation(&full, &model)?);
    if full.end_time() >= 2.5 * full.tau * (1.0 - 1e-12) {
        let ripple = late_oscillation_metric(&full, 2.0, 0.5)?;
        out.summary.number("ripple_amplitude", ripple.amplitude);
        match ripple.period_over_tau {
            Some(p) => out.summary.number("ripple_period_over_tau", p),
            None => out.summary.text("ripple_period_over_tau", "none"),
        };
    }
    let header = cfg.header_block();
    let paired = cfg.out_dir.join("compare_rwa.csv");
    output::comparison_csv(&header, &full, &rwa).write(&paired)?;
    let full_path = cfg.out_dir.join("trajectory_full.csv");
    output::tagged_trajectory_csv(&header, "full", &full).write(&full_path)?;
    let rwa_path = cfg.out_dir.join("trajectory_rwa.csv");
    output::tagged_trajectory_csv(&header, "rwa", &rwa).write(&rwa_path)?;
    out.summary
        .path("comparison", &paired)
        .path("trajectory_full", &full_path)
        .path("trajectory_rwa", &rwa_path);
    Ok(())
}

fn scan(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
    let report = scaling_study(&cfg.scan_plan())?;
    out.summary.text("spectrum", cfg.spectrum.name());
    for r in &report.rows {
        out.summary
            .number(&format!("t_star_over_tau[{}]", r.n), r.t_star_over_tau);
    }
    match report.fit {
        Some(fit) => {
            out.summary
                .number("alpha", fit.alpha)
                .number("alpha_normalized", fit.alpha_normalized)
                .number("correlation", fit.correlation);
        }
        None => out.warnings.push("fewer than 3 sizes; no fit".into()),
    }
    let path = cfg.out_dir.join("scan.csv");
    output::scan_csv(&cfg.header_block(), &report).write(&path)?;
    out.summary.path("scan", &path);
    Ok(())
}

fn spectrum_stats(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
    let problem = cfg.problem()?;
    describe_problem(cfg, &problem, out);
    let search_set = problem.spectrum().difference_histogram();
    let with_initial = degeneracy_histogram(&problem);
    let drive = problem.drive_index_difference();
    out.summary
        .text("distinct_differences", with_initial.len().to_string())
        .text("max_multiplicity", with_initial.values().max().copied().unwrap_or(0).to_string())
        .text("drive_index_difference", drive.to_string())
        .text("drive_multiplicity", with_initial.get(&drive).copied().unwrap_or(0).to_string());
    let path = cfg.out_dir.join("spectrum_stats.csv");
    output::histogram_csv(&cfg.header_block(), &search_set, &with_initial).write(&path)?;
    out.summary.path("histogram", &path);
    Ok(())
}

fn field_snapshot(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
    let problem = cfg.problem()?;
    describe_problem(cfg, &problem, out);
    let tau = build_rwa(&problem).tau;

    // all modes, j included, in index order
    let slot_indices = problem.slot_indices();
    let mut order: Vec<usize> = (0..slot_indices.len()).collect();
    order.sort_by_key(|&k| slot_indices[k]);
    let sorted: Vec<u64> = order.iter().map(|&k| slot_indices[k]).collect();
    let spectrum = ModeSpectrum::new(problem.base_frequency(), sorted)?;
    let mut geometry = FieldGeometry::for_base_frequency(problem.base_frequency(), spectrum.max_index());
    if let Some(m) = cfg.field_intervals {
        geometry.intervals = m;
    }

    let mut times = cfg.snapshot_times_tau.clone();
    times.sort_by(f64::total_cmp);
    let t_last = times.last().copied().unwrap_or(0.0);
    let mut integrator = cfg.integrator(&problem);
    integrator.t_max = t_last.max(f64::MIN_POSITIVE) * tau;
    let mut stepper = Stepper::new(&problem, &integrator, &initial_state(cfg, &problem))?;
    let h = stepper.step_size();
    let needed = (t_last * tau / h).round() as u64;
    if needed > integrator.step_cap {
        return Err(Error::StepCapExceeded {
            steps: needed,
            cap: integrator.step_cap,
        });
    }

    let mut snapshots = Vec::with_capacity(times.len());
    for &t_tau in &times {
        let target = (t_tau * tau / h).round() as u64;
        while stepper.steps_taken() < target {
            stepper.step();
        }
        if !stepper.is_finite() {
            return Err(Error::NonFinite {
                step: stepper.steps_taken(),
                t: stepper.time(),
                dt: h,
            });
        }
        let a = stepper.amplitudes();
        let coeffs: Vec<Complex64> = order.iter().map(|&k| a[k]).collect();
        let t = stepper.time();
        snapshots.push((t, reconstruct(&coeffs, t, &spectrum, &geometry)?));
    }
    out.summary.text("grid_intervals", geometry.intervals.to_string());
    for (t, f) in &snapshots {
        out.summary
            .number(&format!("field_norm[t_over_tau={}]", output::num(t / tau)), f.norm_sqr());
    }
    let path = cfg.out_dir.join("field_snapshot.csv");
    output::field_csv(&cfg.header_block(), tau, &snapshots).write(&path)?;
    out.summary.path("field", &path);
    Ok(())
}

pub fn exit_code(class: ErrorClass) -> i32 {
    match class {
        ErrorClass::Config => 2,
        ErrorClass::Numerical => 3,
        ErrorClass::Io => 4,
    }
}

/// One-line machine-readable description of a failure.
pub fn error_line(err: &Error) -> String {
    let class = match err.class() {
        ErrorClass::Config => "config",
        ErrorClass::Numerical => "numerical",
        ErrorClass::Io => "io",
    };
    let mut line = format!("error: class={class} kind={}", err.kind());
    let mut e = err;
    while let Error::Scan { n, source } = e {
        line.push_str(&format!(" n={n}"));
        e = source;
    }
    if let Error::Config { field, .. } = e {
        line.push_str(&format!(" field={field}"));
    }
    line.push_str(&format!(" message=\"{}\"", err.to_string().replace('"', "'")));
    line
}

/// Parses arguments, runs and reports; returns the process exit code.
pub fn run(cli: Cli, stdout: &mut impl Write, stderr: &mut impl Write) -> i32 {
    let (mode, args) = cli.command.parts();
    let result = resolve_config(mode, args).and_then(|cfg| execute(&cfg));
    match result {
        Ok(outcome) => {
            for w in &outcome.warnings {
                let _ = writeln!(stderr, "warning: {w}");
            }
            let _ = stdout.write_all(outcome.summary.render().as_bytes());
            0
        }
        Err(e) => {
            let _ = writeln!(stderr, "{}", error_line(&e));
            exit_code(e.class())
        }
    }
}
