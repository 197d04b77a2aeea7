//! Observables extracted from trajectories: the searched-mode peak, the
//! square-root scaling of the peak time, deviation from the two-level model
//! and the late-time ripple of the initial mode.

use rayon::prelude::*;

use crate::dynamics::{default_initial, integrate, IntegratorConfig, Trajectory};
use crate::error::{Error, Result};
use crate::rwa::{build_rwa, RwaModel};
use crate::spectrum::{make_problem, SearchProblem, SpectrumKind};

/// Trajectories handed to [`find_peak`] must reach this multiple of tau.
pub const PEAK_WINDOW_TAU: f64 = 1.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakReport {
    pub t_star: f64,
    pub p_star: f64,
    pub t_star_over_tau: f64,
}

/// Maximum of the searched population: discrete argmax refined by the
/// vertex of the parabola through the three samples around it.
pub fn find_peak(trajectory: &Trajectory) -> Result<PeakReport> {
    let needed = PEAK_WINDOW_TAU * trajectory.tau;
    let available = trajectory.end_time();
    if trajectory.len() < 3 || available < needed * (1.0 - 1e-12) {
        return Err(Error::WindowTooShort { needed, available });
    }
    let ps = trajectory.searched_series();
    let mut best = 0;
    for (k, &p) in ps.iter().enumerate() {
        if p > ps[best] {
            best = k;
        }
    }
    let t = &trajectory.times;
    let (mut t_star, mut p_star) = (t[best], ps[best]);
    if best > 0 && best + 1 < ps.len() {
        if let Some((tv, pv)) = parabola_vertex(
            (t[best - 1], ps[best - 1]),
            (t[best], ps[best]),
            (t[best + 1], ps[best + 1]),
        ) {
            if pv >= p_star && tv > t[best - 1] && tv < t[best + 1] {
                t_star = tv;
                p_star = pv;
            }
        }
    }
    Ok(PeakReport {
        t_star,
        p_star,
        t_star_over_tau: t_star / trajectory.tau,
    })
}

/// Vertex of the parabola through three points, if it opens downwards.
fn parabola_vertex(p0: (f64, f64), p1: (f64, f64), p2: (f64, f64)) -> Option<(f64, f64)> {
    let (x0, y0) = p0;
    let (x1, y1) = p1;
    let (x2, y2) = p2;
    // Newton divided differences
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let curvature = (d12 - d01) / (x2 - x0);
    if !(curvature < 0.0) {
        return None;
    }
    // y = y0 + d01 (x - x0) + c (x - x0)(x - x1)
    let xv = 0.5 * (x0 + x1) - d01 / (2.0 * curvature);
    let yv = y0 + d01 * (xv - x0) + curvature * (xv - x0) * (xv - x1);
    Some((xv, yv))
}

/// Which model a scan integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanModel {
    Full,
    Rwa,
}

/// Inputs of an N sweep. Each run uses the default initial mode and the
/// searched mode at position `N / 2`.
#[derive(Debug, Clone)]
pub struct ScanPlan {
    pub kind: SpectrumKind,
    pub base_frequency: f64,
    pub sizes: Vec<usize>,
    pub t_max_tau: f64,
    pub samples_per_fastest_period: u32,
    pub record_stride: Option<u64>,
    pub step_cap: u64,
    pub model: ScanModel,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl ScanPlan {
    pub fn new(kind: SpectrumKind, sizes: Vec<usize>) -> Self {
        Self {
            kind,
            base_frequency: 1.0,
            sizes,
            t_max_tau: 1.3,
            samples_per_fastest_period: IntegratorConfig::DEFAULT_SAMPLES,
            record_stride: None,
            step_cap: IntegratorConfig::DEFAULT_STEP_CAP,
            model: ScanModel::Full,
            workers: None,
        }
    }

    pub fn problem(&self, n: usize) -> Result<SearchProblem> {
        let spectrum = self.kind.build(n, self.base_frequency)?;
        make_problem(spectrum, self.kind.default_initial_index(n), n / 2)
    }

    fn run_one(&self, n: usize) -> Result<ScalingRow> {
        let problem = self.problem(n)?;
        let model = build_rwa(&problem);
        let t_max = self.t_max_tau * model.tau;
        let trajectory = match self.model {
            ScanModel::Full => {
                let mut config = IntegratorConfig::new(t_max);
                config.samples_per_fastest_period = self.samples_per_fastest_period;
                config.record_stride = self.record_stride;
                config.step_cap = self.step_cap;
                integrate(&problem, &config, &default_initial(&problem))?
            }
            ScanModel::Rwa => {
                // even sample count so that tau falls on a sample when t_max_tau is rational
                model.sample(t_max, 2 * IntegratorConfig::DEFAULT_RECORD_POINTS as usize)
            }
        };
        let peak = find_peak(&trajectory)?;
        Ok(ScalingRow {
            n,
            t_star: peak.t_star,
            tau: model.tau,
            t_star_over_tau: peak.t_star_over_tau,
            p_star: peak.p_star,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingRow {
    pub n: usize,
    pub t_star: f64,
    pub tau: f64,
    pub t_star_over_tau: f64,
    pub p_star: f64,
}

/// Least-squares fit `t_star = alpha sqrt N` through the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFit {
    pub alpha: f64,
    /// `alpha w_0 / pi`; 1 for the two-level prediction.
    pub alpha_normalized: f64,
    /// Pearson correlation of `t_star` against `sqrt N`.
    pub correlation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
    pub fit: Option<ScalingFit>,
}

impl ScalingReport {
    pub fn from_rows(mut rows: Vec<ScalingRow>, base_frequency: f64) -> Self {
        rows.sort_by_key(|r| r.n);
        let fit = (rows.len() >= 3).then(|| fit_sqrt_law(&rows, base_frequency));
        Self { rows, fit }
    }
}

fn fit_sqrt_law(rows: &[ScalingRow], base_frequency: f64) -> ScalingFit {
    let xs: Vec<f64> = rows.iter().map(|r| (r.n as f64).sqrt()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.t_star).collect();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let alpha = sxy / sxx;
    ScalingFit {
        alpha,
        alpha_normalized: alpha * base_frequency / std::f64::consts::PI,
        correlation: pearson(&xs, &ys),
    }
}

fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Runs every N of the plan (in parallel) and fits the square-root law.
pub fn scaling_study(plan: &ScanPlan) -> Result<ScalingReport> {
    if plan.t_max_tau < PEAK_WINDOW_TAU {
        return Err(Error::config(
            "t_max_tau",
            format!("a scan needs at least {PEAK_WINDOW_TAU} tau to locate the peak"),
        ));
    }
    let mut sizes = plan.sizes.clone();
    sizes.sort_unstable();
    sizes.dedup();
    let run = || -> Vec<Result<ScalingRow>> {
        sizes
            .par_iter()
            .map(|&n| {
                plan.run_one(n).map_err(|e| Error::Scan {
                    n,
                    source: Box::new(e),
                })
            })
            .collect()
    };
    let results = match plan.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::config("workers", e.to_string()))?
            .install(run),
        None => run(),
    };
    let rows = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(ScalingReport::from_rows(rows, plan.base_frequency))
}

/// `sup_k |P_s(t_k) - sin^2(Omega t_k)|` over the recorded times.
pub fn rwa_deviation(full: &Trajectory, model: &RwaModel) -> Result<f64> {
    if ((full.tau - model.tau) / model.tau).abs() > 1e-12 {
        return Err(Error::WindowMismatch(format!(
            "trajectory tau {} differs from model tau {}",
            full.tau, model.tau
        )));
    }
    if full.searched_slot != model.searched_slot || full.initial_slot != model.initial_slot {
        return Err(Error::WindowMismatch("mode slots differ".into()));
    }
    if full.is_empty() {
        return Err(Error::WindowMismatch("empty trajectory".into()));
    }
    Ok((0..full.len())
        .map(|k| (full.searched_population(k) - model.searched_population(full.times[k])).abs())
        .fold(0.0, f64::max))
}

/// Ripple of the initial-mode population around a late time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillationReport {
    /// Peak-to-trough size of the ripple left after removing the slow
    /// two-level exchange.
    pub amplitude: f64,
    /// Mean spacing of successive ripple maxima; `None` without ripple.
    pub period: Option<f64>,
    pub period_over_tau: Option<f64>,
    pub maxima: usize,
}

/// Ripple amplitude below this is treated as no ripple at all.
const RIPPLE_FLOOR: f64 = 1e-12;

/// Minimum drop on both sides of a counted maximum, as a fraction of the
/// ripple amplitude.
const RIPPLE_PROMINENCE: f64 = 0.25;

/// Measures the fast oscillation of `P_j` on
/// `[(center - half_width) tau, (center + half_width) tau]`.
///
/// The slow exchange is removed by a least-squares fit of
/// `1, cos 2Wt, sin 2Wt, (t - t_c) cos 2Wt, (t - t_c) sin 2Wt` with
/// `W = pi / (2 tau)`; the linear-in-time terms absorb a small shift of the
/// exchange frequency. The amplitude is `max - min` of the residual and the
/// period is the mean spacing of its prominent maxima (see
/// [`prominent_maxima`]), which ignores sub-ripples smaller than a quarter
/// of the amplitude.
pub fn late_oscillation_metric(
    trajectory: &Trajectory,
    center_tau: f64,
    half_width_tau: f64,
) -> Result<OscillationReport> {
    let tau = trajectory.tau;
    let lo = (center_tau - half_width_tau) * tau;
    let hi = (center_tau + half_width_tau) * tau;
    if trajectory.end_time() < hi * (1.0 - 1e-12) || trajectory.times.first().copied().unwrap_or(f64::MAX) > lo {
        return Err(Error::WindowTooShort {
            needed: hi,
            available: trajectory.end_time(),
        });
    }
    let (times, values): (Vec<f64>, Vec<f64>) = (0..trajectory.len())
        .filter(|&k| trajectory.times[k] >= lo && trajectory.times[k] <= hi)
        .map(|k| (trajectory.times[k], trajectory.initial_population(k)))
        .unzip();
    if times.len() < 8 {
        return Err(Error::WindowTooShort {
            needed: hi,
            available: trajectory.end_time(),
        });
    }

    let w2 = std::f64::consts::PI / tau;
    let tc = center_tau * tau;
    let basis = |t: f64| -> [f64; 5] {
        let (s, c) = (w2 * t).sin_cos();
        let d = (t - tc) / tau;
        [1.0, c, s, d * c, d * s]
    };
    let coef = least_squares(&times, &values, basis);
    let residual: Vec<f64> = times
        .iter()
        .zip(&values)
        .map(|(&t, &y)| {
            let b = basis(t);
            y - b.iter().zip(&coef).map(|(u, w)| u * w).sum::<f64>()
        })
        .collect();

    let max = residual.iter().copied().fold(f64::MIN, f64::max);
    let min = residual.iter().copied().fold(f64::MAX, f64::min);
    let amplitude = max - min;
    let peaks = prominent_maxima(&residual, RIPPLE_PROMINENCE * amplitude);
    let period = if amplitude > RIPPLE_FLOOR && peaks.len() >= 2 {
        let first = times[peaks[0]];
        let last = times[*peaks.last().unwrap()];
        Some((last - first) / (peaks.len() - 1) as f64)
    } else {
        None
    };
    Ok(OscillationReport {
        amplitude: if amplitude > RIPPLE_FLOOR { amplitude } else { 0.0 },
        period,
        period_over_tau: period.map(|p| p / tau),
        maxima: peaks.len(),
    })
}

/// Maxima that rise at least `delta` above the minimum on each side before
/// the next one; on a plateau the leftmost sample is taken. A maximum at
/// index 0 is skipped because its left side is not observed.
pub fn prominent_maxima(y: &[f64], delta: f64) -> Vec<usize> {
    let mut out = Vec::new();
    let Some(&first) = y.first() else {
        return out;
    };
    let (mut hi, mut lo, mut hi_at) = (first, first, 0);
    let mut rising = true;
    for (i, &v) in y.iter().enumerate() {
        if v > hi {
            hi = v;
            hi_at = i;
        }
        lo = lo.min(v);
        if rising {
            if v < hi - delta {
                if hi_at > 0 {
                    out.push(hi_at);
                }
                lo = v;
                rising = false;
            }
        } else if v > lo + delta {
            hi = v;
            hi_at = i;
            rising = true;
        }
    }
    out
}

fn least_squares<const K: usize>(ts: &[f64], ys: &[f64], basis: impl Fn(f64) -> [f64; K]) -> [f64; K] {
    let mut ata = [[0.0; K]; K];
    let mut aty = [0.0; K];
    for (&t, &y) in ts.iter().zip(ys) {
        let b = basis(t);
        for r in 0..K {
            aty[r] += b[r] * y;
            for c in 0..K {
                ata[r][c] += b[r] * b[c];
            }
        }
    }
    solve_dense(ata, aty)
}

/// Gaussian elimination with partial pivoting; singular directions get 0.
fn solve_dense<const K: usize>(mut m: [[f64; K]; K], mut rhs: [f64; K]) -> [f64; K] {
    for col in 0..K {
        let pivot = (col..K)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        let d = m[col][col];
        if d.abs() < 1e-300 {
            continue;
        }
        for row in col + 1..K {
            let f = m[row][col] / d;
            for c in col..K {
                m[row][c] -= f * m[col][c];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = [0.0; K];
    for row in (0..K).rev() {
        let d = m[row][row];
        if d.abs() < 1e-300 {
            continue;
        }
        let tail: f64 = (row + 1..K).map(|c| m[row][c] * x[c]).sum();
        x[row] = (rhs[row] - tail) / d;
    }
    x
}
