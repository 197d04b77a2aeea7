//! Full coupled-mode amplitude dynamics and its fixed-step RK4 integrator.
//!
//! For every mode `n` of the search set and the initial mode `j` the slowly
//! varying amplitude obeys
//!
//! ```text
//! a_n'' - 2 i w_n a_n' = -(w_0 / sqrt N) * { w_n (1 - d_nj) a_j exp(i w_sn t)
//!                                           + w_j d_nj sum_l a_l exp(i w_ls t) }
//! ```
//!
//! with `w_sn = w_n - w_s` and `w_ls = w_s - w_l`. It is integrated as a
//! first-order system in `(a, v = da/dt)`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::phase;
use crate::spectrum::SearchProblem;

/// Amplitudes and their first derivatives at time `t`, one slot per mode
/// (search set in spectrum order, then `j`).
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeState {
    pub t: f64,
    pub a: Vec<Complex64>,
    pub v: Vec<Complex64>,
}

impl AmplitudeState {
    pub fn zeros(slots: usize) -> Self {
        Self {
            t: 0.0,
            a: vec![Complex64::new(0.0, 0.0); slots],
            v: vec![Complex64::new(0.0, 0.0); slots],
        }
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// `sum_n |a_n|^2`.
    pub fn norm_sqr(&self) -> f64 {
        self.a.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.a.iter().chain(&self.v).all(|z| z.re.is_finite() && z.im.is_finite())
    }

    fn check_against(&self, problem: &SearchProblem) -> Result<()> {
        let slots = problem.mode_count();
        if self.a.len() != slots || self.v.len() != slots {
            return Err(Error::InvalidProblem(format!(
                "state has {}/{} slots but the problem needs {slots}",
                self.a.len(),
                self.v.len()
            )));
        }
        Ok(())
    }
}

/// Canonical start: `a_j = 1`, every other amplitude and every derivative zero.
pub fn default_initial(problem: &SearchProblem) -> AmplitudeState {
    let mut state = AmplitudeState::zeros(problem.mode_count());
    state.a[problem.initial_slot()] = Complex64::new(1.0, 0.0);
    state
}

/// Canonical amplitudes with random derivatives: each `v_n` has modulus
/// uniform in `[0, band)` and uniform phase. Deterministic in `seed`.
pub fn randomized_initial(problem: &SearchProblem, seed: u64, band: f64) -> AmplitudeState {
    let mut state = default_initial(problem);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for v in state.v.iter_mut() {
        let r = band * rng.gen::<f64>();
        let phi = std::f64::consts::TAU * rng.gen::<f64>();
        *v = Complex64::from_polar(r, phi);
    }
    state
}

/// Step-size, recording and safety settings for [`integrate`].
#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    /// Steps per period of the fastest mode.
    pub samples_per_fastest_period: u32,
    pub t_max: f64,
    /// Record every k-th step; `None` picks a stride giving about
    /// [`IntegratorConfig::DEFAULT_RECORD_POINTS`] records.
    pub record_stride: Option<u64>,
    pub step_cap: u64,
    /// Multiplies the perturbation; 0 gives free modes.
    pub coupling_scale: f64,
    /// Steps between exact re-evaluations of the drive phases; in between,
    /// phases advance by precomputed unit rotations.
    pub phase_resync_interval: u32,
}

impl IntegratorConfig {
    pub const DEFAULT_SAMPLES: u32 = 32;
    pub const DEFAULT_RECORD_POINTS: u64 = 2000;
    pub const DEFAULT_STEP_CAP: u64 = 100_000_000;
    pub const DEFAULT_PHASE_RESYNC: u32 = 16;

    pub fn new(t_max: f64) -> Self {
        Self {
            samples_per_fastest_period: Self::DEFAULT_SAMPLES,
            t_max,
            record_stride: None,
            step_cap: Self::DEFAULT_STEP_CAP,
            coupling_scale: 1.0,
            phase_resync_interval: Self::DEFAULT_PHASE_RESYNC,
        }
    }

    /// Configuration running to `multiple * tau` for the given problem.
    pub fn for_tau_multiple(problem: &SearchProblem, multiple: f64) -> Self {
        Self::new(multiple * crate::rwa::optimal_time(problem))
    }

    /// `dt = (2 pi / w_max) / samples_per_fastest_period`.
    pub fn step_size(&self, problem: &SearchProblem) -> f64 {
        std::f64::consts::TAU / problem.max_frequency() / self.samples_per_fastest_period as f64
    }

    /// Number of steps needed to reach `t_max`.
    pub fn step_count(&self, problem: &SearchProblem) -> u64 {
        let h = self.step_size(problem);
        (self.t_max / h - 1e-9).ceil().max(0.0) as u64
    }

    fn validate(&self) -> Result<()> {
        if self.samples_per_fastest_period == 0 {
            return Err(Error::config(
                "samples_per_period",
                "must be a positive integer",
            ));
        }
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return Err(Error::config("t_max", "must be positive and finite"));
        }
        if self.record_stride == Some(0) {
            return Err(Error::config("record_stride", "must be a positive integer"));
        }
        if self.phase_resync_interval == 0 {
            return Err(Error::config(
                "phase_resync_interval",
                "must be a positive integer",
            ));
        }
        if !self.coupling_scale.is_finite() {
            return Err(Error::config("coupling_scale", "must be finite"));
        }
        Ok(())
    }
}

/// Recorded squared amplitudes over time.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// `populations[k][slot] = |a_slot(times[k])|^2`.
    pub populations: Vec<Vec<f64>>,
    pub norm: Vec<f64>,
    pub initial_slot: usize,
    pub searched_slot: usize,
    /// Optimal time of the underlying problem, used for normalized output.
    pub tau: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn end_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    pub fn initial_population(&self, k: usize) -> f64 {
        self.populations[k][self.initial_slot]
    }

    pub fn searched_population(&self, k: usize) -> f64 {
        self.populations[k][self.searched_slot]
    }

    /// Largest population among modes other than `j` and `s` at record `k`.
    pub fn max_spectator(&self, k: usize) -> f64 {
        self.populations[k]
            .iter()
            .enumerate()
            .filter(|&(slot, _)| slot != self.initial_slot && slot != self.searched_slot)
            .map(|(_, &p)| p)
            .fold(0.0, f64::max)
    }

    pub fn initial_series(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.initial_population(k)).collect()
    }

    pub fn searched_series(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.searched_population(k)).collect()
    }

    /// Records with `t <= t_end`.
    pub fn truncated(&self, t_end: f64) -> Trajectory {
        let keep = self.times.partition_point(|&t| t <= t_end);
        Trajectory {
            times: self.times[..keep].to_vec(),
            populations: self.populations[..keep].to_vec(),
            norm: self.norm[..keep].to_vec(),
            initial_slot: self.initial_slot,
            searched_slot: self.searched_slot,
            tau: self.tau,
        }
    }

    fn push(&mut self, t: f64, a: &[Complex64]) {
        let pops: Vec<f64> = a.iter().map(|z| z.norm_sqr()).collect();
        self.norm.push(pops.iter().sum());
        self.populations.push(pops);
        self.times.push(t);
    }
}

/// `max_k |sum_n P_n(t_k) - 1|`.
pub fn norm_deviation(trajectory: &Trajectory) -> f64 {
    trajectory
        .norm
        .iter()
        .map(|n| (n - 1.0).abs())
        .fold(0.0, f64::max)
}

/// Problem data laid out for repeated right-hand-side evaluation.
#[derive(Debug, Clone)]
struct Coefficients {
    /// `2 w_n` per slot, `j` last.
    two_omega: Vec<f64>,
    /// `g * w_n` per slot, with `g = scale * w_0 / sqrt N`.
    weight: Vec<f64>,
    /// Integer multiple of `w_0` in `w_sn = w_n - w_s`, search slots only.
    detuning: Vec<i64>,
    base_frequency: f64,
    initial_slot: usize,
}

impl Coefficients {
    fn new(problem: &SearchProblem, coupling_scale: f64) -> Self {
        let n = problem.n();
        let g = coupling_scale * problem.base_frequency() / (n as f64).sqrt();
        let omega = problem.slot_frequencies();
        let weight = omega.iter().map(|w| g * w).collect();
        let s_index = problem.searched_index() as i64;
        let detuning = problem
            .spectrum()
            .indices()
            .iter()
            .map(|&idx| idx as i64 - s_index)
            .collect();
        Self {
            two_omega: omega.iter().map(|w| 2.0 * w).collect(),
            weight,
            detuning,
            base_frequency: problem.base_frequency(),
            initial_slot: n,
        }
    }

    /// `exp(i w_sn m h)` for every search slot.
    fn phases_at(&self, steps: f64, h: f64, out: &mut [Complex64]) {
        for (p, &d) in out.iter_mut().zip(&self.detuning) {
            *p = phase::phase_at(self.base_frequency, d, steps, h);
        }
    }

    /// Writes `dv/dt` given amplitudes, derivatives and the drive phases
    /// `exp(i w_sn t)` of the stage time. `da/dt` is `v` itself.
    #[inline]
    fn eval(&self, a: &[Complex64], v: &[Complex64], phases: &[Complex64], dv: &mut [Complex64]) {
        let j = self.initial_slot;
        let aj = a[j];
        let (mut sr, mut si) = (0.0, 0.0);
        let rows = dv[..j]
            .iter_mut()
            .zip(&a[..j])
            .zip(&v[..j])
            .zip(&phases[..j])
            .zip(self.two_omega[..j].iter().zip(&self.weight[..j]));
        for ((((dvn, an), vn), ph), (&w2, &wt)) in rows {
            // a_j exp(i w_sn t)
            let dr = aj.re * ph.re - aj.im * ph.im;
            let di = aj.re * ph.im + aj.im * ph.re;
            *dvn = Complex64::new(-w2 * vn.im - wt * dr, w2 * vn.re - wt * di);
            // a_l exp(i w_ls t) = a_l conj(exp(i w_sl t))
            sr += an.re * ph.re + an.im * ph.im;
            si += an.im * ph.re - an.re * ph.im;
        }
        let (w2, wt, vj) = (self.two_omega[j], self.weight[j], v[j]);
        dv[j] = Complex64::new(-w2 * vj.im - wt * sr, w2 * vj.re - wt * si);
    }
}

/// Raw perturbation matrix elements `<n|V(t)|Psi>` for every slot.
///
/// For a search mode: `a_j exp(i w_sj t) / sqrt N`; for `j`:
/// `exp(-i w_sj t) sum_l a_l exp(-i w_l t) / sqrt N`.
pub fn coupling_elements(problem: &SearchProblem, state: &AmplitudeState) -> Result<Vec<Complex64>> {
    state.check_against(problem)?;
    let n = problem.n();
    let inv_sqrt_n = 1.0 / (n as f64).sqrt();
    let base = problem.base_frequency();
    let drive = problem.drive_index_difference();
    let aj = state.a[problem.initial_slot()];
    let forward = phase::phase_at_time(base, drive, state.t);

    let mut out = Vec::with_capacity(n + 1);
    for _ in 0..n {
        out.push(inv_sqrt_n * aj * forward);
    }
    let sum: Complex64 = problem
        .spectrum()
        .indices()
        .iter()
        .zip(&state.a)
        .map(|(&idx, &al)| al * phase::phase_at_time(base, -(idx as i64), state.t))
        .sum();
    out.push(inv_sqrt_n * forward.conj() * sum);
    Ok(out)
}

/// Time derivative of the first-order system at `state`: `(da/dt, dv/dt)`.
pub fn rhs(problem: &SearchProblem, state: &AmplitudeState) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    rhs_scaled(problem, state, 1.0)
}

pub(crate) fn rhs_scaled(
    problem: &SearchProblem,
    state: &AmplitudeState,
    coupling_scale: f64,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    state.check_against(problem)?;
    let coeffs = Coefficients::new(problem, coupling_scale);
    let mut phases = vec![Complex64::new(0.0, 0.0); problem.n()];
    coeffs.phases_at(1.0, state.t, &mut phases);
    let mut dv = vec![Complex64::new(0.0, 0.0); problem.mode_count()];
    coeffs.eval(&state.a, &state.v, &phases, &mut dv);
    Ok((state.v.clone(), dv))
}

/// Fixed-step classic RK4 stepper on the `2 (N + 1)` complex system.
///
/// Time is `t_k = k * h` for the integer step count `k`; it is never
/// accumulated by repeated addition.
#[derive(Debug, Clone)]
pub struct Stepper {
    coeffs: Coefficients,
    h: f64,
    step: u64,
    resync: u64,
    a: Vec<Complex64>,
    v: Vec<Complex64>,
    // drive phases at t_k, plus unit rotations over h/2 and h
    phase_now: Vec<Complex64>,
    rot_half: Vec<Complex64>,
    phase_mid: Vec<Complex64>,
    phase_end: Vec<Complex64>,
    stage_a: Vec<Complex64>,
    stage_v: Vec<Complex64>,
    acc_a: Vec<Complex64>,
    acc_v: Vec<Complex64>,
    kv: Vec<Complex64>,
}

impl Stepper {
    pub fn new(problem: &SearchProblem, config: &IntegratorConfig, initial: &AmplitudeState) -> Result<Self> {
        config.validate()?;
        initial.check_against(problem)?;
        if initial.t != 0.0 {
            return Err(Error::InvalidProblem(
                "integration starts from t = 0".into(),
            ));
        }
        let coeffs = Coefficients::new(problem, config.coupling_scale);
        let h = config.step_size(problem);
        let search = problem.n();
        let slots = problem.mode_count();
        let zero = Complex64::new(0.0, 0.0);

        let mut phase_now = vec![zero; search];
        coeffs.phases_at(0.0, h, &mut phase_now);
        let mut rot_half = vec![zero; search];
        coeffs.phases_at(0.5, h, &mut rot_half);

        Ok(Self {
            coeffs,
            h,
            step: 0,
            resync: config.phase_resync_interval as u64,
            a: initial.a.clone(),
            v: initial.v.clone(),
            phase_now,
            rot_half,
            phase_mid: vec![zero; search],
            phase_end: vec![zero; search],
            stage_a: vec![zero; slots],
            stage_v: vec![zero; slots],
            acc_a: vec![zero; slots],
            acc_v: vec![zero; slots],
            kv: vec![zero; slots],
        })
    }

    pub fn step_size(&self) -> f64 {
        self.h
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.h
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.a
    }

    pub fn state(&self) -> AmplitudeState {
        AmplitudeState {
            t: self.time(),
            a: self.a.clone(),
            v: self.v.clone(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.a.iter().chain(&self.v).all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Advances one RK4 step.
    pub fn step(&mut self) {
        let h = self.h;
        let hh = 0.5 * h;
        for ((mid, end), (&now, &rot)) in self
            .phase_mid
            .iter_mut()
            .zip(self.phase_end.iter_mut())
            .zip(self.phase_now.iter().zip(&self.rot_half))
        {
            *mid = now * rot;
            *end = *mid * rot;
        }

        let c = &self.coeffs;

        c.eval(&self.a, &self.v, &self.phase_now, &mut self.kv);
        for (((((acc_a, acc_v), sa), sv), (&a, &v)), &kv) in self
            .acc_a
            .iter_mut()
            .zip(self.acc_v.iter_mut())
            .zip(self.stage_a.iter_mut())
            .zip(self.stage_v.iter_mut())
            .zip(self.a.iter().zip(&self.v))
            .zip(&self.kv)
        {
            *acc_a = v;
            *acc_v = kv;
            *sa = a + hh * v;
            *sv = v + hh * kv;
        }

        for (weight, phases) in [(hh, &self.phase_mid), (h, &self.phase_mid)] {
            c.eval(&self.stage_a, &self.stage_v, phases, &mut self.kv);
            for (((((acc_a, acc_v), sa), sv), (&a, &v)), &kv) in self
                .acc_a
                .iter_mut()
                .zip(self.acc_v.iter_mut())
                .zip(self.stage_a.iter_mut())
                .zip(self.stage_v.iter_mut())
                .zip(self.a.iter().zip(&self.v))
                .zip(&self.kv)
            {
                let stage_v = *sv;
                *acc_a += 2.0 * stage_v;
                *acc_v += 2.0 * kv;
                *sa = a + weight * stage_v;
                *sv = v + weight * kv;
            }
        }

        c.eval(&self.stage_a, &self.stage_v, &self.phase_end, &mut self.kv);
        let sixth = h / 6.0;
        for ((((a, v), (&acc_a, &acc_v)), &sv), &kv) in self
            .a
            .iter_mut()
            .zip(self.v.iter_mut())
            .zip(self.acc_a.iter().zip(&self.acc_v))
            .zip(&self.stage_v)
            .zip(&self.kv)
        {
            *a += sixth * (acc_a + sv);
            *v += sixth * (acc_v + kv);
        }

        self.step += 1;
        if self.step.is_multiple_of(self.resync) {
            self.coeffs
                .phases_at(self.step as f64, h, &mut self.phase_now);
        } else {
            std::mem::swap(&mut self.phase_now, &mut self.phase_end);
        }
    }
}

/// Integrates from `initial` (at `t = 0`) to `config.t_max`, recording
/// populations every `record_stride` steps plus the final step.
pub fn integrate(
    problem: &SearchProblem,
    config: &IntegratorConfig,
    initial: &AmplitudeState,
) -> Result<Trajectory> {
    let mut stepper = Stepper::new(problem, config, initial)?;
    let steps = config.step_count(problem);
    if steps > config.step_cap {
        return Err(Error::StepCapExceeded {
            steps,
            cap: config.step_cap,
        });
    }
    let stride = config
        .record_stride
        .unwrap_or_else(|| (steps / IntegratorConfig::DEFAULT_RECORD_POINTS).max(1));

    let records = (steps / stride + 2) as usize;
    let mut traj = Trajectory {
        times: Vec::with_capacity(records),
        populations: Vec::with_capacity(records),
        norm: Vec::with_capacity(records),
        initial_slot: problem.initial_slot(),
        searched_slot: problem.searched_slot(),
        tau: crate::rwa::optimal_time(problem),
    };
    traj.push(0.0, stepper.amplitudes());

    while stepper.steps_taken() < steps {
        stepper.step();
        let k = stepper.steps_taken();
        if k % stride == 0 || k == steps {
            if !stepper.is_finite() {
                return Err(Error::NonFinite {
                    step: k,
                    t: stepper.time(),
                    dt: stepper.step_size(),
                });
            }
            traj.push(stepper.time(), stepper.amplitudes());
        }
    }
    Ok(traj)
}
