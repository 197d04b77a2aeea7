//! Two-level rotating-wave model: only `j` and `s` exchange amplitude, at the
//! Rabi frequency `Omega = w_0 / (2 sqrt N)`.
//!
//! Keeping only the resonant terms of the full equations leaves
//! `a_j' = -i Omega a_s`, `a_s' = -i Omega a_j`, solved from `a_j(0) = 1` by
//! `a_j = cos(Omega t)`, `a_s = -i sin(Omega t)`.

use num_complex::Complex64;

use crate::dynamics::Trajectory;
use crate::spectrum::SearchProblem;

/// `Omega = w_0 / (2 sqrt N)`.
pub fn rabi_frequency(problem: &SearchProblem) -> f64 {
    problem.base_frequency() / (2.0 * (problem.n() as f64).sqrt())
}

/// `tau = pi sqrt N / w_0`, the first maximum of the searched population.
pub fn optimal_time(problem: &SearchProblem) -> f64 {
    std::f64::consts::PI * (problem.n() as f64).sqrt() / problem.base_frequency()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RwaModel {
    pub rabi_frequency: f64,
    pub tau: f64,
    pub n: usize,
    pub mode_count: usize,
    pub initial_slot: usize,
    pub searched_slot: usize,
}

pub fn build_rwa(problem: &SearchProblem) -> RwaModel {
    RwaModel {
        rabi_frequency: rabi_frequency(problem),
        tau: optimal_time(problem),
        n: problem.n(),
        mode_count: problem.mode_count(),
        initial_slot: problem.initial_slot(),
        searched_slot: problem.searched_slot(),
    }
}

/// `(a_j, a_s) = (cos(Omega t), -i sin(Omega t))`; every other mode is zero.
pub fn analytic_amplitudes(model: &RwaModel, t: f64) -> (Complex64, Complex64) {
    let (s, c) = model.phase(t).sin_cos();
    (Complex64::new(c, 0.0), Complex64::new(0.0, -s))
}

impl RwaModel {
    /// `Omega t`, computed as `(pi / 2) (t / tau)` so that `t = tau` lands
    /// exactly on `pi / 2`.
    fn phase(&self, t: f64) -> f64 {
        std::f64::consts::FRAC_PI_2 * (t / self.tau)
    }

    pub fn searched_population(&self, t: f64) -> f64 {
        self.phase(t).sin().powi(2)
    }

    pub fn initial_population(&self, t: f64) -> f64 {
        self.phase(t).cos().powi(2)
    }

    /// Populations of the model at the given times, in the same layout as a
    /// full integration.
    pub fn trajectory(&self, times: &[f64]) -> Trajectory {
        let mut populations = Vec::with_capacity(times.len());
        let mut norm = Vec::with_capacity(times.len());
        for &t in times {
            let (aj, as_) = analytic_amplitudes(self, t);
            let mut row = vec![0.0; self.mode_count];
            row[self.initial_slot] = aj.norm_sqr();
            row[self.searched_slot] = as_.norm_sqr();
            norm.push(row[self.initial_slot] + row[self.searched_slot]);
            populations.push(row);
        }
        Trajectory {
            times: times.to_vec(),
            populations,
            norm,
            initial_slot: self.initial_slot,
            searched_slot: self.searched_slot,
            tau: self.tau,
        }
    }

    /// `points + 1` uniformly spaced samples on `[0, t_max]`.
    pub fn sample(&self, t_max: f64, points: usize) -> Trajectory {
        let points = points.max(1);
        let times: Vec<f64> = (0..=points)
            .map(|k| t_max * k as f64 / points as f64)
            .collect();
        self.trajectory(&times)
    }
}

/// `min_n w_n / Omega` over the search set and `j`.
pub fn validity_ratio(problem: &SearchProblem) -> f64 {
    problem.min_frequency() / rabi_frequency(problem)
}
