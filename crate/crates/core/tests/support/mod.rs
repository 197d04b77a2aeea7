//! Independent reference integrator: explicit midpoint on the second-order
//! amplitude equations, written directly from their textbook form with naive
//! phase evaluation. Shares nothing with the library's integrator.

#![allow(dead_code)]

use num_complex::Complex64;

pub struct OracleProblem {
    /// Search-set frequencies followed by `w_j`.
    pub omega: Vec<f64>,
    pub j: usize,
    pub s: usize,
    pub coupling: f64,
    pub w0: f64,
}

impl OracleProblem {
    /// `indices` is the search set; the initial mode is appended last.
    pub fn new(w0: f64, indices: &[u64], j_index: u64, s_pos: usize) -> Self {
        let mut omega: Vec<f64> = indices.iter().map(|&i| w0 * i as f64).collect();
        omega.push(w0 * j_index as f64);
        Self {
            j: indices.len(),
            s: s_pos,
            coupling: w0 / (indices.len() as f64).sqrt(),
            w0,
            omega,
        }
    }

    pub fn tau(&self) -> f64 {
        std::f64::consts::PI * (self.j as f64).sqrt() / self.w0
    }

    /// `a'' = 2 i w_n a' - g (...)`, returned as `(a', v')`.
    pub fn derivative(&self, t: f64, a: &[Complex64], v: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let i = Complex64::i();
        let ws = self.omega[self.s];
        let wj = self.omega[self.j];
        let n_modes = self.omega.len();
        let mut dv = vec![Complex64::new(0.0, 0.0); n_modes];
        let mut sum = Complex64::new(0.0, 0.0);
        for l in 0..self.j {
            // exp(i w_ls t), w_ls = w_s - w_l
            sum += a[l] * Complex64::from_polar(1.0, (ws - self.omega[l]) * t);
        }
        for n in 0..n_modes {
            let forcing = if n == self.j {
                wj * sum
            } else {
                // exp(i w_sn t), w_sn = w_n - w_s
                self.omega[n] * a[self.j] * Complex64::from_polar(1.0, (self.omega[n] - ws) * t)
            };
            dv[n] = 2.0 * i * self.omega[n] * v[n] - self.coupling * forcing;
        }
        (v.to_vec(), dv)
    }

    /// Explicit midpoint with `steps` steps of size `h`; returns the
    /// populations every `every` steps (and at the end).
    pub fn midpoint(
        &self,
        a0: &[Complex64],
        v0: &[Complex64],
        h: f64,
        steps: u64,
        every: u64,
    ) -> (Vec<f64>, Vec<Vec<f64>>, Vec<Complex64>) {
        let mut a = a0.to_vec();
        let mut v = v0.to_vec();
        let mut times = vec![0.0];
        let mut pops = vec![a.iter().map(|z| z.norm_sqr()).collect::<Vec<_>>()];
        for k in 0..steps {
            let t = k as f64 * h;
            let (da, dv) = self.derivative(t, &a, &v);
            let am: Vec<Complex64> = a.iter().zip(&da).map(|(x, d)| x + 0.5 * h * d).collect();
            let vm: Vec<Complex64> = v.iter().zip(&dv).map(|(x, d)| x + 0.5 * h * d).collect();
            let (da, dv) = self.derivative(t + 0.5 * h, &am, &vm);
            for (x, d) in a.iter_mut().zip(&da) {
                *x += h * d;
            }
            for (x, d) in v.iter_mut().zip(&dv) {
                *x += h * d;
            }
            if (k + 1) % every == 0 || k + 1 == steps {
                times.push((k + 1) as f64 * h);
                pops.push(a.iter().map(|z| z.norm_sqr()).collect());
            }
        }
        (times, pops, a)
    }

    pub fn unit_start(&self) -> (Vec<Complex64>, Vec<Complex64>) {
        let zero = Complex64::new(0.0, 0.0);
        let mut a = vec![zero; self.omega.len()];
        a[self.j] = Complex64::new(1.0, 0.0);
        (a, vec![zero; self.omega.len()])
    }
}

/// Discrete argmax of a series.
pub fn argmax(y: &[f64]) -> usize {
    let mut best = 0;
    for (k, &v) in y.iter().enumerate() {
        if v > y[best] {
            best = k;
        }
    }
    best
}

use wavesearch::dynamics::{default_initial, AmplitudeState, IntegratorConfig, Stepper};
use wavesearch::spectrum::{make_problem, SearchProblem, SpectrumKind};

pub fn problem(kind: SpectrumKind, n: usize) -> SearchProblem {
    make_problem(kind.build(n, 1.0).unwrap(), kind.default_initial_index(n), n / 2).unwrap()
}

/// Amplitudes after exactly `steps` RK4 steps with the given sampling.
pub fn rk4_end_state(problem: &SearchProblem, samples: u32, steps: u64) -> AmplitudeState {
    let mut config = IntegratorConfig::new(1.0);
    config.samples_per_fastest_period = samples;
    let mut stepper = Stepper::new(problem, &config, &default_initial(problem)).unwrap();
    for _ in 0..steps {
        stepper.step();
    }
    stepper.state()
}

/// Global errors at the default step and at half of it, both against a
/// reference at a sixteenth of the default step, on `N = 10` quadratic up
/// to about `tau / 10`.
pub fn order_errors() -> (f64, f64) {
    let p = problem(SpectrumKind::Quadratic, 10);
    let base = IntegratorConfig::DEFAULT_SAMPLES;
    let h = IntegratorConfig::new(1.0).step_size(&p);
    let k = (0.1 * std::f64::consts::PI * 10f64.sqrt() / h).round() as u64;
    let coarse = rk4_end_state(&p, base, k);
    let half = rk4_end_state(&p, 2 * base, 2 * k);
    let reference = rk4_end_state(&p, 16 * base, 16 * k);
    assert_eq!(coarse.t, reference.t);
    let err = |s: &AmplitudeState| {
        s.a.iter()
            .zip(&reference.a)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    };
    (err(&coarse), err(&half))
}

use wavesearch::dynamics::Trajectory;

/// A stored oracle trajectory as a two-slot trajectory (`j` = 0, `s` = 1),
/// with the largest spectator population alongside.
pub struct Reference {
    pub trajectory: Trajectory,
    pub max_spectator: Vec<f64>,
}

pub fn read_reference(name: &str, tau: f64) -> Option<Reference> {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/reference")
        .join(format!("{name}.csv"));
    let text = std::fs::read_to_string(path).ok()?;
    let mut times = Vec::new();
    let mut populations = Vec::new();
    let mut norm = Vec::new();
    let mut max_spectator = Vec::new();
    for line in text.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        times.push(v[0] * tau);
        populations.push(vec![v[1], v[2]]);
        norm.push(v[3]);
        max_spectator.push(v[4]);
    }
    Some(Reference {
        trajectory: Trajectory {
            times,
            populations,
            norm,
            initial_slot: 0,
            searched_slot: 1,
            tau,
        },
        max_spectator,
    })
}
