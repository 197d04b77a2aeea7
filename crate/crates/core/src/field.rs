//! Spatial picture of the modal expansion on `[0, L]`:
//! `Psi(x, t) = sum_n a_n(t) exp(-i w_n t) sin(K_n x)` with `K_n = K_0 n`,
//! `K_0 = 2 pi / L` and `w_0 = c K_0`.
//!
//! Used for verification and snapshots only; the integrator works in mode
//! space.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::phase;
use crate::spectrum::ModeSpectrum;

/// Domain length, wave speed and number of grid intervals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldGeometry {
    pub length: f64,
    pub speed: f64,
    /// Number of intervals `M`; the grid has `M + 1` points.
    pub intervals: usize,
}

impl FieldGeometry {
    /// `c = 1`, `L = 2 pi` (so `w_0 = 1`) and the default grid for the given
    /// largest mode index.
    pub fn unit(max_index: u64) -> Self {
        Self {
            length: TAU,
            speed: 1.0,
            intervals: Self::default_intervals(max_index),
        }
    }

    /// Geometry with `c = 1` whose fundamental frequency is `base_frequency`.
    pub fn for_base_frequency(base_frequency: f64, max_index: u64) -> Self {
        Self {
            length: TAU / base_frequency,
            speed: 1.0,
            intervals: Self::default_intervals(max_index),
        }
    }

    /// `M = 4 n_max + 1`.
    pub fn default_intervals(max_index: u64) -> usize {
        4 * max_index as usize + 1
    }

    pub fn wavenumber0(&self) -> f64 {
        TAU / self.length
    }

    pub fn base_frequency(&self) -> f64 {
        self.speed * self.wavenumber0()
    }

    pub fn dx(&self) -> f64 {
        self.length / self.intervals as f64
    }

    pub fn grid(&self) -> Vec<f64> {
        let m = self.intervals as f64;
        (0..=self.intervals)
            .map(|k| self.length * k as f64 / m)
            .collect()
    }

    fn check(&self, spectrum: &ModeSpectrum) -> Result<()> {
        if !(self.length > 0.0 && self.length.is_finite() && self.speed > 0.0 && self.speed.is_finite()) {
            return Err(Error::config("geometry", "length and speed must be positive"));
        }
        let required = 4 * spectrum.max_index() as usize;
        if self.intervals < required {
            return Err(Error::Resolution {
                points: self.intervals,
                max_index: spectrum.max_index(),
                required,
            });
        }
        let w0 = self.base_frequency();
        if ((spectrum.base_frequency() - w0) / w0).abs() > 1e-12 {
            return Err(Error::config(
                "geometry",
                format!(
                    "dispersion mismatch: c K_0 = {w0} but the spectrum has w_0 = {}",
                    spectrum.base_frequency()
                ),
            ));
        }
        Ok(())
    }
}

/// Complex field samples on the uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    pub geometry: FieldGeometry,
    pub x: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl WaveField {
    /// Trapezoid approximation of `int_0^L |Psi|^2 dx`.
    pub fn norm_sqr(&self) -> f64 {
        trapezoid(self.geometry.dx(), self.values.iter().map(|z| z.norm_sqr()))
    }
}

fn trapezoid<I: Iterator<Item = f64>>(dx: f64, samples: I) -> f64 {
    let mut total = 0.0;
    let mut first = None;
    let mut last = 0.0;
    for y in samples {
        if first.is_none() {
            first = Some(y);
        }
        total += y;
        last = y;
    }
    dx * (total - 0.5 * (first.unwrap_or(0.0) + last))
}

fn check_coefficients(coeffs: &[Complex64], spectrum: &ModeSpectrum) -> Result<()> {
    if coeffs.len() != spectrum.len() {
        return Err(Error::InvalidProblem(format!(
            "{} coefficients for {} modes",
            coeffs.len(),
            spectrum.len()
        )));
    }
    Ok(())
}

fn synthesize(
    coeffs: &[Complex64],
    t: f64,
    spectrum: &ModeSpectrum,
    geometry: &FieldGeometry,
    basis: fn(f64) -> f64,
) -> Result<WaveField> {
    geometry.check(spectrum)?;
    check_coefficients(coeffs, spectrum)?;
    let x = geometry.grid();
    let k0 = geometry.wavenumber0();
    let w0 = spectrum.base_frequency();
    let mut values = vec![Complex64::new(0.0, 0.0); x.len()];
    for (&idx, &c) in spectrum.indices().iter().zip(coeffs) {
        let amp = c * phase::phase_at_time(w0, -(idx as i64), t);
        let kn = k0 * idx as f64;
        for (val, &xk) in values.iter_mut().zip(&x) {
            *val += amp * basis(kn * xk);
        }
    }
    Ok(WaveField {
        geometry: *geometry,
        x,
        values,
    })
}

/// `Psi(x, t) = sum_n a_n exp(-i w_n t) sin(K_n x)` on the grid.
pub fn reconstruct(
    coeffs: &[Complex64],
    t: f64,
    spectrum: &ModeSpectrum,
    geometry: &FieldGeometry,
) -> Result<WaveField> {
    synthesize(coeffs, t, spectrum, geometry, f64::sin)
}

/// `T Psi(x, t) = sum_n a_n exp(-i w_n t) cos(K_n x)`: the same coefficients
/// on the cosine basis.
pub fn apply_t(
    coeffs: &[Complex64],
    t: f64,
    spectrum: &ModeSpectrum,
    geometry: &FieldGeometry,
) -> Result<WaveField> {
    synthesize(coeffs, t, spectrum, geometry, f64::cos)
}

/// `a_n(t) = exp(i w_n t) (2 / L) int_0^L Psi sin(K_n x) dx`, by the
/// composite trapezoid rule on the field's grid.
pub fn extract_coefficients(
    field: &WaveField,
    t: f64,
    spectrum: &ModeSpectrum,
) -> Result<Vec<Complex64>> {
    let geometry = &field.geometry;
    geometry.check(spectrum)?;
    let k0 = geometry.wavenumber0();
    let dx = geometry.dx();
    let w0 = spectrum.base_frequency();
    let scale = 2.0 / geometry.length;
    Ok(spectrum
        .indices()
        .iter()
        .map(|&idx| {
            let kn = k0 * idx as f64;
            let mut acc = Complex64::new(0.0, 0.0);
            let last = field.values.len() - 1;
            for (k, (val, &xk)) in field.values.iter().zip(&field.x).enumerate() {
                let w = if k == 0 || k == last { 0.5 } else { 1.0 };
                acc += *val * (w * (kn * xk).sin());
            }
            phase::phase_at_time(w0, idx as i64, t) * (scale * dx * acc)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{linear_spectrum, ModeSpectrum};

    fn one(n: usize, at: usize) -> Vec<Complex64> {
        let mut c = vec![Complex64::new(0.0, 0.0); n];
        c[at] = Complex64::new(1.0, 0.0);
        c
    }

    #[test]
    fn single_mode_is_a_sine() {
        let s = linear_spectrum(3, 1.0).unwrap();
        let g = FieldGeometry::unit(s.max_index());
        let f = reconstruct(&one(3, 0), 0.0, &s, &g).unwrap();
        for (z, &x) in f.values.iter().zip(&f.x) {
            assert!((z.re - x.sin()).abs() < 1e-15);
            assert_eq!(z.im, 0.0);
        }
        let t = apply_t(&one(3, 0), 0.0, &s, &g).unwrap();
        for (z, &x) in t.values.iter().zip(&t.x) {
            assert!((z.re - x.cos()).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_coefficients_give_zero_field() {
        let s = linear_spectrum(4, 1.0).unwrap();
        let g = FieldGeometry::unit(4);
        let f = reconstruct(&[Complex64::new(0.0, 0.0); 4], 1.3, &s, &g).unwrap();
        assert!(f.values.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn phase_wraps_after_one_period() {
        let s = linear_spectrum(2, 1.0).unwrap();
        let g = FieldGeometry::unit(2);
        let a = reconstruct(&one(2, 0), 0.0, &s, &g).unwrap();
        let b = reconstruct(&one(2, 0), TAU, &s, &g).unwrap();
        for (u, w) in a.values.iter().zip(&b.values) {
            assert!((u - w).norm() < 1e-14);
        }
    }

    #[test]
    fn pure_modes_extract_to_unit_vectors() {
        let s = ModeSpectrum::new(1.0, vec![1, 2, 5, 7]).unwrap();
        let g = FieldGeometry::unit(s.max_index());
        for at in 0..4 {
            let f = reconstruct(&one(4, at), 0.4, &s, &g).unwrap();
            let c = extract_coefficients(&f, 0.4, &s).unwrap();
            for (k, z) in c.iter().enumerate() {
                let want = if k == at { 1.0 } else { 0.0 };
                assert!((z - Complex64::new(want, 0.0)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn boundary_values_vanish() {
        let s = ModeSpectrum::new(1.0, vec![1, 3, 8]).unwrap();
        let g = FieldGeometry::unit(8);
        let c = vec![
            Complex64::new(0.3, -1.0),
            Complex64::new(2.0, 0.5),
            Complex64::new(-0.7, 0.1),
        ];
        let f = reconstruct(&c, 2.2, &s, &g).unwrap();
        assert!(f.values[0].norm() < 1e-15);
        assert!(f.values.last().unwrap().norm() < 1e-13);
    }

    #[test]
    fn t_operator_preserves_the_grid_norm() {
        let s = ModeSpectrum::new(1.0, vec![1, 2, 4, 9]).unwrap();
        let g = FieldGeometry::unit(9);
        let c = vec![
            Complex64::new(0.3, -1.0),
            Complex64::new(2.0, 0.5),
            Complex64::new(-0.7, 0.1),
            Complex64::new(0.0, 0.9),
        ];
        let psi = reconstruct(&c, 0.8, &s, &g).unwrap();
        let tpsi = apply_t(&c, 0.8, &s, &g).unwrap();
        let expected: f64 = c.iter().map(|z| z.norm_sqr()).sum::<f64>() * g.length / 2.0;
        assert!((psi.norm_sqr() - expected).abs() < 1e-10);
        assert!((tpsi.norm_sqr() - psi.norm_sqr()).abs() < 1e-10);
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let s = linear_spectrum(5, 1.0).unwrap();
        let mut g = FieldGeometry::unit(5);
        g.intervals = 19;
        assert!(matches!(
            reconstruct(&one(5, 0), 0.0, &s, &g),
            Err(Error::Resolution { .. })
        ));
        g.intervals = 20;
        assert!(reconstruct(&one(5, 0), 0.0, &s, &g).is_ok());
    }

    #[test]
    fn dispersion_mismatch_is_rejected() {
        let s = linear_spectrum(3, 2.0).unwrap();
        let g = FieldGeometry::unit(3);
        assert!(reconstruct(&one(3, 0), 0.0, &s, &g).is_err());
        let g = FieldGeometry::for_base_frequency(2.0, 3);
        assert!(reconstruct(&one(3, 0), 0.0, &s, &g).is_ok());
    }
}
