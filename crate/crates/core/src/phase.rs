//! Accurate evaluation of `exp(i * omega * t)` for large arguments.
//!
//! Frequencies are `omega_0 * d` with integer `d`, times are `m * h` with an
//! integer or half-integer step count `m`. Both products are carried in
//! double-double form and the angle is reduced modulo `2 pi` before the
//! sine/cosine, so phase error does not grow with the step count.

use num_complex::Complex64;

const TWO_PI_HI: f64 = std::f64::consts::TAU;
const TWO_PI_LO: f64 = 2.449_293_598_294_706_4e-16;

#[inline]
fn split(a: f64) -> (f64, f64) {
    const SPLITTER: f64 = 134_217_729.0; // 2^27 + 1
    let t = SPLITTER * a;
    let hi = t - (t - a);
    (hi, a - hi)
}

/// Dekker's exact product; avoids `mul_add`, which is a slow library call
/// on targets without hardware FMA.
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    (p, ((ah * bh - p) + ah * bl + al * bh) + al * bl)
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

impl DoubleDouble {
    /// Exact product of two doubles.
    pub fn product(a: f64, b: f64) -> Self {
        let (hi, lo) = two_prod(a, b);
        Self { hi, lo }
    }

    pub fn times(self, other: Self) -> Self {
        let (p, e) = two_prod(self.hi, other.hi);
        let e = e + (self.hi * other.lo + self.lo * other.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }

    /// Remainder modulo `2 pi`, in roughly `[-pi, pi]`.
    pub fn reduce_two_pi(self) -> Self {
        let q = (self.hi / TWO_PI_HI).round();
        if q == 0.0 {
            return self;
        }
        let (p, pe) = two_prod(q, TWO_PI_HI);
        let (s, se) = two_sum(self.hi, -p);
        let lo = se - pe + self.lo - q * TWO_PI_LO;
        let (hi, lo) = quick_two_sum(s, lo);
        Self { hi, lo }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// `exp(i * theta)` for a double-double angle.
pub fn cis(theta: DoubleDouble) -> Complex64 {
    let r = theta.reduce_two_pi();
    let (s, c) = r.hi.sin_cos();
    // first-order correction for the low word
    Complex64::new(c - s * r.lo, s + c * r.lo)
}

/// Phase `exp(i * omega_0 * d * m * h)` where `d` is an integer frequency
/// multiple and `m` a step count (possibly half-integer).
pub fn phase_at(base_frequency: f64, multiple: i64, steps: f64, h: f64) -> Complex64 {
    let omega = DoubleDouble::product(base_frequency, multiple as f64);
    let t = DoubleDouble::product(steps, h);
    cis(omega.times(t))
}

/// Phase `exp(i * omega_0 * d * t)` for an arbitrary time value.
pub fn phase_at_time(base_frequency: f64, multiple: i64, t: f64) -> Complex64 {
    phase_at(base_frequency, multiple, 1.0, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduces_small_angles_unchanged() {
        let z = phase_at(1.0, 1, 1.0, 0.5);
        assert!((z.re - 0.5f64.cos()).abs() < 1e-16);
        assert!((z.im - 0.5f64.sin()).abs() < 1e-16);
    }

    #[test]
    fn agrees_with_naive_evaluation_when_argument_is_moderate() {
        for d in [-37i64, -1, 1, 5, 123] {
            for k in [0.0, 0.5, 17.0, 1234.5] {
                let h = 0.0137;
                let z = phase_at(0.7, d, k, h);
                let theta = 0.7 * d as f64 * k * h;
                assert!((z.re - theta.cos()).abs() < 1e-12, "{d} {k}");
                assert!((z.im - theta.sin()).abs() < 1e-12, "{d} {k}");
            }
        }
    }

    #[test]
    fn reduction_is_accurate_for_huge_arguments() {
        // theta = 2 pi * 10^6 + 0.25, built in double-double.
        let big = DoubleDouble::product(1.0e6, TWO_PI_HI);
        let theta = DoubleDouble {
            hi: big.hi,
            lo: big.lo + 1.0e6 * TWO_PI_LO + 0.25,
        };
        let r = theta.reduce_two_pi().to_f64();
        assert!((r - 0.25).abs() < 1e-14, "{r}");
    }

    #[test]
    fn unit_modulus() {
        for m in 0..200 {
            let z = phase_at(1.0, 9_999, m as f64 * 1234.5, 0.001_9);
            assert!((z.norm() - 1.0).abs() < 1e-15);
        }
    }
}
