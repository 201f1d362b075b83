//! Small numeric helpers shared across modules.

use num_complex::Complex64;
use std::f64::consts::TAU;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// `e^{2πix}`, exact at multiples of a quarter turn.
pub fn unit(x: f64) -> Complex64 {
    let r = x - x.round();
    let quarter = (4.0 * r).round();
    let s = r - quarter / 4.0;
    let (sin, cos) = (TAU * s).sin_cos();
    match quarter as i64 {
        0 => Complex64::new(cos, sin),
        1 => Complex64::new(-sin, cos),
        -1 => Complex64::new(sin, -cos),
        _ => Complex64::new(-cos, -sin),
    }
}

/// `e^{2πi·n·a}` with the product reduced modulo one before the trig call.
pub fn unit_freq(n: i64, a: f64) -> Complex64 {
    let a = a - a.floor();
    unit((n as f64 * a).rem_euclid(1.0))
}

/// Distance from `x` to the nearest integer.
pub fn dist_to_int(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// Smallest power of two that is at least `n` (and at least 1).
pub fn next_pow2(n: u64) -> usize {
    n.max(1).next_power_of_two() as usize
}

/// Shortest decimal string that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// Reduce `t` into `[0, 1)`.
pub fn wrap01(t: f64) -> f64 {
    let w = t - t.floor();
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_is_exact_on_quarter_turns() {
        assert_eq!(unit(0.0), Complex64::new(1.0, 0.0));
        assert_eq!(unit(0.25), Complex64::new(0.0, 1.0));
        assert_eq!(unit(0.5), Complex64::new(-1.0, 0.0));
        assert_eq!(unit(-0.25), Complex64::new(0.0, -1.0));
        assert_eq!(unit(3.75), Complex64::new(0.0, -1.0));
    }

    #[test]
    fn unit_matches_libm_elsewhere() {
        for k in 0..1000 {
            let x = k as f64 * 0.001_37 - 0.4;
            let z = unit(x);
            let (s, c) = (TAU * x).sin_cos();
            assert!((z.re - c).abs() < 1e-15 && (z.im - s).abs() < 1e-15, "x = {x}");
        }
    }

    #[test]
    fn compensated_sum_recovers_cancellation() {
        let s: CompensatedSum = [1e16, 1.0, -1e16].into_iter().collect();
        assert_eq!(s.value(), 1.0);
    }

    #[test]
    fn shortest_float_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 1e22, -0.0, f64::MIN_POSITIVE] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
    }
}
