//! The series `φ(x) = Σ_{j≥1} (−1)^{j+1} binom(2j,j) x^j / ((2j)!·4^j)` and its
//! inverse `ψ` near zero.

use crate::error::{Error, Result};

pub const DEFAULT_DOMAIN_CAP: f64 = 1.0;
const TAIL_TARGET: f64 = 1e-18;
const NEWTON_TOL: f64 = 1e-14;

#[derive(Clone, Debug)]
pub struct PhiPsi {
    /// `coeffs[j−1]` multiplies `x^j`.
    coeffs: Vec<f64>,
    domain_cap: f64,
}

impl Default for PhiPsi {
    fn default() -> Self {
        Self::new(DEFAULT_DOMAIN_CAP)
    }
}

impl PhiPsi {
    /// Truncates the series where the first omitted term is below `1e−18`
    /// on `[0, 4·domain_cap]`; the series alternates with decreasing terms
    /// there, so that term bounds the tail.
    pub fn new(domain_cap: f64) -> Self {
        assert!(domain_cap > 0.0 && domain_cap <= 4.0);
        let x_max = 4.0 * domain_cap;
        let mut coeffs = Vec::new();
        // binom(2j,j)/((2j)!·4^j) = 1/(4^j (j!)^2), built by the ratio −1/(4(j+1)²).
        let mut a = 0.25;
        let mut j = 1u32;
        loop {
            coeffs.push(a);
            let next = -a / (4.0 * f64::from(j + 1).powi(2));
            if (next * x_max.powi(j as i32 + 1)).abs() < TAIL_TARGET {
                break;
            }
            a = next;
            j += 1;
        }
        PhiPsi { coeffs, domain_cap }
    }

    pub fn truncation_order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn domain_cap(&self) -> f64 {
        self.domain_cap
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn phi(&self, x: f64) -> f64 {
        x * self.coeffs.iter().rev().fold(0.0, |acc, &a| acc * x + a)
    }

    pub fn phi_prime(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .rev()
            .fold(0.0, |acc, (i, &a)| acc * x + (i + 1) as f64 * a)
    }

    /// Largest admissible argument of [`PhiPsi::psi`].
    pub fn psi_max(&self) -> f64 {
        self.phi(self.domain_cap)
    }

    /// Solves `φ(x) = y` on `[0, domain_cap]` by safeguarded Newton iteration.
    pub fn psi(&self, y: f64) -> Result<f64> {
        let cap = self.psi_max();
        if !(0.0..=cap * (1.0 + 1e-12)).contains(&y) {
            return Err(Error::PsiDomain { value: y, cap });
        }
        let y = y.min(cap);
        if y == 0.0 {
            return Ok(0.0);
        }
        let (mut lo, mut hi) = (0.0, self.domain_cap);
        let mut x = (4.0 * y).min(self.domain_cap);
        for _ in 0..100 {
            let r = self.phi(x) - y;
            if r > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let mut next = x - r / self.phi_prime(x);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let step = (next - x).abs();
            x = next;
            if step <= NEWTON_TOL * x.max(1e-300) || hi - lo <= NEWTON_TOL * x {
                break;
            }
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Bessel J₀ through its integral representation (1/π)∫₀^π cos(x sin θ) dθ;
    /// the trapezoid rule on this periodic integrand converges geometrically.
    fn j0_integral(x: f64) -> f64 {
        let n = 256;
        let h = PI / n as f64;
        let mut s = 0.5 * (1.0 + (x * PI.sin()).cos());
        for k in 1..n {
            s += (x * (k as f64 * h).sin()).cos();
        }
        s * h / PI
    }

    fn j0_series(x: f64) -> f64 {
        let mut term = 1.0;
        let mut sum = 1.0;
        for j in 1..60 {
            term *= -(x / 2.0).powi(2) / (j as f64 * j as f64);
            sum += term;
        }
        sum
    }

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    #[test]
    fn coefficients_match_binomial_form() {
        let pp = PhiPsi::default();
        for (i, &a) in pp.coeffs().iter().take(10).enumerate() {
            let j = i as u32 + 1;
            let binom = factorial(2 * j) / (factorial(j) * factorial(j));
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            let want = sign / factorial(2 * j) * binom * 0.25f64.powi(j as i32);
            assert!((a - want).abs() <= 1e-15 * want.abs(), "j = {j}");
        }
    }

    #[test]
    fn phi_at_zero_and_one() {
        let pp = PhiPsi::default();
        assert_eq!(pp.phi(0.0), 0.0);
        assert_eq!(pp.psi(0.0).unwrap(), 0.0);
        assert!(pp.phi_prime(0.0) > 0.0);
        let want = 1.0 - j0_integral(1.0);
        assert!((pp.phi(1.0) - want).abs() < 1e-14);
        assert!((pp.phi(1.0) - 0.234_802).abs() < 5e-7);
    }

    #[test]
    fn bessel_identity_on_zero_two() {
        let pp = PhiPsi::default();
        for k in 0..=1000 {
            let d = 2.0 * k as f64 / 1000.0;
            let lhs = 1.0 - pp.phi(d * d);
            assert!((lhs - j0_series(d)).abs() <= 1e-12, "δ = {d}");
            assert!((lhs - j0_integral(d)).abs() <= 1e-12, "δ = {d}");
        }
    }

    #[test]
    fn psi_inverts_phi() {
        let pp = PhiPsi::default();
        for x in [0.1, 0.5, 1.0] {
            assert!((pp.psi(pp.phi(x)).unwrap() - x).abs() < 1e-10);
        }
        for k in 0..=200 {
            let y = pp.psi_max() * k as f64 / 200.0;
            let x = pp.psi(y).unwrap();
            assert!((pp.phi(x) - y).abs() < 1e-12);
        }
    }

    #[test]
    fn psi_rejects_out_of_domain() {
        let pp = PhiPsi::default();
        assert!(matches!(pp.psi(-1e-3), Err(Error::PsiDomain { .. })));
        assert!(matches!(pp.psi(0.3), Err(Error::PsiDomain { .. })));
    }

    #[test]
    fn truncation_tail_is_negligible() {
        let pp = PhiPsi::default();
        let j = pp.truncation_order() as i32 + 1;
        let next = 1.0 / (4f64.powi(j) * factorial(j as u32).powi(2));
        assert!(next * 4f64.powi(j) < 1e-18);
    }
}
