//! Cesàro-weighted approximants of step functions.

use crate::error::{Error, Result};
use crate::fft;
use crate::numeric::unit;
use crate::trigpoly::TrigPoly;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Fejér mean of `r₁ = 1_{[0,1/2]} − 1_{[1/2,1]}`:
/// `Σ_{|n|<M} r̂₁(n)(M−|n|)/M e(nt)` with `r̂₁(n) = 2/(πin)` for odd `n`, else 0.
pub fn fejer_rademacher(m: u32) -> TrigPoly {
    assert!(m >= 4, "Fejér order must be at least 4");
    let mm = i64::from(m);
    TrigPoly::from_coeffs((1..mm).step_by(2).flat_map(|n| {
        let w = (mm - n) as f64 / mm as f64;
        let c = Complex64::new(0.0, -2.0 / (PI * n as f64)) * w;
        [(n, c), (-n, c.conj())]
    }))
}

/// Fejér mean of `1_{[0,w]}`; requires `M > 1/w²`.
pub fn fejer_indicator(width: f64, m: u32) -> Result<TrigPoly> {
    if !(width > 0.0 && width < 1.0) {
        return Err(Error::Precondition(format!("indicator width {width} outside (0,1)")));
    }
    if f64::from(m) <= width.powi(-2) {
        return Err(Error::Precondition(format!(
            "Fejér order {m} must exceed 1/width² = {:.1}",
            width.powi(-2)
        )));
    }
    let mm = i64::from(m);
    let mut coeffs = vec![(0, Complex64::new(width, 0.0))];
    for n in 1..mm {
        let w = (mm - n) as f64 / mm as f64;
        // ∫₀^w e(−nt) dt = (1 − e(−nw)) / (2πin)
        let c = (Complex64::new(1.0, 0.0) - unit(-(n as f64) * width))
            / Complex64::new(0.0, 2.0 * PI * n as f64)
            * w;
        coeffs.push((n, c));
        coeffs.push((-n, c.conj()));
    }
    Ok(TrigPoly::from_coeffs(coeffs))
}

/// `t ↦ p(m·t)`.
pub fn scale_copy(p: &TrigPoly, m: i64) -> TrigPoly {
    p.dilate(m)
}

/// Trigonometric approximation of a continuous function from grid samples:
/// de la Vallée Poussin weights (1 up to `degree/2`, linear to 0 at `degree`).
pub fn vallee_poussin(values: &[Complex64], degree: u64) -> TrigPoly {
    let k = values.len();
    assert!(k.is_power_of_two() && (k as u64) > 2 * degree);
    let mut buf = values.to_vec();
    fft::forward(&mut buf);
    let d = degree as i64;
    let half = (d / 2).max(1);
    let scale = 1.0 / k as f64;
    TrigPoly::from_coeffs((-d..=d).map(|n| {
        let a = n.abs();
        let w = if a <= half { 1.0 } else { (d + 1 - a) as f64 / (d + 1 - half) as f64 };
        (n, buf[n.rem_euclid(k as i64) as usize] * (scale * w))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::dist_to_int;

    /// r̂₁(n) by midpoint quadrature.
    fn rademacher_coeff_quadrature(n: i64) -> Complex64 {
        let k = 1 << 14;
        let mut s = Complex64::default();
        for i in 0..k {
            let t = (i as f64 + 0.5) / k as f64;
            let r = if t < 0.5 { 1.0 } else { -1.0 };
            s += unit(-(n as f64) * t) * r;
        }
        s / k as f64
    }

    #[test]
    fn rademacher_coefficients_match_quadrature() {
        let m = 32;
        let psi = fejer_rademacher(m);
        assert_eq!(psi.coeff(0), Complex64::default());
        for n in 1..8i64 {
            let exact = rademacher_coeff_quadrature(n);
            let w = (32 - n) as f64 / 32.0;
            assert!((psi.coeff(n) - exact * w).norm() < 1e-6, "n = {n}");
            if n % 2 == 0 {
                assert_eq!(psi.coeff(n), Complex64::default());
                assert!(exact.norm() < 1e-6);
            }
        }
        assert!(psi.real_defect() == 0.0);
    }

    #[test]
    fn rademacher_approximant_is_bounded_and_close_off_jumps() {
        for m in [8u32, 32, 256] {
            let psi = fejer_rademacher(m);
            let k = 1 << 16;
            let v = psi.grid_values(k).unwrap();
            let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(max <= 1.0 + 1e-9);
            let radius = f64::from(m).powf(-0.5);
            let mut fitted: f64 = 0.0;
            for (i, z) in v.iter().enumerate() {
                let t = i as f64 / k as f64;
                if dist_to_int(2.0 * t) > radius {
                    let r = if t < 0.5 { 1.0 } else { -1.0 };
                    fitted = fitted.max((r - z.re).abs() / radius);
                }
            }
            assert!(fitted < 5.0, "M = {m}: fitted constant {fitted}");
        }
        let at_quarter = fejer_rademacher(256).evaluate(0.25).re;
        assert!((at_quarter - 1.0).abs() < 0.1);
    }

    #[test]
    fn indicator_mean_and_shape() {
        let w = 0.125;
        let p = fejer_indicator(w, 4096).unwrap();
        assert!((p.coeff(0).re - w).abs() < 1e-15);
        assert!((p.evaluate(w / 2.0).re - 1.0).abs() < 0.1);
        assert!(p.evaluate(0.5).re.abs() < 0.1);
        assert!(p.real_defect() < 1e-15);
        assert!(fejer_indicator(w, 64).is_err());
        assert!(fejer_indicator(1.5, 4096).is_err());
    }

    #[test]
    fn indicator_fitted_constant() {
        let w = 0.25;
        let m = 256;
        let p = fejer_indicator(w, m).unwrap();
        let k = 1 << 14;
        let v = p.grid_values(k).unwrap();
        let radius = f64::from(m).powf(-0.5);
        let mut fitted: f64 = 0.0;
        for (i, z) in v.iter().enumerate() {
            let t = i as f64 / k as f64;
            let d = dist_to_int(t).min(dist_to_int(t - w));
            if d > radius {
                let target = if t < w { 1.0 } else { 0.0 };
                fitted = fitted.max((z.re - target).abs() / radius);
            }
            assert!(z.norm() <= 1.0 + 1e-9);
        }
        assert!(fitted < 5.0, "{fitted}");
    }

    #[test]
    fn scale_copy_cases() {
        let p = fejer_rademacher(8);
        assert_eq!(scale_copy(&p, 1), p);
        assert_eq!(scale_copy(&TrigPoly::monomial(1, 1.0), 3), TrigPoly::monomial(3, 1.0));
        let q = scale_copy(&p, 5);
        for t in [0.013, 0.2, 0.71] {
            assert!((q.evaluate(t) - p.evaluate((5.0 * t) % 1.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn vallee_poussin_reproduces_low_degree() {
        let p = TrigPoly::from_real_coeffs([(0, 1.0), (2, 0.5), (-3, 0.25)]);
        let v = p.grid_values(256).unwrap();
        let q = vallee_poussin(&v, 8);
        for n in -8..=8 {
            assert!((q.coeff(n) - p.coeff(n)).norm() < 1e-14);
        }
    }
}
