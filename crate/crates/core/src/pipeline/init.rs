//! The initial pair: `f₁` winds once around the origin, `g₁` has the same
//! coefficient moduli and winds zero times.

use super::PartnerPair;
use crate::blocks::flatten_best;
use crate::error::{Error, Result};
use crate::metrics::{fourier_winding_sum, winding};
use crate::numeric::{next_pow2, unit, unit_freq};
use crate::report::Check;
use crate::trigpoly::{moduli_equal, TrigPoly, MAX_GRID};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::TAU;

#[derive(Clone, Debug)]
pub struct InitOptions {
    /// Starting and largest de la Vallée Poussin half-degree.
    pub m_floor: u64,
    pub m_cap: u64,
    pub k_flat: f64,
    /// Sign vectors tried; a failed first round is retried with four times as many.
    pub attempts: usize,
    /// Ceiling for the measured constant in `‖f₁ − 1‖₂ ≤ K√ε`.
    pub ceiling: f64,
}

impl Default for InitOptions {
    fn default() -> Self {
        InitOptions { m_floor: 16, m_cap: 1 << 17, k_flat: 3.0, attempts: 64, ceiling: 5.0 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InitReport {
    pub eps: f64,
    pub m: u64,
    pub degree: u64,
    /// Certified upper bound for `‖f₁ − φ‖∞` over the whole circle.
    pub approx_error: f64,
    pub approx_grid: usize,
    pub l2_to_one: f64,
    /// `‖f₁ − 1‖₂ / √ε`.
    pub k_l2: f64,
    /// `|f̂₁(0)|`.
    pub center: f64,
    /// Certified sup of the sign-flipped non-constant part of `g₁`.
    pub flatten_sup: f64,
    pub flatten_attempt: usize,
    pub fourier_sum_f: f64,
    pub fourier_sum_g: f64,
    pub checks: Vec<Check>,
}

/// `φ(t) = e(t/ε)` on `[0, ε]` and 1 on `[ε, 1]`.
pub fn phi_init(t: f64, eps: f64) -> Complex64 {
    let t = t - t.floor();
    if t <= eps {
        unit(t / eps)
    } else {
        Complex64::new(1.0, 0.0)
    }
}

/// Exact Fourier coefficient `φ̂(n)`.
pub fn phi_init_coeff(n: i64, eps: f64) -> Complex64 {
    let e_n = unit_freq(-n, eps);
    let one = Complex64::new(1.0, 0.0);
    // ∫₀^ε e(t(1/ε − n)) dt
    let k = 1.0 / eps - n as f64;
    let head = if k.abs() < 1e-12 { Complex64::new(eps, 0.0) } else { (e_n - one) / Complex64::new(0.0, TAU * k) };
    // ∫_ε^1 e(−nt) dt
    let tail = if n == 0 { Complex64::new(1.0 - eps, 0.0) } else { (e_n - one) / Complex64::new(0.0, TAU * n as f64) };
    head + tail
}

/// de la Vallée Poussin mean of `φ` of degree `2m − 1`.
fn approximant(eps: f64, m: u64) -> TrigPoly {
    let m = m as i64;
    TrigPoly::from_coeffs((-2 * m + 1..2 * m).map(|n| {
        let w = if n.abs() <= m { 1.0 } else { (2 * m - n.abs()) as f64 / m as f64 };
        (n, phi_init_coeff(n, eps) * w)
    }))
}

/// Certified `‖p − φ‖∞`: grid maximum plus half a grid step times the
/// Lipschitz bound `‖p′‖∞ + 2π/ε`.
fn distance_to_phi(p: &TrigPoly, eps: f64, target: f64) -> Result<(f64, usize)> {
    let lip = p.derivative().sup_norm_certified().hi + TAU / eps;
    let mut k = next_pow2(8 * p.degree()).max(1 << 16);
    while lip / (2.0 * k as f64) > target / 4.0 && k < MAX_GRID {
        k *= 2;
    }
    let values = p.grid_values(k)?;
    let max = values
        .iter()
        .enumerate()
        .map(|(i, z)| (z - phi_init(i as f64 / k as f64, eps)).norm())
        .fold(0.0, f64::max);
    Ok((max + lip / (2.0 * k as f64), k))
}

pub fn init_partners(eps: f64, seed: u64) -> Result<(PartnerPair, InitReport)> {
    init_partners_with(eps, seed, &InitOptions::default())
}

/// Builds `f₁` with `‖f₁ − φ‖∞ < ε` and `g₁ = f̂₁(0) + Σ ξ_n f̂₁(n)e(nt)` with
/// signs chosen so that `g₁` stays in a disc around `f̂₁(0)` avoiding 0.
pub fn init_partners_with(eps: f64, seed: u64, opts: &InitOptions) -> Result<(PartnerPair, InitReport)> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::Precondition(format!("initial ε = {eps} outside (0, 1/2)")));
    }
    let mut m = opts.m_floor;
    let mut trace = Vec::new();
    let (f, approx_error, approx_grid) = loop {
        let p = approximant(eps, m);
        let (err, k) = distance_to_phi(&p, eps, eps)?;
        trace.push((m, err / eps));
        if err < eps {
            break (p, err, k);
        }
        if m >= opts.m_cap {
            return Err(Error::AdaptiveCap { what: "initial approximant degree".into(), trace });
        }
        m *= 2;
    };

    let center = f.coeff(0);
    let h: Vec<(i64, Complex64)> = f.coeffs().filter(|&(n, _)| n != 0).collect();
    let mut best = flatten_best(&h, seed, opts.k_flat, opts.attempts)?;
    if best.sup.hi >= center.norm() {
        best = flatten_best(&h, seed, opts.k_flat, 4 * opts.attempts)?;
    }
    if best.sup.hi >= center.norm() {
        return Err(Error::Flatten { best: best.sup.hi, target: center.norm() });
    }
    let g = &TrigPoly::constant(center) + &best.apply(&h);

    let wf = winding(&f)?;
    let wg = winding(&g)?;
    let moduli = moduli_equal(&f, &g, 1e-12 * f.max_abs_coeff());
    let l2_to_one = (&f - &TrigPoly::constant(1.0)).l2_norm();
    let k_l2 = l2_to_one / eps.sqrt();
    let fourier_sum_f = fourier_winding_sum(&f, None);
    let fourier_sum_g = fourier_winding_sum(&g, None);
    let checks = vec![
        Check::below("‖f₁ − φ‖∞", approx_error, eps, approx_grid),
        Check::at_most("wind f₁ = 1", (wf.value - 1).abs() as f64, 0.0, wf.grid_size),
        Check::at_most("wind g₁ = 0", wg.value.abs() as f64, 0.0, wg.grid_size),
        Check::below("‖g₁ − f̂₁(0)‖∞ < |f̂₁(0)|", best.sup.hi, center.norm(), best.sup.grid_size),
        Check::at_most("moduli residual", moduli.residual, 1e-12, 0),
        Check::at_most("‖f₁ − 1‖₂ / √ε", k_l2, opts.ceiling, 0),
    ];
    if let Some(c) = checks.iter().find(|c| !c.pass) {
        return Err(Error::Certificate(format!("initial pair: {} = {} against {}", c.name, c.value, c.bound)));
    }
    let report = InitReport {
        eps,
        m,
        degree: f.degree(),
        approx_error,
        approx_grid,
        l2_to_one,
        k_l2,
        center: center.norm(),
        flatten_sup: best.sup.hi,
        flatten_attempt: best.attempt,
        fourier_sum_f,
        fourier_sum_g,
        checks,
    };
    let pair = PartnerPair { f, g, winding_f: wf.value, winding_g: wg.value, moduli_residual: moduli.residual };
    Ok((pair, report))
}

/// Largest `ε` in `[lo, hi]` (to relative precision `2^{−steps}`) for which
/// [`init_partners_with`] certifies `wind g₁ = 0`, found by bisection.
/// Fails when even `lo` does not work.
pub fn calibrate_init_eps(lo: f64, hi: f64, steps: u32, seed: u64, opts: &InitOptions) -> Result<f64> {
    let works = |eps: f64| init_partners_with(eps, seed, opts).is_ok();
    if works(hi) {
        return Ok(hi);
    }
    if !works(lo) {
        return Err(Error::Precondition(format!("no initial pair certifies at ε = {lo}")));
    }
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..steps {
        let mid = 0.5 * (lo + hi);
        if works(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}
