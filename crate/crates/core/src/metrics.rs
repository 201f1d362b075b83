//! Functionals on polynomials: winding number, the coefficient-side winding
//! sum `Σ n|c_n|²`, oscillation of the modulus, modulus of continuity and
//! total variation.

use crate::error::{Error, Result};
use crate::numeric::{next_pow2, CompensatedSum};
use crate::report::Check;
use crate::trigpoly::{TrigPoly, MAX_GRID};
use serde::Serialize;
use std::f64::consts::{PI, TAU};

pub const DEFAULT_MODULUS_FLOOR: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WindingResult {
    pub value: i64,
    pub min_modulus: f64,
    pub grid_size: usize,
    pub max_arg_step: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct WindingOptions {
    pub modulus_floor: f64,
    pub max_grid: usize,
}

impl Default for WindingOptions {
    fn default() -> Self {
        WindingOptions { modulus_floor: DEFAULT_MODULUS_FLOOR, max_grid: MAX_GRID }
    }
}

pub fn winding(p: &TrigPoly) -> Result<WindingResult> {
    winding_with(p, &WindingOptions::default())
}

/// Sums principal-branch argument increments around a grid, doubling the
/// grid until every increment is below `π/2`.
pub fn winding_with(p: &TrigPoly, opts: &WindingOptions) -> Result<WindingResult> {
    let mut k = p.cert_grid(16, 16);
    loop {
        let values = p.grid_values(k)?;
        let min_modulus = values.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
        if !(min_modulus > opts.modulus_floor) {
            return Err(Error::CurveTooClose { min_modulus, grid: k });
        }
        let mut total = CompensatedSum::new();
        let mut max_step: f64 = 0.0;
        for i in 0..k {
            let step = (values[(i + 1) % k] * values[i].conj()).arg();
            max_step = max_step.max(step.abs());
            total.add(step);
        }
        if max_step < PI / 2.0 {
            let turns = total.value() / TAU;
            let value = turns.round();
            debug_assert!((turns - value).abs() < 1e-6);
            return Ok(WindingResult {
                value: value as i64,
                min_modulus,
                grid_size: k,
                max_arg_step: max_step,
            });
        }
        if k >= opts.max_grid {
            return Err(Error::NoCertification { max_step, grid: k });
        }
        k *= 2;
    }
}

/// `Σ_{|n| ≤ N} n|c_n|²`; `None` sums the whole spectrum.
pub fn fourier_winding_sum(p: &TrigPoly, n_max: Option<u64>) -> f64 {
    p.coeffs()
        .filter(|(n, _)| n_max.is_none_or(|m| n.unsigned_abs() <= m))
        .map(|(n, c)| n as f64 * c.norm_sqr())
        .collect::<CompensatedSum>()
        .value()
}

/// Grid and certified brackets for `max|p|` and `min|p|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModulusRange {
    pub grid_min: f64,
    pub grid_max: f64,
    /// Certified lower bound for `min|p|`.
    pub min_lo: f64,
    /// Certified upper bound for `max|p|`.
    pub max_hi: f64,
    pub grid_size: usize,
}

impl ModulusRange {
    /// Conservative oscillation `max_hi − min_lo`.
    pub fn oscillation(&self) -> f64 {
        self.max_hi - self.min_lo
    }

    /// Conservative `‖|p| − 1‖∞`.
    pub fn dist_to_one(&self) -> f64 {
        (self.max_hi - 1.0).max(1.0 - self.min_lo).max(0.0)
    }
}

/// Range of `|p|` on a grid of `factor·deg` points (at least `floor`), with
/// the Bernstein slack `π·deg/K·‖p‖∞` applied to both ends.
pub fn modulus_range_on(p: &TrigPoly, factor: u64, floor: usize) -> ModulusRange {
    let k = p.cert_grid(factor, floor);
    let values = p.grid_values(k).expect("power-of-two grid");
    modulus_range_from_values(p, &values)
}

pub(crate) fn modulus_range_from_values(p: &TrigPoly, values: &[num_complex::Complex64]) -> ModulusRange {
    let k = values.len();
    let (mut grid_min, mut grid_max) = (f64::INFINITY, 0.0f64);
    for z in values {
        let m = z.norm();
        grid_min = grid_min.min(m);
        grid_max = grid_max.max(m);
    }
    // Between grid points |p| moves by at most ‖p′‖∞/(2K); the Bernstein
    // form π·deg/K·‖p‖∞ is kept when it is smaller.
    let dp = p.derivative();
    let dp_sup = dp.sup_norm_certified().hi;
    let half_step = dp_sup / (2.0 * k as f64);
    let max_hi = p.sup_hi_from_grid(grid_max, k).min(grid_max + half_step);
    let slack = (PI * p.degree() as f64 / k as f64 * max_hi).min(half_step).min(2.0 * max_hi);
    // Second order: q = |p|² has q′ = 2 Re(p̄p′) and |q″| ≤ 2‖p′‖² + 2‖p‖‖p″‖,
    // so q moves by at most (max|q′(t_k)| + ‖q″‖/(2K))/(2K) off the grid.
    let mut min_lo = (grid_min - slack).max(0.0);
    if p.degree() > 0 {
        let dv = dp.grid_values(k).expect("power-of-two grid");
        let q1 = values.iter().zip(&dv).map(|(z, w)| 2.0 * (z.conj() * w).re.abs()).fold(0.0, f64::max);
        let q2 = 2.0 * dp_sup * dp_sup + 2.0 * max_hi * p.second_derivative().sup_norm_certified().hi;
        let h = 1.0 / (2.0 * k as f64);
        let q_slack = (q1 + q2 * h) * h;
        min_lo = min_lo.max((grid_min * grid_min - q_slack).max(0.0).sqrt());
    }
    ModulusRange {
        grid_min,
        grid_max,
        min_lo,
        max_hi,
        grid_size: k,
    }
}

/// Range of `|p|` with the default oversampling used by [`oscillation`].
pub fn modulus_range(p: &TrigPoly) -> ModulusRange {
    modulus_range_on(p, 64, 4096)
}

/// Conservative `max|p| − min|p|`.
pub fn oscillation(p: &TrigPoly) -> f64 {
    modulus_range(p).oscillation()
}

/// Upper bound for `sup_{|x−y| ≤ δ} |p(x) − p(y)|`.
///
/// Grid pairs up to one extra grid step apart are compared, then the
/// Bernstein slack for the two off-grid endpoints is added. Very large
/// grid-times-window products fall back to `δ‖p′‖∞`.
pub fn modulus_of_continuity(p: &TrigPoly, delta: f64) -> f64 {
    assert!(delta > 0.0 && delta <= 0.5, "δ must lie in (0, 1/2]");
    if p.degree() == 0 {
        return 0.0;
    }
    let sup = p.sup_norm_certified().hi;
    let lipschitz = (delta * p.derivative().sup_norm_certified().hi).min(2.0 * sup);
    let k = next_pow2(16 * p.degree())
        .max(next_pow2((64.0 / delta).ceil() as u64))
        .clamp(4096, MAX_GRID);
    let window = ((delta * k as f64).ceil() as usize + 1).min(k / 2);
    if (k as u64) * (window as u64) > 1 << 28 {
        return lipschitz;
    }
    let values = p.grid_values(k).expect("power-of-two grid");
    let mut best: f64 = 0.0;
    for i in 0..k {
        let a = values[i];
        for m in 1..=window {
            best = best.max((values[(i + m) % k] - a).norm());
        }
    }
    let slack = 2.0 * PI * p.degree() as f64 / k as f64 * sup;
    (best + slack).min(lipschitz)
}

/// `Σ |x_{k+1} − x_k|` along the sequence; a lower bound for the variation
/// of any function with these samples.
pub fn total_variation(samples: &[f64]) -> f64 {
    samples.windows(2).map(|w| (w[1] - w[0]).abs()).collect::<CompensatedSum>().value()
}

/// Variation around the closed grid, including the wrap from the last sample
/// back to the first.
pub fn periodic_variation(samples: &[f64]) -> f64 {
    match (samples.first(), samples.last()) {
        (Some(first), Some(last)) => total_variation(samples) + (first - last).abs(),
        _ => 0.0,
    }
}

/// Checks `V(√h₊) ≤ √‖h‖_{C²}` (with a 1% grid allowance), where
/// `‖h‖_{C²} = max(‖h‖∞, ‖h″‖∞)`.
pub fn check_sqrt_plus_variation(h: &TrigPoly) -> Result<Check> {
    if h.real_defect() > 1e-12 * h.max_abs_coeff().max(1e-300) {
        return Err(Error::Precondition("variation check needs a real-valued polynomial".into()));
    }
    let k = h.cert_grid(16, 1 << 16);
    let values = h.grid_values(k)?;
    let roots: Vec<f64> = values.iter().map(|z| z.re.max(0.0).sqrt()).collect();
    let variation = periodic_variation(&roots);
    let c2 = h.sup_norm_certified().hi.max(h.second_derivative().sup_norm_certified().hi);
    Ok(Check::at_most("sqrt_plus_variation", variation, 1.01 * c2.sqrt(), k))
}
