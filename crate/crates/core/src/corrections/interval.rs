use super::cert::CellGrid;
use super::CorrectionOptions;
use crate::blocks::PhiPsi;
use crate::error::{Error, Result};
use crate::fft;
use crate::metrics::modulus_range;
use crate::numeric::{next_pow2, wrap01};
use crate::report::{first_failure, Check};
use crate::simple_set::{Arc, SimpleSet};
use crate::trigpoly::TrigPoly;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::TAU;

/// A corrected polynomial with its certificate.
#[derive(Clone, Debug, Serialize)]
pub struct Corrected {
    #[serde(skip)]
    pub poly: TrigPoly,
    pub checks: Vec<Check>,
    /// Oscillation frequency of the accepted attempt (0 if nothing was corrected).
    pub m: u64,
    /// `(M, worst/ε)` for every attempt of the adaptive search.
    pub trace: Vec<(u64, f64)>,
}

impl Corrected {
    fn unchanged(f: &TrigPoly) -> Self {
        Corrected { poly: f.clone(), checks: Vec::new(), m: 0, trace: Vec::new() }
    }
}

/// Arc from `a` to `b` (wrapping through 0 when `b < a`).
pub(crate) fn arc_between(a: f64, b: f64) -> Arc {
    let len = if b > a && b - a <= 1.0 { b - a } else { wrap01(b - a) };
    Arc { start: wrap01(a), len }
}

pub(crate) fn check_modulus_band(f: &TrigPoly, c1: f64) -> Result<()> {
    let r = modulus_range(f);
    if r.min_lo <= 1.0 - c1 || r.max_hi >= 1.0 + c1 {
        return Err(Error::Precondition(format!(
            "|f| must lie in (1 − c₁, 1 + c₁) = ({}, {}); certified range is [{}, {}]",
            1.0 - c1,
            1.0 + c1,
            r.min_lo,
            r.max_hi
        )));
    }
    Ok(())
}

/// `max ||F| − τ|` on `set` and `max |F − f|` off it, each with Lipschitz slack.
pub(crate) fn certify_level(
    f: &TrigPoly,
    big: &TrigPoly,
    set: &SimpleSet,
    tau: f64,
    eps: f64,
    opts: &CorrectionOptions,
) -> Result<Vec<Check>> {
    let grid = CellGrid::for_degree(big.degree(), opts.grid_floor, opts.max_grid)?;
    let k = grid.k;
    let diff = big - f;
    let bv = big.grid_values(k)?;
    let dv = diff.grid_values(k)?;
    let on = grid.touching(set);
    let off = grid.touching(&set.complement());
    let (mut inside, mut outside) = (0.0f64, 0.0f64);
    for i in 0..k {
        if on[i] {
            inside = inside.max((bv[i].norm() - tau).abs());
        }
        if off[i] {
            outside = outside.max(dv[i].norm());
        }
    }
    Ok(vec![
        Check::below("||F| − τ| on E", inside + grid.slack(big), eps, k),
        Check::below("|F − f| off E", outside + grid.slack(&diff), eps, k),
    ])
}

fn worst_ratio(checks: &[Check]) -> f64 {
    checks.iter().map(|c| c.value / c.bound).fold(0.0, f64::max)
}

pub fn correct_interval(f: &TrigPoly, a: f64, b: f64, eps: f64) -> Result<Corrected> {
    correct_interval_with(f, a, b, eps, &CorrectionOptions::default())
}

/// Flattens `|f|` to `τ = |f(a)|` on the dip `[a, b]` by adding frequencies
/// above `deg f` only. The oscillation frequency `M` doubles until the
/// certificate passes.
pub fn correct_interval_with(f: &TrigPoly, a: f64, b: f64, eps: f64, opts: &CorrectionOptions) -> Result<Corrected> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Precondition(format!("ε must lie in (0, 1), got {eps}")));
    }
    let arc = arc_between(a, b);
    let tau = f.evaluate(a).norm();
    let tau_b = f.evaluate(arc.end()).norm();
    if (tau - tau_b).abs() > opts.boundary_tol {
        return Err(Error::Precondition(format!("|f(a)| = {tau} differs from |f(b)| = {tau_b}")));
    }
    check_modulus_band(f, opts.c1)?;
    let n = f.degree();
    let probe = next_pow2(16 * n.max(1)).max(4096);
    let values = f.grid_values(probe)?;
    let mut depth = 0.0f64;
    for (i, z) in values.iter().enumerate() {
        if arc.contains(i as f64 / probe as f64) {
            let gap = tau - z.norm();
            if gap < -opts.boundary_tol {
                return Err(Error::Precondition(format!(
                    "|f| exceeds |f(a)| inside [a, b] at t = {}",
                    i as f64 / probe as f64
                )));
            }
            depth = depth.max(gap);
        }
    }
    if depth <= opts.boundary_tol {
        return Ok(Corrected::unchanged(f));
    }
    let pp = PhiPsi::default();
    if 1.0 - (tau - depth) / tau > pp.psi_max() {
        return Err(Error::PsiDomain { value: depth / tau, cap: pp.psi_max() });
    }
    let set = SimpleSet::from_arcs(&[arc]);

    let mut m = opts.m_floor.max(next_pow2(4 * n) as u64);
    let mut trace = Vec::new();
    while m <= opts.m_cap {
        let band = opts.band_factor * m;
        let k = next_pow2(16 * band).max(opts.grid_floor);
        if k > opts.max_grid {
            break;
        }
        let tail = oscillation_tail(f, &arc, tau, m, band, k, &pp)?;
        let big = f.extend_with(&tail)?;
        let checks = certify_level(f, &big, &set, tau, eps, opts)?;
        let worst = worst_ratio(&checks);
        trace.push((m, worst));
        if first_failure(&checks).is_none() {
            return Ok(Corrected { poly: big, checks, m, trace });
        }
        m *= 2;
    }
    Err(Error::AdaptiveCap { what: "oscillation frequency M of the interval correction".into(), trace })
}

/// Band `deg f < |n| ≤ band` of `S = f₂ − f`, where on the arc
/// `f₂ = (f/|f|)·τ·e^{iδ sin 2πM(t − a)}` with `δ = √ψ(1 − |f|/τ)`.
fn oscillation_tail(
    f: &TrigPoly,
    arc: &Arc,
    tau: f64,
    m: u64,
    band: u64,
    k: usize,
    pp: &PhiPsi,
) -> Result<TrigPoly> {
    let fv = f.grid_values(k)?;
    let mut buf = vec![Complex64::new(0.0, 0.0); k];
    for (i, slot) in buf.iter_mut().enumerate() {
        let t = i as f64 / k as f64;
        if !arc.contains(t) {
            continue;
        }
        let z = fv[i];
        let r = z.norm();
        let y = (1.0 - r / tau).clamp(0.0, pp.psi_max());
        let delta = pp.psi(y)?.sqrt();
        let phase = delta * (TAU * m as f64 * wrap01(t - arc.start)).sin();
        *slot = z / r * tau * Complex64::from_polar(1.0, phase) - z;
    }
    fft::forward(&mut buf);
    let scale = 1.0 / k as f64;
    let n = f.degree() as i64;
    let top = (band as i64).min(k as i64 / 2 - 1);
    let mut coeffs = Vec::with_capacity(2 * (top - n).max(0) as usize);
    for freq in n + 1..=top {
        coeffs.push((freq, buf[freq as usize] * scale));
        coeffs.push((-freq, buf[k - freq as usize] * scale));
    }
    Ok(TrigPoly::from_coeffs(coeffs))
}

pub fn correct_simple_set(f: &TrigPoly, set: &SimpleSet, eps: f64) -> Result<Corrected> {
    correct_simple_set_with(f, set, eps, &CorrectionOptions::default())
}

/// Corrects each component of `set` with budget `ε/(2·count)` and adds the
/// tails.
pub fn correct_simple_set_with(f: &TrigPoly, set: &SimpleSet, eps: f64, opts: &CorrectionOptions) -> Result<Corrected> {
    let arcs = set.arcs();
    if arcs.is_empty() {
        return Ok(Corrected::unchanged(f));
    }
    let limit = 4 * f.degree() + 1;
    if arcs.len() as u64 > limit {
        return Err(Error::Precondition(format!(
            "E has {} components, more than 4·deg f + 1 = {limit}",
            arcs.len()
        )));
    }
    let tau = f.evaluate(arcs[0].start).norm();
    for arc in &arcs {
        for t in [arc.start, arc.end()] {
            let v = f.evaluate(t).norm();
            if (v - tau).abs() > opts.boundary_tol {
                return Err(Error::Precondition(format!("|f| is not constant on ∂E: {v} vs {tau} at t = {t}")));
            }
        }
    }
    let budget = eps / (2.0 * arcs.len() as f64);
    let mut tail = TrigPoly::zero();
    let mut trace = Vec::new();
    let mut m = 0;
    for arc in &arcs {
        let part = correct_interval_with(f, arc.start, arc.end(), budget, opts)?;
        tail = &tail + &part.poly.tail_above(f.degree());
        trace.extend(part.trace);
        m = m.max(part.m);
    }
    let big = f.extend_with(&tail)?;
    let checks = certify_level(f, &big, set, tau, eps, opts)?;
    if let Some(c) = first_failure(&checks) {
        return Err(Error::Certificate(format!("{}: {} ≥ {}", c.name, c.value, c.bound)));
    }
    Ok(Corrected { poly: big, checks, m, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corrections::sublevel_set;
    use crate::trigpoly::extends;

    fn central_dip() -> (TrigPoly, f64, f64) {
        // 0.95 + 0.04·cos(2πt): the dip below the level 0.95 is [1/4, 3/4].
        let f = TrigPoly::from_real_coeffs([(0, 0.95), (1, 0.02), (-1, 0.02)]);
        (f, 0.25, 0.75)
    }

    #[test]
    fn constant_modulus_is_left_alone() {
        let f = TrigPoly::monomial(1, 0.98);
        let out = correct_interval(&f, 0.2, 0.6, 0.05).unwrap();
        assert_eq!(out.poly, f);
        assert_eq!(out.m, 0);
    }

    #[test]
    fn central_dip_certifies() {
        let (f, a, b) = central_dip();
        let out = correct_interval(&f, a, b, 0.05).unwrap();
        assert!(extends(&out.poly, &f));
        assert!(out.checks.iter().all(|c| c.pass));
        assert!(out.checks[0].grid_size >= 1 << 16);
    }

    #[test]
    fn smaller_budget_needs_larger_m() {
        let (f, a, b) = central_dip();
        let ms: Vec<u64> = [0.5, 0.05, 0.005].iter().map(|&e| correct_interval(&f, a, b, e).unwrap().m).collect();
        assert!(ms[0] <= ms[1] && ms[1] <= ms[2], "{ms:?}");
        assert!(ms[0] < ms[2], "{ms:?}");
    }

    #[test]
    fn preconditions_are_named() {
        let (f, _, _) = central_dip();
        assert!(matches!(correct_interval(&f, 0.25, 0.7, 0.05), Err(Error::Precondition(m)) if m.contains("|f(b)|")));
        assert!(matches!(correct_interval(&f, 0.75, 0.25, 0.05), Err(Error::Precondition(m)) if m.contains("exceeds")));
        assert!(correct_interval(&f, 0.25, 0.75, 1.5).is_err());
        let far = TrigPoly::constant(0.5);
        assert!(matches!(correct_interval(&far, 0.1, 0.2, 0.05), Err(Error::Precondition(m)) if m.contains("c₁")));
    }

    #[test]
    fn tiny_cap_reports_the_trace() {
        let (f, a, b) = central_dip();
        let opts = CorrectionOptions { m_cap: 16, ..Default::default() };
        match correct_interval_with(&f, a, b, 0.001, &opts) {
            Err(Error::AdaptiveCap { trace, .. }) => assert!(!trace.is_empty()),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_set_is_identity() {
        let (f, _, _) = central_dip();
        assert_eq!(correct_simple_set(&f, &SimpleSet::empty(), 0.1).unwrap().poly, f);
    }

    #[test]
    fn single_component_matches_half_budget() {
        let (f, a, b) = central_dip();
        let set = SimpleSet::new(vec![(a, b)]).unwrap();
        let whole = correct_simple_set(&f, &set, 0.1).unwrap();
        let single = correct_interval(&f, a, b, 0.05).unwrap();
        assert_eq!(whole.poly, single.poly);
    }

    #[test]
    fn two_dips() {
        let f = TrigPoly::from_real_coeffs([(0, 0.95), (2, 0.025), (-2, 0.025)]);
        let set = sublevel_set(&f, 0.93).unwrap();
        assert_eq!(set.component_count(), 2);
        let out = correct_simple_set(&f, &set, 0.1).unwrap();
        assert!(extends(&out.poly, &f));
        assert!(out.checks.iter().all(|c| c.pass));
    }
}
