//! Halving the gap to the unit circle, and iterating that until the gap is
//! below a target.

use super::config::Constants;
use crate::corrections::{compatible_correct_set_with, lift_pair_set_with, sublevel_set};
use crate::error::{Error, Result};
use crate::metrics::{modulus_range_on, ModulusRange};
use crate::report::{first_failure, Check};
use crate::simple_set::{Arc, SimpleSet};
use crate::trigpoly::{extends, moduli_equal, TrigPoly};
use serde::Serialize;

/// `|f| < 1` is accepted up to this rounding allowance after normalisation.
const UNIT_ROUNDING: f64 = 1e-12;

/// Base-4 digits `(l, α_l)` of `x ∈ [0,1]` with `α_l ≠ 0`, stopping once the
/// remainder is below `tol`. Returns the digits and the remainder.
pub fn base4_digits(x: f64, tol: f64) -> (Vec<(u32, u32)>, f64) {
    let mut digits = Vec::new();
    let mut rest = x;
    let mut l = 0;
    while rest >= tol && l < 26 {
        l += 1;
        let unit = 0.25f64.powi(l as i32);
        let a = ((rest / unit) + 1e-12).floor().min(3.0);
        if a >= 1.0 {
            digits.push((l, a as u32));
            rest = (rest - a * unit).max(0.0);
        }
    }
    (digits, rest)
}

/// Consecutive pieces of `set` with the given measures, cut in circle order.
pub fn carve(set: &SimpleSet, measures: &[f64]) -> Result<Vec<SimpleSet>> {
    let arcs = set.arcs();
    let mut out = Vec::with_capacity(measures.len());
    let (mut idx, mut offset) = (0usize, 0.0);
    for &m in measures {
        let mut need = m;
        let mut piece: Vec<Arc> = Vec::new();
        while need > 1e-15 {
            let arc = arcs
                .get(idx)
                .ok_or_else(|| Error::Precondition(format!("set of measure {} cannot hold the pieces", set.measure())))?;
            let avail = arc.len - offset;
            let take = avail.min(need);
            piece.push(Arc { start: arc.point(offset / arc.len), len: take });
            need -= take;
            if take >= avail {
                idx += 1;
                offset = 0.0;
            } else {
                offset += take;
            }
        }
        out.push(SimpleSet::from_arcs(&piece));
    }
    Ok(out)
}

fn range(p: &TrigPoly, c: &Constants) -> ModulusRange {
    modulus_range_on(p, c.grid_factor, 4096)
}

fn check_pair(f: &TrigPoly, g: &TrigPoly) -> Result<f64> {
    let tol = 1e-12 * f.max_abs_coeff().max(1.0);
    let rep = moduli_equal(f, g, tol);
    if !rep.pass {
        return Err(Error::Precondition(format!("coefficient moduli differ by {}", rep.residual)));
    }
    Ok(rep.residual)
}

/// `1 − c < |f| < 1` and `1 − c < |g| < 1 + c`, certified.
fn check_band(f: &TrigPoly, g: &TrigPoly, c: f64, name: &str, consts: &Constants) -> Result<(ModulusRange, ModulusRange)> {
    let rf = range(f, consts);
    let rg = range(g, consts);
    if !(rf.min_lo > 1.0 - c && rf.max_hi < 1.0 + UNIT_ROUNDING) {
        return Err(Error::Precondition(format!(
            "|f| ∈ [{:.6}, {:.6}] is not inside (1 − {name}, 1) with {name} = {c}",
            rf.min_lo, rf.max_hi
        )));
    }
    if !(rg.min_lo > 1.0 - c && rg.max_hi < 1.0 + c) {
        return Err(Error::Precondition(format!(
            "|g| ∈ [{:.6}, {:.6}] is not inside (1 − {name}, 1 + {name}) with {name} = {c}",
            rg.min_lo, rg.max_hi
        )));
    }
    Ok((rf, rg))
}

#[derive(Clone, Debug, Serialize)]
pub struct HalfGapReport {
    pub rho: f64,
    pub tau: f64,
    pub delta: f64,
    pub set_measure: f64,
    pub digits: Vec<(u32, u32)>,
    pub untreated_measure: f64,
    pub liftings: usize,
    pub mu: f64,
    /// `‖F − f‖∞ / √ρ` and `‖G − g‖∞ / √ρ`.
    pub k_f: f64,
    pub k_g: f64,
    pub degree: u64,
    pub checks: Vec<Check>,
}

#[derive(Clone, Debug)]
pub struct HalfGapOutput {
    pub f: TrigPoly,
    pub g: TrigPoly,
    pub report: HalfGapReport,
}

/// Extends `f, g` so that `|F|` gains half of its distance to 1 while the
/// oscillation of `|G|` grows by less than `ε`.
pub fn half_gap_stage(f: &TrigPoly, g: &TrigPoly, eps: f64, consts: &Constants, seed: u64) -> Result<HalfGapOutput> {
    check_pair(f, g)?;
    let (rf, rg) = check_band(f, g, consts.c2, "c2", consts)?;
    let rho = rf.dist_to_one();
    let tau = 1.0 - rho / 2.0;
    let delta = eps / 8.0;
    let set = sublevel_set(f, tau - eps / 4.0)?;
    let opts = consts.correction_options(seed);

    let (digits, untreated) = base4_digits(set.measure(), delta);
    let measures: Vec<f64> = digits
        .iter()
        .flat_map(|&(l, a)| std::iter::repeat_n(0.25f64.powi(l as i32), a as usize))
        .collect();
    let levels: Vec<u32> = digits.iter().flat_map(|&(l, a)| std::iter::repeat_n(l, a as usize)).collect();
    let pieces = carve(&set, &measures)?;

    let (mut fi, mut gi) = (f.clone(), g.clone());
    let mut mu = rg.max_hi;
    for (i, (piece, &l)) in pieces.iter().zip(&levels).enumerate() {
        let step = delta * 0.5f64.powi(i as i32 + 1);
        let lifted = lift_pair_set_with(&fi, &gi, piece, tau, mu + step, step, l, &opts)?;
        mu = lifted.mu;
        fi = lifted.f;
        gi = lifted.g;
    }

    // Clean up where |f_i| is still below τ − ε/7, then where |G*| is low.
    let osc_g = rg.oscillation();
    let bad = sublevel_set(&fi, tau - eps / 7.0)?;
    let first = compatible_correct_set_with(&fi, &gi, &bad, eps / 7.0, &opts)?;
    let bad_star = sublevel_set(&first.g, mu - osc_g - 3.0 * eps / 7.0)?;
    let second = compatible_correct_set_with(&first.g, &first.f, &bad_star, eps / 7.0, &opts)?;
    let (big_f, big_g) = (second.g, second.f);

    let out_f = range(&big_f, consts);
    let out_g = range(&big_g, consts);
    let sqrt_rho = rho.sqrt().max(f64::MIN_POSITIVE);
    let k_f = (&big_f - f).sup_norm_certified().hi / sqrt_rho;
    let k_g = (&big_g - g).sup_norm_certified().hi / sqrt_rho;
    let k = out_f.grid_size;
    let checks = vec![
        Check::below("clause 1: 1 − ρ/2 − ε < |F|", 1.0 - rho / 2.0 - eps - out_f.min_lo, 0.0, k),
        Check::below("clause 1: |F| < 1 + ε", out_f.max_hi, 1.0 + eps, k),
        Check::at_most("clause 2: ‖F − f‖∞/√ρ", k_f, consts.ceiling, 0),
        Check::below("clause 3: Osc G < Osc g + ε", out_g.oscillation(), osc_g + eps, out_g.grid_size),
        Check::at_most("clause 4: ‖G − g‖∞/√ρ", k_g, consts.ceiling, 0),
        Check::at_most("F extends f", f64::from(u8::from(!extends(&big_f, f))), 0.0, 0),
        Check::at_most("G extends g", f64::from(u8::from(!extends(&big_g, g))), 0.0, 0),
        Check::at_most("moduli residual", check_pair(&big_f, &big_g)?, 1e-12 * big_f.max_abs_coeff().max(1.0), 0),
    ];
    if let Some(c) = first_failure(&checks) {
        return Err(Error::Certificate(format!("half-gap {}: {} against {}", c.name, c.value, c.bound)));
    }
    let report = HalfGapReport {
        rho,
        tau,
        delta,
        set_measure: set.measure(),
        digits,
        untreated_measure: untreated,
        liftings: pieces.len(),
        mu,
        k_f: if rho > 0.0 { k_f } else { 0.0 },
        k_g: if rho > 0.0 { k_g } else { 0.0 },
        degree: big_f.degree().max(big_g.degree()),
        checks,
    };
    Ok(HalfGapOutput { f: big_f, g: big_g, report })
}

#[derive(Clone, Debug, Serialize)]
pub struct IterationRecord {
    pub i: u32,
    /// Certified `‖1 − |f_i|‖∞`.
    pub gap: f64,
    /// `(ρ + 2iδ)·2^{−i}`.
    pub gap_bound: f64,
    pub osc_g: f64,
    pub lambda: f64,
    pub degree: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct KillGapReport {
    pub rho: f64,
    pub delta: f64,
    pub iterations: Vec<IterationRecord>,
    pub lambda: f64,
    pub k_f: f64,
    pub k_g: f64,
    pub checks: Vec<Check>,
}

#[derive(Clone, Debug)]
pub struct KillGapOutput {
    pub f: TrigPoly,
    pub g: TrigPoly,
    pub report: KillGapReport,
}

/// `λ_i = Π_{j ≤ i} (1 + δ2^{−j})`.
pub fn lambda(delta: f64, i: u32) -> f64 {
    (1..=i).map(|j| 1.0 + delta * 0.5f64.powi(j as i32)).product()
}

/// Repeats [`half_gap_stage`] with renormalisation until `1 − ε < |F| < 1 + ε`.
pub fn kill_gap(f: &TrigPoly, g: &TrigPoly, eps: f64, consts: &Constants, seed: u64) -> Result<KillGapOutput> {
    check_pair(f, g)?;
    let (rf, rg) = check_band(f, g, consts.c3, "c3", consts)?;
    let rho = rf.dist_to_one();
    let delta = (eps / 4.0).min(consts.c2 / 7.0);
    let osc_g0 = rg.oscillation();
    let mut iterations = Vec::new();

    // f_i, g_i are the normalised iterates; (big_f, big_g) = λ_{i−1}·(f*, g*).
    let (mut fi, mut gi) = (f.clone(), g.clone());
    let (mut big_f, mut big_g) = (f.clone(), g.clone());
    let mut lam = 1.0;
    let mut i = 0u32;
    let done = |p: &TrigPoly| {
        let r = range(p, consts);
        r.min_lo > 1.0 - eps && r.max_hi < 1.0 + eps
    };
    while !done(&big_f) {
        if i >= consts.iteration_budget {
            let trace = iterations.iter().map(|r: &IterationRecord| (u64::from(r.i), r.gap)).collect();
            return Err(Error::AdaptiveCap { what: "gap-halving iterations".into(), trace });
        }
        i += 1;
        let step = delta * 0.5f64.powi(i as i32);
        let half = half_gap_stage(&fi, &gi, step, consts, seed.wrapping_add(u64::from(i)))?;
        let prev_f = fi.scale(lam);
        let prev_g = gi.scale(lam);
        big_f = half.f.scale(lam);
        big_g = half.g.scale(lam);
        if !extends(&big_f, &prev_f) || !extends(&big_g, &prev_g) {
            return Err(Error::Certificate(format!("iteration {i}: rescaled output does not extend its predecessor")));
        }
        lam *= 1.0 + step;
        fi = half.f.scale(1.0 / (1.0 + step));
        gi = half.g.scale(1.0 / (1.0 + step));
        let r = range(&fi, consts);
        let rec = IterationRecord {
            i,
            gap: r.dist_to_one(),
            gap_bound: (rho + 2.0 * f64::from(i) * delta) * 0.5f64.powi(i as i32),
            osc_g: range(&gi, consts).oscillation(),
            lambda: lam,
            degree: fi.degree(),
        };
        if rec.gap >= rec.gap_bound {
            return Err(Error::Certificate(format!(
                "iteration {i}: gap {} not below (ρ + 2iδ)2^−i = {}",
                rec.gap, rec.gap_bound
            )));
        }
        iterations.push(rec);
    }

    let out_f = range(&big_f, consts);
    let out_g = range(&big_g, consts);
    let sqrt_rho = rho.sqrt().max(f64::MIN_POSITIVE);
    let k_f = if i == 0 { 0.0 } else { (&big_f - f).sup_norm_certified().hi / sqrt_rho };
    let k_g = if i == 0 { 0.0 } else { (&big_g - g).sup_norm_certified().hi / sqrt_rho };
    let checks = vec![
        Check::below("clause 1: 1 − ε < |F|", 1.0 - eps, out_f.min_lo, out_f.grid_size),
        Check::below("clause 1: |F| < 1 + ε", out_f.max_hi, 1.0 + eps, out_f.grid_size),
        Check::at_most("clause 2: ‖F − f‖∞/√ρ", k_f, consts.ceiling, 0),
        Check::below("clause 3: Osc G < Osc g + ε", out_g.oscillation(), osc_g0 + eps, out_g.grid_size),
        Check::at_most("clause 4: ‖G − g‖∞/√ρ", k_g, consts.ceiling, 0),
    ];
    if let Some(c) = first_failure(&checks) {
        return Err(Error::Certificate(format!("gap killing {}: {} against {}", c.name, c.value, c.bound)));
    }
    Ok(KillGapOutput { f: big_f, g: big_g, report: KillGapReport { rho, delta, iterations, lambda: lam, k_f, k_g, checks } })
}
