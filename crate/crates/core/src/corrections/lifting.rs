use super::cert::{certify_lifting, CellGrid, LiftingCertificate, LiftingSpec};
use super::interval::arc_between;
use super::CorrectionOptions;
use crate::blocks::{fejer_indicator, ScaleLattice, SigmaFamily, SigmaSpec};
use crate::error::{Error, Result};
use crate::metrics::modulus_of_continuity;
use crate::numeric::next_pow2;
use crate::simple_set::{Arc, SimpleSet};
use crate::trigpoly::{moduli_equal, TrigPoly};
use num_complex::Complex64;
use serde::Serialize;

/// Compatible liftings `F` of `f` and `G` of `g`.
#[derive(Clone, Debug, Serialize)]
pub struct LiftedPair {
    #[serde(skip)]
    pub f: TrigPoly,
    #[serde(skip)]
    pub g: TrigPoly,
    pub mu: f64,
    pub spec_f: LiftingSpec,
    pub spec_g: LiftingSpec,
    pub cert_f: LiftingCertificate,
    pub cert_g: LiftingCertificate,
    pub moduli_residual: f64,
    /// Number of blocks `N` per component.
    pub blocks: Vec<usize>,
    /// Fejér order and edge margin of the indicator approximant per component.
    pub indicator: Vec<(u32, f64)>,
    pub top_degree: u64,
}

/// `μ = √(ν² + 4^{−l}(1 − τ²))`.
pub fn lift_mu(nu: f64, tau: f64, l: u32) -> f64 {
    (nu * nu + 0.25f64.powi(l as i32) * (1.0 - tau * tau)).sqrt()
}

/// One lifted interval `I` with its target interval `J`.
struct Component {
    i: Arc,
    j: Arc,
    blocks: usize,
    p: TrigPoly,
    order: u32,
    kappa: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn lift_pair_interval(
    f: &TrigPoly,
    g: &TrigPoly,
    i: (f64, f64),
    j: (f64, f64),
    tau: f64,
    nu: f64,
    eps: f64,
    l: u32,
) -> Result<LiftedPair> {
    lift_pair_interval_with(f, g, i, j, tau, nu, eps, l, &CorrectionOptions::default())
}

/// Lifts `f` on `I` from `τ` to 1 and `g` on `J` from `ν` to `μ`, where
/// `|J| = 4^l |I|`.
#[allow(clippy::too_many_arguments)]
pub fn lift_pair_interval_with(
    f: &TrigPoly,
    g: &TrigPoly,
    i: (f64, f64),
    j: (f64, f64),
    tau: f64,
    nu: f64,
    eps: f64,
    l: u32,
    opts: &CorrectionOptions,
) -> Result<LiftedPair> {
    let ia = arc_between(i.0, i.1);
    let ja = arc_between(j.0, j.1);
    if ia.len > 0.25f64.powi(l as i32) * (1.0 + 1e-9) {
        return Err(Error::Precondition(format!("|I| = {} exceeds 4^−l", ia.len)));
    }
    let g_range = SimpleSet::from_arcs(&[ja]);
    lift_components(f, g, &[(ia, ja)], &g_range, tau, nu, eps, l, opts)
}

pub fn lift_pair_set(f: &TrigPoly, g: &TrigPoly, set: &SimpleSet, tau: f64, nu: f64, eps: f64, l: u32) -> Result<LiftedPair> {
    lift_pair_set_with(f, g, set, tau, nu, eps, l, &CorrectionOptions::default())
}

/// Lifts `f` on a simple set `E` with `|E| = 4^{−l}` and `g` on all of
/// `[0,1]`; the target intervals `J_i` tile the circle with `|J_i| = |I_i|/|E|`.
#[allow(clippy::too_many_arguments)]
pub fn lift_pair_set_with(
    f: &TrigPoly,
    g: &TrigPoly,
    set: &SimpleSet,
    tau: f64,
    nu: f64,
    eps: f64,
    l: u32,
    opts: &CorrectionOptions,
) -> Result<LiftedPair> {
    let target = 0.25f64.powi(l as i32);
    if (set.measure() - target).abs() > 1e-9 {
        return Err(Error::Precondition(format!("|E| = {} but 4^−l = {target}", set.measure())));
    }
    let mut start = 0.0;
    let mut comps = Vec::new();
    for arc in set.arcs() {
        let len = arc.len / set.measure();
        comps.push((arc, Arc { start, len }));
        start += len;
    }
    lift_components(f, g, &comps, &SimpleSet::full(), tau, nu, eps, l, opts)
}

const MAX_BLOCKS: usize = 64;

/// Smallest block count `N` with `ω(b/N) < min{ε/4, √(1−τ²)/4}` for both.
fn block_count(f: &TrigPoly, g: &TrigPoly, b: f64, tau: f64, eps: f64) -> Result<usize> {
    let target = (eps / 4.0).min((1.0 - tau * tau).sqrt() / 4.0);
    let fits = |n: usize| {
        let d = (b / n as f64).min(0.5);
        modulus_of_continuity(f, d) < target && modulus_of_continuity(g, d) < target
    };
    // ω is monotone, so the largest N decides feasibility.
    if !fits(MAX_BLOCKS) {
        return Err(Error::FrequencyBudget(format!("no block count N ≤ {MAX_BLOCKS} brings ω(b/N) below {target}")));
    }
    Ok((1..=MAX_BLOCKS).find(|&n| fits(n)).unwrap_or(MAX_BLOCKS))
}

/// Fejér indicator of `[κ, w − κ]`; `κ` grows until the translates
/// `P(t − q·w)` leak less than `ε/(4·amp)` outside `[0, N·w]`.
fn indicator(w: f64, blocks: usize, amp: f64, eps: f64) -> Result<(TrigPoly, u32, f64)> {
    let order = (next_pow2((2.0 / (w * w)).ceil() as u64 + 1) as u32).max(32);
    let k = next_pow2(64 * u64::from(order)).max(4096);
    let budget = eps / (4.0 * amp);
    let mut kappa_steps = vec![0.0];
    kappa_steps.extend((0..8).map(|s| f64::from(1u32 << s) / f64::from(order)));
    for kappa in kappa_steps {
        let width = w - 2.0 * kappa;
        if width <= 0.0 || f64::from(order) <= width.powi(-2) {
            break;
        }
        let p = fejer_indicator(width, order)?.rotate(-kappa);
        let sum = (0..blocks).fold(TrigPoly::zero(), |acc, q| &acc + &p.rotate(-(q as f64) * w));
        let values = sum.grid_values(k)?;
        let span = blocks as f64 * w;
        let leak = values
            .iter()
            .enumerate()
            .filter(|(i, _)| (*i as f64 / k as f64) > span)
            .map(|(_, z)| z.norm())
            .fold(0.0, f64::max);
        if leak <= budget {
            return Ok((p, order, kappa));
        }
    }
    Err(Error::Precondition(format!(
        "indicator of width {w} leaks more than {budget} outside its block at Fejér order {order}"
    )))
}

#[allow(clippy::too_many_arguments)]
fn lift_components(
    f: &TrigPoly,
    g: &TrigPoly,
    pairs: &[(Arc, Arc)],
    g_set: &SimpleSet,
    tau: f64,
    nu: f64,
    eps: f64,
    l: u32,
    opts: &CorrectionOptions,
) -> Result<LiftedPair> {
    if !(tau > 0.0 && tau < 1.0) || !(eps > 0.0) {
        return Err(Error::Precondition(format!("need 0 < τ < 1 and ε > 0 (τ = {tau}, ε = {eps})")));
    }
    let scale = 4f64.powi(l as i32);
    let f_set = SimpleSet::from_arcs(&pairs.iter().map(|p| p.0).collect::<Vec<_>>());
    for (ia, ja) in pairs {
        if (ja.len - scale * ia.len).abs() > 1e-9 {
            return Err(Error::Precondition(format!("|J| = {} but 4^l|I| = {}", ja.len, scale * ia.len)));
        }
    }
    let fmax = max_modulus_on(f, &f_set, opts)?;
    if fmax >= tau {
        return Err(Error::Precondition(format!("max |f| on I is {fmax}, not below τ = {tau}")));
    }
    let gmax = max_modulus_on(g, g_set, opts)?;
    if gmax > nu {
        return Err(Error::Precondition(format!("ν = {nu} is below max |g| on J = {gmax}")));
    }
    if moduli_equal(f, g, 1e-12 * f.max_abs_coeff().max(1.0)).residual > 1e-12 * f.max_abs_coeff().max(1.0) {
        return Err(Error::Precondition("f and g must have equal coefficient moduli".into()));
    }
    let amp = (1.0 - tau * tau).sqrt();
    let mut comps = Vec::with_capacity(pairs.len());
    for &(ia, ja) in pairs {
        let blocks = block_count(f, g, ia.len, tau, eps)?;
        let (p, order, kappa) = indicator(ia.len / blocks as f64, blocks, amp, eps)?;
        comps.push(Component { i: ia, j: ja, blocks, p, order, kappa });
    }
    let families: usize = comps.iter().map(|c| c.blocks).sum();
    let digit0 = comps.iter().map(|c| c.p.degree()).max().unwrap_or(0);
    let spec = SigmaSpec {
        l,
        order: opts.psi_order,
        families,
        lattice: ScaleLattice::Packed { floor: f.degree().max(g.degree()), digit0 },
        freq_cap: opts.freq_cap,
        max_terms: opts.freq_cap as usize,
    };
    let sigma = SigmaFamily::build(&spec)?;
    sigma.check_disjoint(digit0, f.degree().max(g.degree()))?;

    let mut tail_f: Vec<(i64, Complex64)> = Vec::new();
    let mut tail_g: Vec<(i64, Complex64)> = Vec::new();
    let mut family = 0;
    for c in &comps {
        let w = c.i.len / c.blocks as f64;
        for q in 0..c.blocks {
            let x = c.i.start + q as f64 * w;
            let dir_f = direction(f, x)? * amp;
            for (jdx, member) in sigma.members[family].iter().enumerate() {
                let base = c.p.multiply(member);
                let y = c.j.start + jdx as f64 * c.i.len + q as f64 * w;
                let dir_g = direction(g, y)? * amp;
                tail_f.extend(base.rotate(-x).scale(dir_f).coeffs());
                tail_g.extend(base.rotate(-y).scale(dir_g).coeffs());
            }
            family += 1;
        }
    }
    let big_f = f.extend_with(&TrigPoly::from_coeffs(tail_f))?;
    let big_g = g.extend_with(&TrigPoly::from_coeffs(tail_g))?;
    let residual = moduli_equal(&big_f, &big_g, 0.0).residual;
    let mu = lift_mu(nu, tau, l);
    let spec_f = LiftingSpec::new(f_set, tau, 1.0, eps)?;
    let spec_g = LiftingSpec::new(g_set.clone(), nu, mu, eps)?;
    let cert_f = certify_lifting(f, &big_f, &spec_f, opts.grid_floor, opts.max_grid)?;
    let cert_g = certify_lifting(g, &big_g, &spec_g, opts.grid_floor, opts.max_grid)?;
    for (who, cert) in [("F", &cert_f), ("G", &cert_g)] {
        if let Some(clause) = cert.first_failure() {
            return Err(Error::Certificate(format!("lifting {who}: {clause} ({cert:?})")));
        }
    }
    Ok(LiftedPair {
        top_degree: big_f.degree().max(big_g.degree()),
        f: big_f,
        g: big_g,
        mu,
        spec_f,
        spec_g,
        cert_f,
        cert_g,
        moduli_residual: residual,
        blocks: comps.iter().map(|c| c.blocks).collect(),
        indicator: comps.iter().map(|c| (c.order, c.kappa)).collect(),
    })
}

/// `i·p(x)/|p(x)|`.
fn direction(p: &TrigPoly, x: f64) -> Result<Complex64> {
    let v = p.evaluate(x);
    if v.norm() == 0.0 {
        return Err(Error::DirectionUndefined);
    }
    Ok(Complex64::i() * v / v.norm())
}

fn max_modulus_on(p: &TrigPoly, set: &SimpleSet, opts: &CorrectionOptions) -> Result<f64> {
    let grid = CellGrid::for_degree(p.degree(), 4096, opts.max_grid)?;
    let values = p.grid_values(grid.k)?;
    let mask = grid.touching(set);
    let top = values.iter().zip(&mask).filter(|(_, &m)| m).map(|(z, _)| z.norm()).fold(0.0, f64::max);
    Ok(top + grid.slack(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trigpoly::extends;

    #[test]
    fn mu_formula() {
        assert!((lift_mu(1.0, 0.8, 1) - 1.09f64.sqrt()).abs() < 1e-15);
        assert_eq!(lift_mu(0.7, 1.0, 3), 0.7);
    }

    fn desk_pair() -> (TrigPoly, TrigPoly) {
        let f = TrigPoly::from_coeffs([
            (0, Complex64::new(0.75, 0.0)),
            (1, Complex64::new(0.012, 0.0)),
            (-2, Complex64::new(0.0, -0.006)),
            (4, Complex64::new(0.003, 0.0)),
        ]);
        let g = f.rotate(0.37).scale(Complex64::from_polar(1.0, 0.5));
        (f, g)
    }

    fn quick() -> CorrectionOptions {
        CorrectionOptions { psi_order: 4, ..Default::default() }
    }

    #[test]
    fn desk_interval_lifting_certifies() {
        let (f, g) = desk_pair();
        let out = lift_pair_interval(&f, &g, (0.1, 0.35), (0.0, 1.0), 0.8, 0.8, 0.2, 1).unwrap();
        assert!(out.cert_f.passes() && out.cert_g.passes());
        assert!(out.cert_f.clause2_exception_measure < 0.2);
        assert!(out.cert_g.clause2_exception_measure < 0.2);
        assert_eq!(out.mu, lift_mu(0.8, 0.8, 1));
        assert!(out.moduli_residual <= 1e-12);
        assert!(extends(&out.f, &f) && extends(&out.g, &g));
    }

    #[test]
    fn two_component_set_keeps_mu() {
        let (f, g) = desk_pair();
        let set = SimpleSet::new(vec![(0.1, 0.2), (0.6, 0.75)]).unwrap();
        let out = lift_pair_set_with(&f, &g, &set, 0.8, 0.8, 0.2, 1, &quick()).unwrap();
        assert_eq!(out.mu, lift_mu(0.8, 0.8, 1));
        assert!(out.cert_f.passes() && out.cert_g.passes());
        assert!(out.moduli_residual <= 1e-12);
        assert_eq!(out.blocks.len(), 2);
    }

    #[test]
    fn single_component_set_matches_interval() {
        let (f, g) = desk_pair();
        let set = SimpleSet::new(vec![(0.1, 0.35)]).unwrap();
        let a = lift_pair_set_with(&f, &g, &set, 0.8, 0.8, 0.2, 1, &quick()).unwrap();
        let b = lift_pair_interval_with(&f, &g, (0.1, 0.35), (0.0, 1.0), 0.8, 0.8, 0.2, 1, &quick()).unwrap();
        assert_eq!(a.f, b.f);
        assert_eq!(a.g, b.g);
    }

    #[test]
    fn measure_must_be_a_power_of_four() {
        let (f, g) = desk_pair();
        let set = SimpleSet::new(vec![(0.1, 0.3)]).unwrap();
        assert!(matches!(lift_pair_set(&f, &g, &set, 0.8, 0.8, 0.2, 1), Err(Error::Precondition(_))));
    }

    #[test]
    fn near_one_lift_barely_moves() {
        let f = TrigPoly::constant(0.75);
        let g = TrigPoly::constant(Complex64::from_polar(0.75, 0.5));
        let tau = 1.0 - 1e-12;
        let out = lift_pair_interval_with(&f, &g, (0.1, 0.35), (0.0, 1.0), tau, 0.8, 0.2, 1, &quick()).unwrap();
        assert!((out.mu - 0.8).abs() < 1e-12);
        let df = out.f.tail_above(0).l1_norm();
        let dg = out.g.tail_above(0).l1_norm();
        assert!(df < 1e-5 && dg < 1e-5, "{df} {dg}");
    }
}

