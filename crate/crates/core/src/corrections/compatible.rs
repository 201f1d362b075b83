use super::cert::CellGrid;
use super::interval::{arc_between, certify_level, check_modulus_band, correct_interval_with, correct_simple_set_with};
use super::sublevel::{dip_interval_depth, sublevel_set};
use super::CorrectionOptions;
use crate::blocks::{flatten_signs, vallee_poussin, ScaleLattice, SigmaFamily, SigmaSpec};
use crate::error::{Error, Result};
use crate::numeric::next_pow2;
use crate::report::{first_failure, Check};
use crate::simple_set::{Arc, SimpleSet};
use crate::trigpoly::{moduli_equal, TrigPoly};
use num_complex::Complex64;
use serde::Serialize;

/// Corrected `F` with a partner `G` of equal coefficient moduli.
#[derive(Clone, Debug, Serialize)]
pub struct CorrectedPair {
    #[serde(skip)]
    pub f: TrigPoly,
    #[serde(skip)]
    pub g: TrigPoly,
    pub checks: Vec<Check>,
    pub moduli_residual: f64,
    /// Measured `max_{J} |g − G| / √(|I|/|J|)` (or `/√|E|` for sets).
    pub k_g: f64,
    /// Walsh depth `l` used for each component (0 for the plain fallback).
    pub depth: Vec<u32>,
    /// Whether the residual set `{|f₂| ≤ τ − ε/2}` was non-empty.
    pub cleanup: bool,
    pub degree: u64,
}

/// One corrected dip `[a,b]` with its spreading target `[a′,b′]`.
struct Piece {
    i: Arc,
    j: Arc,
    eps: f64,
}

pub fn compatible_correct(f: &TrigPoly, g: &TrigPoly, i: (f64, f64), j: (f64, f64), eps: f64) -> Result<CorrectedPair> {
    compatible_correct_with(f, g, i, j, eps, &CorrectionOptions::default())
}

/// Corrects `|f|` on the dip `[a,b]` while spreading the matching change of
/// `g` over `[a′,b′]`.
pub fn compatible_correct_with(
    f: &TrigPoly,
    g: &TrigPoly,
    i: (f64, f64),
    j: (f64, f64),
    eps: f64,
    opts: &CorrectionOptions,
) -> Result<CorrectedPair> {
    let ia = arc_between(i.0, i.1);
    let ja = arc_between(j.0, j.1);
    if ja.len < ia.len {
        return Err(Error::Precondition(format!("|[a′,b′]| = {} is shorter than |[a,b]| = {}", ja.len, ia.len)));
    }
    check_pair(f, g)?;
    let piece = Piece { i: ia, j: ja, eps };
    let out = correct_pieces(f, g, &[piece], eps, opts)?;
    let ratio = (ia.len / ja.len).sqrt();
    finish(f, g, out, &SimpleSet::from_arcs(&[ia]), &SimpleSet::from_arcs(&[ja]), ratio, eps, opts)
}

pub fn compatible_correct_set(f: &TrigPoly, g: &TrigPoly, set: &SimpleSet, eps: f64) -> Result<CorrectedPair> {
    compatible_correct_set_with(f, g, set, eps, &CorrectionOptions::default())
}

/// Set version: each component `I_i` is corrected towards the common
/// boundary level with budget `ε₃·2^{−i−2}` and spread over `J_i`, where the
/// `J_i` tile the circle with `|J_i| = |I_i|/|E|`.
pub fn compatible_correct_set_with(
    f: &TrigPoly,
    g: &TrigPoly,
    set: &SimpleSet,
    eps: f64,
    opts: &CorrectionOptions,
) -> Result<CorrectedPair> {
    let arcs = set.arcs();
    if arcs.is_empty() {
        return Ok(CorrectedPair {
            f: f.clone(),
            g: g.clone(),
            checks: Vec::new(),
            moduli_residual: moduli_equal(f, g, 0.0).residual,
            k_g: 0.0,
            depth: Vec::new(),
            cleanup: false,
            degree: f.degree().max(g.degree()),
        });
    }
    check_pair(f, g)?;
    let tau = f.evaluate(arcs[0].start).norm();
    for arc in &arcs {
        for t in [arc.start, arc.end()] {
            if (f.evaluate(t).norm() - tau).abs() > opts.boundary_tol {
                return Err(Error::Precondition(format!("|f| is not constant on ∂E (t = {t})")));
            }
        }
    }
    let eps2 = dip_interval_depth(f, set, tau)?;
    let measure = set.measure();
    let eps3 = eps.min(eps2).min(measure.sqrt());
    let lower = sublevel_set(f, tau - 0.5 * eps3)?;
    let core = sublevel_set(f, tau - 0.75 * eps3)?;
    let mut pieces = Vec::new();
    let mut start = 0.0;
    for (idx, arc) in arcs.iter().enumerate() {
        let jlen = arc.len / measure;
        let j = Arc { start, len: jlen };
        start += jlen;
        let comp = SimpleSet::from_arcs(&[*arc]);
        let inner = core.intersect(&comp);
        if inner.is_empty() {
            continue;
        }
        // The component of {|f| ≤ τ − ε₃/2} inside I_i that holds I_i*.
        let probe = inner.arcs()[0].point(0.5);
        let host = lower
            .intersect(&comp)
            .arcs()
            .into_iter()
            .find(|a| a.contains(probe))
            .ok_or_else(|| Error::DipScan(format!("ε₂ exhausted: no sublevel component around t = {probe}")))?;
        if inner.component_count() > 1 {
            return Err(Error::DipScan(format!("ε₂ exhausted: component {idx} splits at depth 3ε₃/4")));
        }
        pieces.push(Piece { i: host, j, eps: eps3 * 0.5f64.powi(idx as i32 + 3) });
    }
    let out = correct_pieces(f, g, &pieces, eps3, opts)?;
    finish(f, g, out, set, &SimpleSet::full(), measure.sqrt(), eps, opts)
}

fn check_pair(f: &TrigPoly, g: &TrigPoly) -> Result<()> {
    let tol = 1e-12 * f.max_abs_coeff().max(1.0);
    if moduli_equal(f, g, tol).residual > tol {
        return Err(Error::Precondition("f and g must have equal coefficient moduli".into()));
    }
    Ok(())
}

struct Raw {
    f: TrigPoly,
    g: TrigPoly,
    depth: Vec<u32>,
    cleanup: bool,
}

/// Walsh depth `l = ⌊log₄(|J|/|I|)⌋`.
fn walsh_depth(i: &Arc, j: &Arc) -> u32 {
    let mut l = 0;
    while i.len * 4f64.powi(l as i32 + 1) <= j.len * (1.0 + 1e-12) {
        l += 1;
    }
    l
}

fn correct_pieces(f: &TrigPoly, g: &TrigPoly, pieces: &[Piece], eps: f64, opts: &CorrectionOptions) -> Result<Raw> {
    check_modulus_band(f, opts.c1)?;
    // One depth for all pieces: the largest l with 4^l|I_i| ≤ |J_i| for every i.
    let l = pieces.iter().map(|p| walsh_depth(&p.i, &p.j)).min().unwrap_or(0);
    let depth = vec![l; pieces.len()];
    if l == 0 {
        // Plain correction with the identical tail added to g.
        let mut tail = TrigPoly::zero();
        for p in pieces {
            let c = correct_interval_with(f, p.i.start, p.i.end(), p.eps, opts)?;
            tail = &tail + &c.poly.tail_above(f.degree());
        }
        return Ok(Raw { f: f.extend_with(&tail)?, g: g.extend_with(&tail)?, depth, cleanup: false });
    }
    let mut delta_scale = 0.25;
    let mut order = opts.psi_order;
    for _ in 0..3 {
        match walsh_step(f, g, pieces, &depth, eps, delta_scale, order, opts)? {
            Some(raw) => return Ok(raw),
            None => {
                delta_scale *= 0.5;
                order *= 2;
            }
        }
    }
    Err(Error::Certificate("residual set never settled inside the bad set".into()))
}

/// `√(τ² − |f|²)·i f/|f|` on the arc, 0 elsewhere, sampled on `k` points.
fn lift_field(f: &TrigPoly, arc: &Arc, k: usize) -> Result<Vec<Complex64>> {
    let tau = f.evaluate(arc.start).norm();
    let values = f.grid_values(k)?;
    Ok(values
        .iter()
        .enumerate()
        .map(|(i, &z)| {
            if !arc.contains(i as f64 / k as f64) {
                return Complex64::new(0.0, 0.0);
            }
            let r = z.norm();
            let h = (tau * tau - r * r).max(0.0).sqrt();
            Complex64::i() * z / r * h
        })
        .collect())
}

/// Smallest de la Vallée Poussin degree approximating the lift field within `delta`.
fn approximate_field(f: &TrigPoly, arc: &Arc, delta: f64, cap: u64) -> Result<TrigPoly> {
    let mut d = 16u64.max(2 * f.degree());
    let mut trace = Vec::new();
    while d <= cap {
        let k = next_pow2(16 * d).max(4096);
        let field = lift_field(f, arc, k)?;
        let p = vallee_poussin(&field, d);
        let pv = p.grid_values(k)?;
        let err = pv.iter().zip(&field).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        trace.push((d, err));
        if err < delta {
            return Ok(p);
        }
        d *= 2;
    }
    Err(Error::AdaptiveCap { what: "degree of the lift-field approximant P".into(), trace })
}

/// First step: `f₂ = f + Σ_j Pσ_j` and `g₂ = g + Σ_j (Pσ_j)(t − shift_j)`.
struct Spread {
    f2: TrigPoly,
    g2: TrigPoly,
    sigma: SigmaFamily,
    #[allow(dead_code)] // read by the tests
    ps: Vec<TrigPoly>,
}

fn spread(f: &TrigPoly, g: &TrigPoly, pieces: &[Piece], l: u32, delta_scale: f64, order: u32, opts: &CorrectionOptions) -> Result<Spread> {
    let floor = f.degree().max(g.degree());
    let ps: Vec<TrigPoly> = pieces
        .iter()
        .map(|p| approximate_field(f, &p.i, delta_scale * p.eps, 1 << 14))
        .collect::<Result<_>>()?;
    let digit0 = ps.iter().map(TrigPoly::degree).max().unwrap_or(0);
    let spec = SigmaSpec {
        l,
        order,
        families: pieces.len(),
        lattice: ScaleLattice::Packed { floor, digit0 },
        freq_cap: opts.freq_cap,
        max_terms: opts.freq_cap as usize,
    };
    let sigma = SigmaFamily::build(&spec)?;
    sigma.check_disjoint(digit0, floor)?;
    let mut tail_f: Vec<(i64, Complex64)> = Vec::new();
    let mut tail_g: Vec<(i64, Complex64)> = Vec::new();
    for (fam, piece) in pieces.iter().enumerate() {
        for (jdx, member) in sigma.members[fam].iter().enumerate() {
            let term = ps[fam].multiply(member);
            let shift = piece.j.start - piece.i.start + jdx as f64 * piece.i.len;
            tail_f.extend(term.coeffs());
            tail_g.extend(term.rotate(-shift).coeffs());
        }
    }
    Ok(Spread {
        f2: f.extend_with(&TrigPoly::from_coeffs(tail_f))?,
        g2: g.extend_with(&TrigPoly::from_coeffs(tail_g))?,
        sigma,
        ps,
    })
}

#[allow(clippy::too_many_arguments)]
fn walsh_step(
    f: &TrigPoly,
    g: &TrigPoly,
    pieces: &[Piece],
    depth: &[u32],
    eps: f64,
    delta_scale: f64,
    order: u32,
    opts: &CorrectionOptions,
) -> Result<Option<Raw>> {
    let Spread { f2, g2, sigma, .. } = spread(f, g, pieces, depth[0], delta_scale, order, opts)?;
    let mut residual = SimpleSet::empty();
    for p in pieces {
        let tau = f.evaluate(p.i.start).norm();
        let low = sublevel_set(&f2, tau - 0.5 * p.eps)?;
        residual = residual.union(&low.intersect(&SimpleSet::from_arcs(&[p.i])));
    }
    if residual.is_empty() {
        return Ok(Some(Raw { f: f2, g: g2, depth: depth.to_vec(), cleanup: false }));
    }
    // The residual set must sit inside the bad set so that its boundary level is constant.
    let bad = sigma.bad.to_simple_set();
    if residual.intersect(&bad).measure() < residual.measure() - 1e-12 {
        return Ok(None);
    }
    let big_f = correct_simple_set_with(&f2, &residual, 0.5 * eps, opts)?.poly;
    let extra: Vec<(i64, Complex64)> = big_f.tail_above(f2.degree()).coeffs().collect();
    let signs = flatten_signs(&extra, opts.seed, opts.k_flat, opts.flatten_attempts)?;
    let big_g = g2.extend_with(&signs.apply(&extra))?;
    Ok(Some(Raw { f: big_f, g: big_g, depth: depth.to_vec(), cleanup: true }))
}

#[allow(clippy::too_many_arguments)]
fn finish(
    f: &TrigPoly,
    g: &TrigPoly,
    raw: Raw,
    f_set: &SimpleSet,
    g_set: &SimpleSet,
    ratio: f64,
    eps: f64,
    opts: &CorrectionOptions,
) -> Result<CorrectedPair> {
    let tau = f.evaluate(f_set.arcs()[0].start).norm();
    let mut checks = certify_level(f, &raw.f, f_set, tau, eps, opts)?;
    let grid = CellGrid::for_degree(raw.g.degree(), opts.grid_floor, opts.max_grid)?;
    let diff = &raw.g - g;
    let dv = diff.grid_values(grid.k)?;
    let slack = grid.slack(&diff);
    let on = grid.touching(g_set);
    let off = grid.touching(&g_set.complement());
    let (mut inside, mut outside) = (0.0f64, 0.0f64);
    for i in 0..grid.k {
        if on[i] {
            inside = inside.max(dv[i].norm());
        }
        if off[i] {
            outside = outside.max(dv[i].norm());
        }
    }
    let k_g = (inside + slack) / ratio;
    checks.push(Check::at_most("K_g = max |g − G| on J / √(|I|/|J|)", k_g, opts.ceiling, grid.k));
    if !off.iter().any(|&x| x) {
        outside = 0.0;
    }
    checks.push(Check::below("|g − G| off J", outside + slack, eps, grid.k));
    let residual = moduli_equal(&raw.f, &raw.g, 0.0).residual;
    checks.push(Check::at_most("moduli residual", residual, 1e-12 * raw.f.max_abs_coeff().max(1.0), 0));
    if let Some(c) = first_failure(&checks) {
        return Err(Error::Certificate(format!("{}: {} vs bound {}", c.name, c.value, c.bound)));
    }
    Ok(CorrectedPair {
        degree: raw.f.degree().max(raw.g.degree()),
        f: raw.f,
        g: raw.g,
        checks,
        moduli_residual: residual,
        k_g,
        depth: raw.depth,
        cleanup: raw.cleanup,
    })
}
