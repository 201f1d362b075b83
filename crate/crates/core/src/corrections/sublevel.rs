use crate::error::{Error, Result};
use crate::numeric::next_pow2;
use crate::simple_set::SimpleSet;
use crate::trigpoly::TrigPoly;

const ROOT_TOL: f64 = 1e-12;

/// `{t : |f(t)| ≤ level}`. Sign changes of `|f|² − level²` (a polynomial of
/// degree `2·deg f`) are located on a `16·deg` grid and refined by bisection.
pub fn sublevel_set(f: &TrigPoly, level: f64) -> Result<SimpleSet> {
    let k = next_pow2(32 * f.degree().max(1)).max(1024);
    let values = f.grid_values(k)?;
    let q = |z: num_complex::Complex64| z.norm_sqr() - level * level;
    let qv: Vec<f64> = values.iter().map(|&z| q(z)).collect();
    let below = |x: f64| x <= 0.0;
    let mut crossings: Vec<(f64, bool)> = Vec::new();
    for i in 0..k {
        let j = (i + 1) % k;
        if below(qv[i]) != below(qv[j]) {
            let (mut lo, mut hi) = (i as f64 / k as f64, (i + 1) as f64 / k as f64);
            let start_below = below(qv[i]);
            while hi - lo > ROOT_TOL {
                let mid = 0.5 * (lo + hi);
                if below(q(f.evaluate(mid))) == start_below {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            // `true` marks the start of a sublevel arc.
            crossings.push((0.5 * (lo + hi), !start_below));
        }
    }
    if crossings.is_empty() {
        return Ok(if below(qv[0]) { SimpleSet::full() } else { SimpleSet::empty() });
    }
    let components = crossings.len() / 2;
    if components as u64 > 2 * f.degree() + 1 {
        return Err(Error::Precondition(format!(
            "sublevel set has {components} components, more than 2·deg f + 1"
        )));
    }
    let first_start = crossings.iter().position(|c| c.1).expect("crossings alternate");
    let mut arcs = Vec::with_capacity(components);
    for c in 0..components {
        let (s, _) = crossings[(first_start + 2 * c) % crossings.len()];
        let (e, _) = crossings[(first_start + 2 * c + 1) % crossings.len()];
        let len = if e > s { e - s } else { e + 1.0 - s };
        arcs.push(crate::simple_set::Arc { start: s, len });
    }
    Ok(SimpleSet::from_arcs(&arcs))
}

/// Largest depth `δ` such that `{t ∈ I : |f(t)| < τ − δ′}` stays an interval
/// for every component `I` of `set` and every `δ′ ≤ δ`: the smallest gap
/// between `τ` and an interior local maximum of `|f|` below `τ`.
/// Returns `f64::INFINITY` when no component has such a maximum.
pub fn dip_interval_depth(f: &TrigPoly, set: &SimpleSet, tau: f64) -> Result<f64> {
    let k = next_pow2(64 * f.degree().max(1)).max(4096);
    let m: Vec<f64> = f.grid_values(k)?.iter().map(|z| z.norm()).collect();
    let mut depth = f64::INFINITY;
    for arc in set.arcs() {
        let first = (arc.start * k as f64).ceil() as i64;
        let last = (arc.end() * k as f64).floor() as i64;
        let at = |i: i64| m[i.rem_euclid(k as i64) as usize];
        for i in first + 1..last {
            let v = at(i);
            if v >= at(i - 1) && v > at(i + 1) && v < tau {
                // Only a maximum flanked by lower values splits the sublevel set.
                let left = (first..i).map(at).fold(f64::INFINITY, f64::min);
                let right = (i + 1..=last).map(at).fold(f64::INFINITY, f64::min);
                if left < v && right < v {
                    depth = depth.min(tau - v);
                }
            }
        }
    }
    if depth <= 0.0 {
        return Err(Error::DipScan(format!("interior maximum at level {tau}")));
    }
    Ok(depth)
}
