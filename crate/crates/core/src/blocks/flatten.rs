//! Random ±1 sign choices that keep a coefficient sequence's sup norm near
//! its L² norm.

use crate::error::{Error, Result};
use crate::trigpoly::{SupBound, TrigPoly};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

#[derive(Clone, Debug)]
pub struct FlattenOutcome {
    /// Sign for each input coefficient, in input order.
    pub signs: Vec<i8>,
    pub sup: SupBound,
    pub attempt: usize,
    pub target: f64,
}

impl FlattenOutcome {
    pub fn success(&self) -> bool {
        self.sup.hi <= self.target
    }

    /// `Σ ξ_n c_n e(nt)` for the chosen signs.
    pub fn apply(&self, coeffs: &[(i64, Complex64)]) -> TrigPoly {
        signed(coeffs, &self.signs)
    }
}

/// `K_flat·√Σ|c_n|²·√ln max(deg, 2)`.
pub fn flatten_target(coeffs: &[(i64, Complex64)], k_flat: f64) -> f64 {
    let l2 = coeffs.iter().map(|(_, c)| c.norm_sqr()).sum::<f64>().sqrt();
    let deg = coeffs.iter().map(|(n, _)| n.unsigned_abs()).max().unwrap_or(0).max(2);
    k_flat * l2 * (deg as f64).ln().sqrt()
}

/// Best of `max_attempts` independent sign vectors (lowest certified sup,
/// ties to the earlier attempt). Attempt `a` draws from the ChaCha stream `a`
/// of `seed`, so results do not depend on evaluation order. When the input is
/// conjugate-symmetric, `n` and `−n` share a sign so real inputs stay real.
pub fn flatten_best(
    coeffs: &[(i64, Complex64)],
    seed: u64,
    k_flat: f64,
    max_attempts: usize,
) -> Result<FlattenOutcome> {
    if coeffs.is_empty() {
        return Err(Error::Precondition("flattening needs a nonempty frequency set".into()));
    }
    let target = flatten_target(coeffs, k_flat);
    let pairing = conjugate_pairs(coeffs);
    let mut best: Option<FlattenOutcome> = None;
    for attempt in 0..max_attempts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(attempt as u64);
        let mut signs = vec![0i8; coeffs.len()];
        for i in 0..coeffs.len() {
            signs[i] = match pairing[i] {
                Some(j) if j < i => signs[j],
                _ => {
                    if rng.gen::<bool>() {
                        1
                    } else {
                        -1
                    }
                }
            };
        }
        let sup = signed(coeffs, &signs).sup_norm_certified();
        if best.as_ref().is_none_or(|b| sup.hi < b.sup.hi) {
            best = Some(FlattenOutcome { signs, sup, attempt, target });
        }
    }
    Ok(best.expect("at least one attempt"))
}

/// Like [`flatten_best`] but fails when the best attempt misses the target.
pub fn flatten_signs(
    coeffs: &[(i64, Complex64)],
    seed: u64,
    k_flat: f64,
    max_attempts: usize,
) -> Result<FlattenOutcome> {
    let out = flatten_best(coeffs, seed, k_flat, max_attempts)?;
    if out.success() {
        Ok(out)
    } else {
        Err(Error::Flatten { best: out.sup.hi, target: out.target })
    }
}

fn signed(coeffs: &[(i64, Complex64)], signs: &[i8]) -> TrigPoly {
    TrigPoly::from_coeffs(coeffs.iter().zip(signs).map(|(&(n, c), &s)| (n, c * f64::from(s))))
}

/// `pairing[i] = Some(j)` when `coeffs[j]` sits at `−n` with the conjugate
/// value; `None` everywhere unless the whole input is conjugate-symmetric.
fn conjugate_pairs(coeffs: &[(i64, Complex64)]) -> Vec<Option<usize>> {
    let index: BTreeMap<i64, usize> = coeffs.iter().enumerate().map(|(i, (n, _))| (*n, i)).collect();
    let pairs: Vec<Option<usize>> = coeffs
        .iter()
        .map(|&(n, c)| index.get(&-n).copied().filter(|&j| coeffs[j].1 == c.conj()))
        .collect();
    if pairs.iter().all(Option::is_some) {
        pairs
    } else {
        vec![None; coeffs.len()]
    }
}
