//! Polynomial stand-ins for products of Rademacher functions.
//!
//! Each level `i` uses three dilated copies `s = ψ(m·t)` of the Fejér
//! Rademacher approximant and the four factors `s₁, s₂, s₃, −s₁s₂s₃`; member
//! `σ_j` is `2^{−l}` times one factor per level. Because
//! `|r₁ + r₂ + r₃ − r₁r₂r₃| = 2` for true ±1 values, `|Σ_j σ_j| ≈ 1` away
//! from the jumps.

use super::fejer::fejer_rademacher;
use crate::error::{Error, Result};
use crate::numeric::{dist_to_int, next_pow2};
use crate::simple_set::SimpleSet;
use crate::trigpoly::{TrigPoly, MAX_GRID};
use serde::Serialize;
use std::collections::HashSet;

/// How the dilation factors are chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScaleLattice {
    /// `m_i = (3M)^i`, numbered consecutively across families.
    Geometric,
    /// Smallest factors keeping every digit expansion
    /// `n₀ + Σ nᵢmᵢ` (`|n₀| ≤ digit0`) unique and above `floor`. Families
    /// share magnitudes and are separated by residues of their first-level
    /// factors modulo a power-of-two multiple of `2·digit0 + 1`.
    Packed { floor: u64, digit0: u64 },
}

#[derive(Clone, Debug)]
pub struct SigmaSpec {
    pub l: u32,
    /// Fejér order `M` of the Rademacher approximant.
    pub order: u32,
    /// Number of independent families (the `q` index).
    pub families: usize,
    pub lattice: ScaleLattice,
    /// Largest admissible frequency.
    pub freq_cap: u64,
    /// Largest admissible coefficient count of a single member.
    pub max_terms: usize,
}

impl SigmaSpec {
    pub fn new(l: u32, order: u32) -> Self {
        SigmaSpec {
            l,
            order,
            families: 1,
            lattice: ScaleLattice::Geometric,
            freq_cap: 1 << 22,
            max_terms: 1 << 22,
        }
    }
}

/// Points with `⟨2mt⟩ ≤ radius` for some scale `m`.
#[derive(Clone, Debug, Serialize)]
pub struct BadSet {
    pub scales: Vec<i64>,
    pub radius: f64,
}

impl BadSet {
    pub fn contains(&self, t: f64) -> bool {
        self.scales.iter().any(|&m| dist_to_int(2.0 * m as f64 * t) <= self.radius)
    }

    /// Intervals of half-width `radius/(2m)` around the jump points `k/(2m)`.
    pub fn to_simple_set(&self) -> SimpleSet {
        let mut pieces = Vec::new();
        for &m in &self.scales {
            let h = self.radius / (2.0 * m as f64);
            for k in 0..2 * m {
                let c = k as f64 / (2.0 * m as f64);
                pieces.extend(SimpleSet::arc(c - h, 2.0 * h).intervals().iter().copied());
            }
        }
        SimpleSet::new(pieces).expect("valid pieces")
    }

    /// Union bound `Σ 2·radius` (each scale covers a `2·radius` fraction).
    pub fn measure_bound(&self) -> f64 {
        (2.0 * self.radius * self.scales.len() as f64).min(1.0)
    }
}

#[derive(Clone, Debug)]
pub struct SigmaFamily {
    pub l: u32,
    pub order: u32,
    /// `scales[q]` holds the `3l` dilation factors of family `q`.
    pub scales: Vec<Vec<i64>>,
    /// `members[q][j]`, `j = Σ(εᵢ − 1)4^{i−1}`.
    pub members: Vec<Vec<TrigPoly>>,
    pub bad: BadSet,
    pub per_member_bound: f64,
}

/// Grid measurements of the family's defining inequalities.
#[derive(Clone, Debug, Serialize)]
pub struct SigmaCertificate {
    pub grid_size: usize,
    pub max_member: f64,
    pub max_sum: f64,
    /// `max (1 − |Σ_j σ_j|)/(l·M^{−1/2})` over good grid points.
    pub fitted_sum: f64,
    /// `max (2^{−l} − |σ_j|)/(l·M^{−1/2})` over good grid points and members.
    pub fitted_member: f64,
    pub good_fraction: f64,
}

/// The single-family construction with `(3M)^i` scales.
pub fn build_sigma_family(l: u32, m: u32, q_count: usize) -> Result<SigmaFamily> {
    let mut spec = SigmaSpec::new(l, m);
    spec.families = q_count;
    SigmaFamily::build(&spec)
}

impl SigmaFamily {
    pub fn build(spec: &SigmaSpec) -> Result<SigmaFamily> {
        if spec.l == 0 || spec.order < 4 || spec.families == 0 {
            return Err(Error::Precondition("σ-family needs l ≥ 1, M ≥ 4, q ≥ 1".into()));
        }
        let psi = fejer_rademacher(spec.order);
        let harmonic = psi.degree() as i64;
        let scales = match spec.lattice {
            ScaleLattice::Geometric => geometric_scales(spec)?,
            ScaleLattice::Packed { floor, digit0 } => packed_scales(spec, harmonic, floor, digit0)?,
        };
        let per = 3 * spec.l as usize;
        let mut members = Vec::with_capacity(spec.families);
        for fam in &scales {
            let s: Vec<TrigPoly> = fam.iter().map(|&m| psi.dilate(m)).collect();
            let mut levels = Vec::with_capacity(spec.l as usize);
            for i in 0..spec.l as usize {
                let (a, b, c) = (&s[3 * i], &s[3 * i + 1], &s[3 * i + 2]);
                let triple = -&a.multiply(b).multiply(c);
                levels.push([a.clone(), b.clone(), c.clone(), triple]);
            }
            let count = 4usize.pow(spec.l);
            let mut fam_members = Vec::with_capacity(count);
            for j in 0..count {
                let digits: Vec<usize> = (0..spec.l).map(|i| (j >> (2 * i)) & 3).collect();
                let terms: usize = digits.iter().enumerate().map(|(i, &e)| levels[i][e].nnz()).product();
                if terms > spec.max_terms {
                    return Err(Error::FrequencyBudget(format!(
                        "σ member {j} would carry {terms} coefficients (cap {})",
                        spec.max_terms
                    )));
                }
                let mut prod = TrigPoly::constant(0.5f64.powi(spec.l as i32));
                for (i, &e) in digits.iter().enumerate() {
                    prod = prod.multiply(&levels[i][e]);
                }
                fam_members.push(prod);
            }
            members.push(fam_members);
        }
        debug_assert!(scales.iter().all(|f| f.len() == per));
        let bad = BadSet {
            scales: scales.iter().flatten().copied().collect(),
            radius: f64::from(spec.order).powf(-0.5),
        };
        Ok(SigmaFamily {
            l: spec.l,
            order: spec.order,
            scales,
            members,
            bad,
            per_member_bound: 0.5f64.powi(spec.l as i32),
        })
    }

    pub fn member_count(&self) -> usize {
        4usize.pow(self.l)
    }

    pub fn top_degree(&self) -> u64 {
        self.members.iter().flatten().map(TrigPoly::degree).max().unwrap_or(0)
    }

    /// `Σ_j σ_j^q` as a polynomial.
    pub fn sum(&self, q: usize) -> TrigPoly {
        self.members[q].iter().fold(TrigPoly::zero(), |acc, m| &acc + m)
    }

    /// Exact check that the bands `[f − digit0, f + digit0]` around all member
    /// frequencies are pairwise disjoint and stay above `floor` in modulus.
    pub fn check_disjoint(&self, digit0: u64, floor: u64) -> Result<()> {
        let d = digit0 as i64;
        let mut bands: Vec<(i64, i64)> = Vec::new();
        for m in self.members.iter().flatten() {
            for (n, _) in m.coeffs() {
                if n.unsigned_abs() <= floor + digit0 {
                    return Err(Error::Certificate(format!(
                        "σ frequency {n} too close to the preserved band {floor} (+{digit0})"
                    )));
                }
                bands.push((n - d, n + d));
            }
        }
        bands.sort_unstable();
        for w in bands.windows(2) {
            if w[1].0 <= w[0].1 {
                return Err(Error::Certificate(format!(
                    "σ spectra overlap near frequencies {} and {}",
                    w[0].0 + d,
                    w[1].0 + d
                )));
            }
        }
        Ok(())
    }

    /// Total size of member spectra and size of their union (equal iff disjoint).
    pub fn spectrum_sizes(&self) -> (usize, usize) {
        let total: usize = self.members.iter().flatten().map(TrigPoly::nnz).sum();
        let union: HashSet<i64> = self.members.iter().flatten().flat_map(|m| m.coeffs().map(|(n, _)| n)).collect();
        (total, union.len())
    }

    /// Grid values of every dilated approximant, for family `q`.
    fn scale_values(&self, q: usize, k: usize) -> Vec<Vec<f64>> {
        let psi = fejer_rademacher(self.order);
        let base: Vec<f64> = psi.grid_values(k).expect("power-of-two grid").iter().map(|z| z.re).collect();
        let mask = k as u64 - 1;
        self.scales[q]
            .iter()
            .map(|&m| (0..k as u64).map(|i| base[(i.wrapping_mul(m as u64) & mask) as usize]).collect())
            .collect()
    }

    /// Measures the family's inequalities on a grid resolving every member.
    pub fn certify(&self) -> SigmaCertificate {
        let k = next_pow2(16 * self.top_degree().max(1)).min(MAX_GRID);
        let radius = self.bad.radius;
        let scale = f64::from(self.l) * radius;
        let unit = self.per_member_bound;
        let good: Vec<bool> = (0..k).map(|i| !self.bad.contains(i as f64 / k as f64)).collect();
        let good_count = good.iter().filter(|&&g| g).count();
        let (mut max_member, mut max_sum, mut fitted_sum, mut fitted_member) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for q in 0..self.members.len() {
            let s = self.scale_values(q, k);
            for i in 0..k {
                let (mut sum, mut hi, mut lo) = (unit, unit, unit);
                for lev in 0..self.l as usize {
                    let (a, b, c) = (s[3 * lev][i], s[3 * lev + 1][i], s[3 * lev + 2][i]);
                    let f = [a.abs(), b.abs(), c.abs(), (a * b * c).abs()];
                    sum *= a + b + c - a * b * c;
                    hi *= f.iter().copied().fold(0.0, f64::max);
                    lo *= f.iter().copied().fold(f64::INFINITY, f64::min);
                }
                max_sum = max_sum.max(sum.abs());
                max_member = max_member.max(hi);
                if good[i] {
                    fitted_sum = fitted_sum.max((1.0 - sum.abs()) / scale);
                    fitted_member = fitted_member.max((unit - lo) / scale);
                }
            }
        }
        SigmaCertificate {
            grid_size: k,
            max_member,
            max_sum,
            fitted_sum,
            fitted_member,
            good_fraction: good_count as f64 / k as f64,
        }
    }
}

fn geometric_scales(spec: &SigmaSpec) -> Result<Vec<Vec<i64>>> {
    let base = 3 * u64::from(spec.order);
    let per = 3 * spec.l as usize;
    let mut out = Vec::with_capacity(spec.families);
    let mut m: u64 = 1;
    for _ in 0..spec.families {
        let mut fam = Vec::with_capacity(per);
        for _ in 0..per {
            m = m.checked_mul(base).filter(|&v| v <= spec.freq_cap).ok_or_else(|| {
                Error::FrequencyBudget(format!(
                    "(3M)^i = {}·{base} exceeds the frequency cap {}",
                    m, spec.freq_cap
                ))
            })?;
            fam.push(m as i64);
        }
        out.push(fam);
    }
    Ok(out)
}

fn packed_scales(spec: &SigmaSpec, harmonic: i64, floor: u64, digit0: u64) -> Result<Vec<Vec<i64>>> {
    let per = 3 * spec.l as usize;
    let d = digit0 as i64;
    let h = harmonic;
    // Residue classes: family 0 ↦ 0, family s ≥ 1 ↦ R/2^s. Odd multiples of
    // distinct R/2^s never meet, and they stay 2d+1 apart when R/2^S ≥ 2(2d+1).
    let tag_levels = spec.families.saturating_sub(1) as u32;
    let modulus = if spec.families > 1 { (2 * (2 * d + 1)) << tag_levels } else { 1 };
    let tag = |fam: usize| if fam == 0 { 0 } else { modulus >> fam };
    let round_up = |x: i64, r: i64| {
        if modulus == 1 {
            x
        } else {
            x + (r - x).rem_euclid(modulus)
        }
    };
    let first = (3 * floor.max(digit0) as i64).max(floor as i64 + d) + 1;
    let mut out = Vec::with_capacity(spec.families);
    for fam in 0..spec.families {
        let mut scales: Vec<i64> = Vec::with_capacity(per);
        let mut acc: i64 = 0;
        for i in 0..per {
            let need = if i == 0 { first } else { 2 * (h * acc + d) + 1 };
            let r = if i < 3 { tag(fam) } else { 0 };
            let m = round_up(need, r);
            let top = h.checked_mul(acc + m).and_then(|v| v.checked_add(d));
            match top {
                Some(v) if v as u64 <= spec.freq_cap => {}
                _ => {
                    return Err(Error::FrequencyBudget(format!(
                        "scale {m} (family {fam}, index {}) pushes the spectrum past the cap {}",
                        i + 1,
                        spec.freq_cap
                    )))
                }
            }
            scales.push(m);
            acc += m;
        }
        out.push(scales);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn level_one_has_four_members() {
        let fam = build_sigma_family(1, 4, 1).unwrap();
        assert_eq!(fam.members[0].len(), 4);
        assert_eq!(fam.scales[0], vec![12, 144, 1728]);
    }

    #[test]
    fn geometric_spectra_are_disjoint() {
        let fam = build_sigma_family(1, 8, 1).unwrap();
        let (total, union) = fam.spectrum_sizes();
        assert_eq!(total, union);
        // Every frequency is a combination of multiples of 3M, hence clear of |n| < M.
        fam.check_disjoint(0, 7).unwrap();
        assert!(fam.members[0].iter().flat_map(|m| m.coeffs()).all(|(n, _)| n % 24 == 0));
    }

    #[test]
    fn budget_error_names_the_scale() {
        let mut spec = SigmaSpec::new(2, 16);
        spec.freq_cap = 1 << 20;
        match SigmaFamily::build(&spec) {
            Err(Error::FrequencyBudget(msg)) => assert!(msg.contains("(3M)^i"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn packed_families_are_disjoint() {
        let mut spec = SigmaSpec::new(1, 8);
        spec.families = 3;
        spec.lattice = ScaleLattice::Packed { floor: 4, digit0: 31 };
        let fam = SigmaFamily::build(&spec).unwrap();
        fam.check_disjoint(31, 4).unwrap();
        let (total, union) = fam.spectrum_sizes();
        assert_eq!(total, union);
        // Sharing magnitudes keeps the top degree close to a single family's.
        let mut single = spec.clone();
        single.families = 1;
        let one = SigmaFamily::build(&single).unwrap();
        assert!(fam.top_degree() < 40 * one.top_degree(), "{} vs {}", fam.top_degree(), one.top_degree());
    }

    #[test]
    fn packed_level_two_is_disjoint() {
        let mut spec = SigmaSpec::new(2, 4);
        spec.families = 2;
        spec.lattice = ScaleLattice::Packed { floor: 10, digit0: 5 };
        let fam = SigmaFamily::build(&spec).unwrap();
        assert_eq!(fam.members[1].len(), 16);
        fam.check_disjoint(5, 10).unwrap();
    }

    #[test]
    fn members_match_product_formula_on_grid() {
        let fam = build_sigma_family(1, 4, 1).unwrap();
        let k = next_pow2(16 * fam.top_degree());
        let s = fam.scale_values(0, k);
        for (j, m) in fam.members[0].iter().enumerate() {
            let v = m.grid_values(k).unwrap();
            for i in (0..k).step_by(97) {
                let (a, b, c) = (s[0][i], s[1][i], s[2][i]);
                let want = 0.5 * [a, b, c, -a * b * c][j];
                assert!((v[i].re - want).abs() < 1e-12 && v[i].im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn certificate_bounds_hold() {
        let fam = build_sigma_family(1, 16, 1).unwrap();
        let cert = fam.certify();
        assert!(cert.max_member <= 0.5 + 1e-9);
        assert!(cert.max_sum <= 1.0 + 1e-9);
        assert!(cert.good_fraction > 0.0);
        assert!(cert.fitted_sum < 5.0 && cert.fitted_member < 5.0, "{cert:?}");
    }

    #[test]
    fn exact_walsh_sum_has_unit_modulus() {
        // Replacing each s_i by the true Rademacher step at its scale.
        let fam = build_sigma_family(1, 4, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10_000 {
            let t: f64 = rng.gen();
            let r: Vec<f64> = fam.scales[0]
                .iter()
                .map(|&m| if (m as f64 * t).fract() < 0.5 { 1.0 } else { -1.0 })
                .collect();
            let sum = 0.5 * (r[0] + r[1] + r[2] - r[0] * r[1] * r[2]);
            assert_eq!(sum.abs(), 1.0);
        }
    }

    #[test]
    fn cube_inequality() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..1_000_000 {
            let (x, y, z): (f64, f64, f64) =
                (rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
            worst = worst.max(x + y + z - x * y * z);
        }
        assert!(worst <= 2.0 + 1e-15);
        for bits in 0..8 {
            let v: Vec<f64> = (0..3).map(|i| if bits >> i & 1 == 1 { 1.0 } else { -1.0 }).collect();
            assert_eq!((v[0] + v[1] + v[2] - v[0] * v[1] * v[2]).abs(), 2.0);
        }
    }

    #[test]
    fn bad_set_materialization() {
        let bad = BadSet { scales: vec![3], radius: 0.1 };
        let s = bad.to_simple_set();
        assert!((s.measure() - 0.2).abs() < 1e-12);
        for k in 0..200 {
            let t = k as f64 / 200.0 + 0.001;
            assert_eq!(s.contains(t), bad.contains(t), "t = {t}");
        }
    }
}
