use crate::error::{Error, Result};
use crate::numeric::next_pow2;
use crate::report::Check;
use crate::simple_set::SimpleSet;
use crate::trigpoly::{extends, TrigPoly};
use serde::Serialize;

/// Equispaced grid whose `i`-th cell is `[i/K − 1/2K, i/K + 1/2K]`. A bound
/// measured at cell centres transfers to the whole cell once the Lipschitz
/// slack `‖p′‖∞/2K` is added.
#[derive(Clone, Copy, Debug)]
pub struct CellGrid {
    pub k: usize,
}

impl CellGrid {
    /// `max(floor, next_pow2(16·deg))`, failing when that exceeds `max`.
    pub fn for_degree(deg: u64, floor: usize, max: usize) -> Result<Self> {
        let k = next_pow2(16 * deg.max(1)).max(floor);
        if k > max {
            return Err(Error::FrequencyBudget(format!(
                "certifying degree {deg} needs a grid of {k} points (cap {max})"
            )));
        }
        Ok(CellGrid { k })
    }

    pub fn t(&self, i: usize) -> f64 {
        i as f64 / self.k as f64
    }

    /// Lipschitz slack of `p` over half a cell.
    pub fn slack(&self, p: &TrigPoly) -> f64 {
        if p.degree() == 0 {
            return 0.0;
        }
        p.derivative().sup_norm_certified().hi / (2.0 * self.k as f64)
    }

    /// Cells that meet `set`.
    pub fn touching(&self, set: &SimpleSet) -> Vec<bool> {
        self.mark(set, -0.5, 0.5)
    }

    /// Cells contained in `set`.
    pub fn inside(&self, set: &SimpleSet) -> Vec<bool> {
        self.mark(set, 0.5, -0.5)
    }

    fn mark(&self, set: &SimpleSet, lo_shift: f64, hi_shift: f64) -> Vec<bool> {
        let k = self.k as i64;
        let kf = self.k as f64;
        let mut mask = vec![false; self.k];
        for arc in set.arcs() {
            if arc.len >= 1.0 {
                return vec![true; self.k];
            }
            let first = (arc.start * kf + lo_shift).ceil() as i64;
            let last = (arc.end() * kf + hi_shift).floor() as i64;
            let mut i = first;
            while i <= last && i < first + k {
                mask[i.rem_euclid(k) as usize] = true;
                i += 1;
            }
        }
        mask
    }
}

/// Lifting of `f` on `E` from `alpha` to `beta` with tolerance `eps`.
#[derive(Clone, Debug, Serialize)]
pub struct LiftingSpec {
    pub set: SimpleSet,
    pub alpha: f64,
    pub beta: f64,
    pub eps: f64,
}

impl LiftingSpec {
    pub fn new(set: SimpleSet, alpha: f64, beta: f64, eps: f64) -> Result<Self> {
        if !(alpha < beta) || !(eps > 0.0) {
            return Err(Error::Precondition(format!(
                "lifting needs α < β and ε > 0 (got α = {alpha}, β = {beta}, ε = {eps})"
            )));
        }
        Ok(LiftingSpec { set, alpha, beta, eps })
    }
}

/// The four lifting clauses measured on a cell grid.
#[derive(Clone, Debug, Serialize)]
pub struct LiftingCertificate {
    pub grid_size: usize,
    /// `max_E |f| ≤ α`, with slack.
    pub alpha_ok: bool,
    /// `max |f − F|` off `E`, slack included.
    pub clause1_value: f64,
    pub clause1_ok: bool,
    /// Measure of the cells of `E` where `(β−α) + |f| − ε < |F| < β + ε` may fail.
    pub clause2_exception_measure: f64,
    pub clause2_ok: bool,
    /// `min_E (|F| − |f|)` and `max_E |F|`, slack included.
    pub clause3_low: f64,
    pub clause3_high: f64,
    pub clause3_ok: bool,
    pub clause4_sup: f64,
    pub clause4_bound: f64,
    pub clause4_ok: bool,
    pub extension_ok: bool,
}

impl LiftingCertificate {
    pub fn passes(&self) -> bool {
        self.first_failure().is_none()
    }

    /// Name of the first clause that fails.
    pub fn first_failure(&self) -> Option<&'static str> {
        [
            (self.extension_ok, "extension"),
            (self.clause1_ok, "clause 1: |f − F| < ε off E"),
            (self.clause2_ok, "clause 2: exceptional measure < ε"),
            (self.clause3_ok, "clause 3: |f| − ε < |F| < β + ε on E"),
            (self.clause4_ok, "clause 4: ‖F − f‖∞ < 2√(β² − α²)"),
        ]
        .into_iter()
        .find(|(ok, _)| !ok)
        .map(|(_, name)| name)
    }

    pub fn checks(&self, spec: &LiftingSpec, prefix: &str) -> Vec<Check> {
        let k = self.grid_size;
        let mut out = vec![
            Check::below(format!("{prefix} clause 1"), self.clause1_value, spec.eps, k),
            Check::below(format!("{prefix} clause 2 measure"), self.clause2_exception_measure, spec.eps, k),
            Check::below(format!("{prefix} clause 3 low"), -self.clause3_low, spec.eps, k),
            Check::below(format!("{prefix} clause 3 high"), self.clause3_high, spec.beta + spec.eps, k),
            Check::below(format!("{prefix} clause 4"), self.clause4_sup, self.clause4_bound, k),
        ];
        out.push(Check::at_least(
            format!("{prefix} extends"),
            f64::from(u8::from(self.extension_ok)),
            1.0,
            0,
        ));
        out
    }
}

/// Measures whether `big` is an `ε`-lifting of `f` per `spec`.
pub fn certify_lifting(f: &TrigPoly, big: &TrigPoly, spec: &LiftingSpec, grid_floor: usize, max_grid: usize) -> Result<LiftingCertificate> {
    let grid = CellGrid::for_degree(big.degree().max(f.degree()), grid_floor, max_grid)?;
    let k = grid.k;
    let diff = big - f;
    let fv = f.grid_values(k)?;
    let bv = big.grid_values(k)?;
    let dv = diff.grid_values(k)?;
    let slack_f = grid.slack(f);
    let slack_big = grid.slack(big);
    let slack_diff = grid.slack(&diff);
    let near_e = grid.touching(&spec.set);
    let near_off = grid.touching(&spec.set.complement());
    let centre_e = spec.set.grid_mask(k);

    let (mut alpha_max, mut c1, mut low, mut high) = (0.0f64, 0.0f64, f64::INFINITY, 0.0f64);
    let mut exceptions = 0usize;
    let lift = spec.beta - spec.alpha;
    for i in 0..k {
        let (af, ab) = (fv[i].norm(), bv[i].norm());
        if near_off[i] {
            c1 = c1.max(dv[i].norm());
        }
        if near_e[i] {
            alpha_max = alpha_max.max(af);
            low = low.min(ab - af);
            high = high.max(ab);
        }
        if centre_e[i] {
            let ok_low = ab - slack_big > lift + af + slack_f - spec.eps;
            let ok_high = ab + slack_big < spec.beta + spec.eps;
            if !(ok_low && ok_high) {
                exceptions += 1;
            }
        }
    }
    if !near_e.iter().any(|&x| x) {
        low = 0.0;
    }
    let clause1_value = c1 + slack_diff;
    let clause3_low = low - slack_big - slack_f;
    let clause3_high = high + slack_big;
    let measure = exceptions as f64 / k as f64;
    let clause4_sup = diff.sup_norm_certified().hi;
    let clause4_bound = 2.0 * (spec.beta * spec.beta - spec.alpha * spec.alpha).sqrt();
    Ok(LiftingCertificate {
        grid_size: k,
        alpha_ok: alpha_max - slack_f <= spec.alpha,
        clause1_value,
        clause1_ok: clause1_value < spec.eps,
        clause2_exception_measure: measure,
        clause2_ok: measure < spec.eps,
        clause3_low,
        clause3_high,
        clause3_ok: clause3_low > -spec.eps && clause3_high < spec.beta + spec.eps,
        clause4_sup,
        clause4_bound,
        clause4_ok: clause4_sup < clause4_bound,
        extension_ok: extends(big, f),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_masks() {
        let g = CellGrid { k: 16 };
        let s = SimpleSet::new(vec![(0.25, 0.5)]).unwrap();
        let touch: Vec<usize> = (0..16).filter(|&i| g.touching(&s)[i]).collect();
        let inside: Vec<usize> = (0..16).filter(|&i| g.inside(&s)[i]).collect();
        assert_eq!(touch, vec![4, 5, 6, 7, 8]);
        assert_eq!(inside, vec![5, 6, 7]);
        let wrap = SimpleSet::arc(0.9, 0.2);
        assert!(g.inside(&wrap)[0] && g.touching(&wrap)[15]);
    }

    #[test]
    fn identity_is_not_a_lifting_but_passes_off_set_clauses() {
        let f = TrigPoly::from_real_coeffs([(0, 0.5), (1, 0.1)]);
        let spec = LiftingSpec::new(SimpleSet::new(vec![(0.1, 0.3)]).unwrap(), 0.7, 1.0, 0.05).unwrap();
        let cert = certify_lifting(&f, &f, &spec, 1 << 12, 1 << 20).unwrap();
        assert!(cert.alpha_ok && cert.clause1_ok && cert.clause3_ok && cert.clause4_ok && cert.extension_ok);
        // |F| = |f| misses the lift β − α = 0.3 on all of E.
        assert!(!cert.clause2_ok);
        assert!((cert.clause2_exception_measure - 0.2).abs() < 2e-3);
    }

    #[test]
    fn constant_shift_lifts_a_constant() {
        let f = TrigPoly::constant(0.5);
        let big = f.extend_with(&TrigPoly::zero()).unwrap();
        let spec = LiftingSpec::new(SimpleSet::full(), 0.5, 0.6, 0.2).unwrap();
        let cert = certify_lifting(&f, &big, &spec, 1 << 10, 1 << 20).unwrap();
        // (β − α) + |f| − ε = 0.4 < 0.5 < 0.8.
        assert!(cert.passes(), "{cert:?}");
    }
}
