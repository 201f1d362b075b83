//! Canonical desk-scale instances, one per construction step, shared by the
//! command-line `demo` command and the acceptance tests.

use crate::blocks::pythagoras_lift;
use crate::corrections::{
    compatible_correct, compatible_correct_set, correct_interval, correct_simple_set, lift_mu, lift_pair_interval,
    lift_pair_set_with, sublevel_set, CorrectionOptions,
};
use crate::error::{Error, Result};
use crate::metrics::check_sqrt_plus_variation;
use crate::pipeline::{half_gap_stage, kill_gap, Constants};
use crate::report::Check;
use crate::simple_set::SimpleSet;
use crate::trigpoly::{extends, TrigPoly};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

pub const DEMO_IDS: std::ops::RangeInclusive<u32> = 1..=10;

#[derive(Clone, Debug)]
pub struct DemoOutcome {
    pub id: u32,
    pub title: &'static str,
    pub checks: Vec<Check>,
    /// Polynomials worth keeping, by file stem.
    pub polys: Vec<(String, TrigPoly)>,
    pub detail: Value,
}

impl DemoOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> Value {
        json!({ "demo": self.id, "title": self.title, "pass": self.passed(), "checks": self.checks, "detail": self.detail })
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn flag(name: &str, ok: bool) -> Check {
    Check::at_most(name, f64::from(u8::from(!ok)), 0.0, 0)
}

/// Random real polynomial of degree 1..=16 with coefficients in the unit square.
pub fn random_real_poly(rng: &mut ChaCha8Rng) -> TrigPoly {
    let d: i64 = rng.gen_range(1..=16);
    let mut coeffs = vec![(0, c(rng.gen_range(-1.0..1.0), 0.0))];
    for n in 1..=d {
        let z = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        coeffs.push((n, z));
        coeffs.push((-n, z.conj()));
    }
    TrigPoly::from_coeffs(coeffs)
}

/// Degree-4 input with a single dip below 0.92 of length ≈ 0.079.
pub fn dip_poly() -> TrigPoly {
    TrigPoly::from_coeffs([
        (0, c(0.95, 0.0)),
        (1, c(0.02, 0.0)),
        (-1, c(0.02, 0.0)),
        (2, c(0.006, 0.0)),
        (-2, c(0.006, 0.0)),
        (4, c(0.0, 0.003)),
    ])
}

pub fn dip_interval() -> Result<(f64, f64)> {
    let set = sublevel_set(&dip_poly(), 0.92)?;
    let arc = set.arcs().first().copied().ok_or_else(|| Error::Precondition("dip instance has no dip".into()))?;
    Ok((arc.start, arc.end()))
}

/// `0.95 + 0.05·cos(4πt)`.
pub fn two_dip_poly() -> TrigPoly {
    TrigPoly::from_real_coeffs([(0, 0.95), (2, 0.025), (-2, 0.025)])
}

/// `0.97 − 0.15·cos⁸(2πt)` with its sublevel set of measure 1/8.
pub fn eighth_dips() -> Result<(TrigPoly, SimpleSet)> {
    let binom = [1.0, 8.0, 28.0, 56.0, 70.0, 56.0, 28.0, 8.0, 1.0];
    let mut coeffs: Vec<(i64, f64)> = vec![(0, 0.97)];
    for (k, b) in binom.iter().enumerate() {
        coeffs.push((8 - 2 * k as i64, -0.15 * b / 256.0));
    }
    let f = TrigPoly::from_real_coeffs(coeffs);
    let (mut lo, mut hi) = (0.82, 0.97);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if sublevel_set(&f, mid)?.measure() < 0.125 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let set = sublevel_set(&f, hi)?;
    Ok((f, set))
}

/// Degree-4 input for the liftings, `|f| < 0.8` everywhere.
pub fn lifting_poly() -> TrigPoly {
    TrigPoly::from_coeffs([(0, c(0.75, 0.0)), (1, c(0.012, 0.0)), (-2, c(0.0, -0.006)), (4, c(0.003, 0.0))])
}

/// A partner with equal coefficient moduli: rotation and a constant phase.
pub fn partner(f: &TrigPoly, shift: f64, phase: f64) -> TrigPoly {
    f.rotate(shift).scale(Complex64::from_polar(1.0, phase))
}

/// `0.9 + 0.1·cos(2πt)`: distance 0.2 from the unit circle.
pub fn gap_poly() -> TrigPoly {
    TrigPoly::from_real_coeffs([(0, 0.9), (1, 0.05), (-1, 0.05)])
}

pub fn run_demo(id: u32, seed: u64) -> Result<DemoOutcome> {
    match id {
        1 => variation_demo(seed),
        2 => interval_demo(),
        3 => simple_set_demo(),
        4 => pythagoras_demo(seed),
        5 => compatible_demo(),
        6 => compatible_set_demo(),
        7 => lifting_demo(),
        8 => lifting_set_demo(),
        9 => half_gap_demo(seed),
        10 => kill_gap_demo(seed),
        _ => Err(Error::Config(format!("demo id {id} outside 1..=10"))),
    }
}

fn variation_demo(seed: u64) -> Result<DemoOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for _ in 0..100 {
        let h = random_real_poly(&mut rng);
        let chk = check_sqrt_plus_variation(&h)?;
        worst = worst.max(chk.value / chk.bound);
        failures += usize::from(!chk.pass);
    }
    Ok(DemoOutcome {
        id: 1,
        title: "variation of √h₊ against √‖h‖_C²",
        checks: vec![Check::at_most("failing polynomials", failures as f64, 0.0, 0)],
        polys: Vec::new(),
        detail: json!({ "count": 100, "worst_ratio_to_bound": worst }),
    })
}

fn interval_demo() -> Result<DemoOutcome> {
    let f = dip_poly();
    let (a, b) = dip_interval()?;
    let out = correct_interval(&f, a, b, 0.1)?;
    let mut checks = out.checks.clone();
    checks.push(flag("F extends f", extends(&out.poly, &f)));
    Ok(DemoOutcome {
        id: 2,
        title: "single-interval correction",
        checks,
        polys: vec![("f".into(), f), ("F".into(), out.poly.clone())],
        detail: json!({ "a": a, "b": b, "eps": 0.1, "m": out.m, "trace": out.trace, "degree": out.poly.degree() }),
    })
}

fn simple_set_demo() -> Result<DemoOutcome> {
    let f = two_dip_poly();
    let set = sublevel_set(&f, 0.93)?;
    let out = correct_simple_set(&f, &set, 0.1)?;
    let mut checks = out.checks.clone();
    checks.push(flag("F extends f", extends(&out.poly, &f)));
    Ok(DemoOutcome {
        id: 3,
        title: "simple-set correction",
        checks,
        polys: vec![("f".into(), f), ("F".into(), out.poly.clone())],
        detail: json!({ "set": set.intervals(), "eps": 0.1, "degree": out.poly.degree() }),
    })
}

fn pythagoras_demo(seed: u64) -> Result<DemoOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..100_000 {
        let tau: f64 = rng.gen_range(0.01..2.0);
        let r = tau * rng.gen_range(1e-6..1.0);
        let eta = Complex64::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU));
        let sigma = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let z = pythagoras_lift(eta, tau, sigma)?;
        worst = worst.max((z.norm() - tau).abs());
    }
    Ok(DemoOutcome {
        id: 4,
        title: "orthogonal lift onto a circle",
        checks: vec![Check::at_most("max ||lift| − τ|", worst, 1e-12, 0)],
        polys: Vec::new(),
        detail: json!({ "count": 100_000 }),
    })
}

fn compatible_demo() -> Result<DemoOutcome> {
    let f = dip_poly();
    let g = partner(&f, 0.3, 1.0);
    let (a, b) = dip_interval()?;
    let out = compatible_correct(&f, &g, (a, b), (0.0, 1.0), 0.1)?;
    let mut checks = out.checks.clone();
    checks.push(Check::at_most("moduli residual", out.moduli_residual, 1e-12, 0));
    checks.push(flag("F extends f", extends(&out.f, &f)));
    checks.push(flag("G extends g", extends(&out.g, &g)));
    Ok(DemoOutcome {
        id: 5,
        title: "compatible correction on an interval",
        checks,
        polys: vec![("f".into(), f), ("g".into(), g), ("F".into(), out.f.clone()), ("G".into(), out.g.clone())],
        detail: serde_json::to_value(&out).unwrap_or(Value::Null),
    })
}

fn compatible_set_demo() -> Result<DemoOutcome> {
    let (f, set) = eighth_dips()?;
    let g = partner(&f, 0.21, -0.7);
    let out = compatible_correct_set(&f, &g, &set, 0.1)?;
    let mut checks = out.checks.clone();
    checks.push(Check::at_most("K_set", out.k_g, CorrectionOptions::default().ceiling, 0));
    checks.push(Check::at_most("moduli residual", out.moduli_residual, 1e-12, 0));
    checks.push(flag("F extends f", extends(&out.f, &f)));
    checks.push(flag("G extends g", extends(&out.g, &g)));
    Ok(DemoOutcome {
        id: 6,
        title: "compatible correction on a simple set",
        checks,
        polys: vec![("f".into(), f), ("g".into(), g), ("F".into(), out.f.clone()), ("G".into(), out.g.clone())],
        detail: json!({ "set": set.intervals(), "eps": 0.1, "result": serde_json::to_value(&out).unwrap_or(Value::Null) }),
    })
}

fn lifting_demo() -> Result<DemoOutcome> {
    let f = lifting_poly();
    let g = partner(&f, 0.37, 0.5);
    let out = lift_pair_interval(&f, &g, (0.1, 0.35), (0.0, 1.0), 0.8, 0.8, 0.2, 1)?;
    let mut checks = out.cert_f.checks(&out.spec_f, "F");
    checks.extend(out.cert_g.checks(&out.spec_g, "G"));
    checks.push(Check::at_most("|μ − formula|", (out.mu - lift_mu(0.8, 0.8, 1)).abs(), 1e-14, 0));
    checks.push(Check::at_most("moduli residual", out.moduli_residual, 1e-12, 0));
    Ok(DemoOutcome {
        id: 7,
        title: "compatible liftings on an interval",
        checks,
        polys: vec![("f".into(), f), ("g".into(), g), ("F".into(), out.f.clone()), ("G".into(), out.g.clone())],
        detail: serde_json::to_value(&out).unwrap_or(Value::Null),
    })
}

fn lifting_set_demo() -> Result<DemoOutcome> {
    let f = lifting_poly();
    let g = partner(&f, 0.37, 0.5);
    let set = SimpleSet::new(vec![(0.1, 0.2), (0.6, 0.75)])?;
    let opts = CorrectionOptions { psi_order: 4, ..CorrectionOptions::default() };
    let out = lift_pair_set_with(&f, &g, &set, 0.8, 0.8, 0.2, 1, &opts)?;
    let mut checks = out.cert_f.checks(&out.spec_f, "F");
    checks.extend(out.cert_g.checks(&out.spec_g, "G"));
    checks.push(Check::at_most("|μ − formula|", (out.mu - lift_mu(0.8, 0.8, 1)).abs(), 1e-14, 0));
    checks.push(Check::at_most("moduli residual", out.moduli_residual, 1e-12, 0));
    Ok(DemoOutcome {
        id: 8,
        title: "compatible liftings on a simple set",
        checks,
        polys: vec![("f".into(), f), ("g".into(), g), ("F".into(), out.f.clone()), ("G".into(), out.g.clone())],
        detail: serde_json::to_value(&out).unwrap_or(Value::Null),
    })
}

fn half_gap_demo(seed: u64) -> Result<DemoOutcome> {
    let f = gap_poly();
    let g = partner(&f, 0.3, 0.4);
    let eps = 0.4;
    let out = half_gap_stage(&f, &g, eps, &Constants::relaxed(), seed)?;
    Ok(DemoOutcome {
        id: 9,
        title: "halving the gap to the circle",
        checks: out.report.checks.clone(),
        polys: vec![("f".into(), f), ("g".into(), g), ("F".into(), out.f.clone()), ("G".into(), out.g.clone())],
        detail: json!({ "eps": eps, "report": out.report }),
    })
}

fn kill_gap_demo(seed: u64) -> Result<DemoOutcome> {
    let f = gap_poly();
    let g = partner(&f, 0.3, 0.4);
    let out = kill_gap(&f, &g, 0.05, &Constants::relaxed(), seed)?;
    Ok(DemoOutcome {
        id: 10,
        title: "closing the gap to the circle",
        checks: out.report.checks.clone(),
        polys: vec![("f".into(), f), ("g".into(), g), ("F".into(), out.f.clone()), ("G".into(), out.g.clone())],
        detail: json!({ "eps": 0.05, "report": out.report }),
    })
}
