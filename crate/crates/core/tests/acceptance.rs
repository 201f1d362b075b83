//! Acceptance gate: one test per criterion, each printing a single
//! `ACn PASS|FAIL` line. Oracles here are independent of the library code
//! they check (direct evaluation, own series, own winding count).

use num_complex::Complex64;
use pauli_core::blocks::{flatten_best, pythagoras_lift, PhiPsi};
use pauli_core::corrections::{correct_interval, lift_mu, lift_pair_interval};
use pauli_core::demos::{dip_interval, dip_poly, lifting_poly, partner, random_real_poly};
use pauli_core::metrics::{check_sqrt_plus_variation, fourier_winding_sum, winding};
use pauli_core::pipeline::{calibrate_init_eps, init_partners_with, run, Config, InitOptions, Preset, CERT_SLACK};
use pauli_core::{extends, TrigPoly};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;
use std::fs;
use std::path::Path;
use std::time::Instant;

fn verdict(id: u32, ok: bool, detail: String) {
    println!("AC{id} {} {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "AC{id} failed: {detail}");
}

/// `Σ c_n e^{2πint}` by direct summation.
fn eval(p: &TrigPoly, t: f64) -> Complex64 {
    p.coeffs().map(|(n, c)| c * Complex64::from_polar(1.0, TAU * n as f64 * t)).sum()
}

/// Winding by counting argument increments on `k` direct evaluations.
fn winding_oracle(p: &TrigPoly, k: usize) -> i64 {
    let vals: Vec<Complex64> = (0..k).map(|i| eval(p, i as f64 / k as f64)).collect();
    let total: f64 = (0..k).map(|i| (vals[(i + 1) % k] / vals[i]).arg()).sum();
    (total / TAU).round() as i64
}

fn moduli_gap(p: &TrigPoly, q: &TrigPoly) -> f64 {
    let freqs: std::collections::BTreeSet<i64> = p.coeffs().chain(q.coeffs()).map(|(n, _)| n).collect();
    freqs.into_iter().map(|n| (p.coeff(n).norm() - q.coeff(n).norm()).abs()).fold(0.0, f64::max)
}

#[test]
fn ac1_pythagoras_identity() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..100_000 {
        let tau: f64 = rng.gen_range(0.01..2.0);
        let eta = Complex64::from_polar(tau * rng.gen_range(1e-6..1.0), rng.gen_range(0.0..TAU));
        let sigma = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let z = pythagoras_lift(eta, tau, sigma).unwrap();
        worst = worst.max((z.norm() - tau).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(1, worst <= 1e-12 && secs < 1.0, format!("max ||lift| − τ| = {worst:e}, {secs:.3}s"));
}

#[test]
fn ac2_variation_bound() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for _ in 0..100 {
        let h = random_real_poly(&mut rng);
        let lib = check_sqrt_plus_variation(&h).unwrap();
        // Oracle: direct evaluation on 2^14 points, C² norm from h and h″ on the same grid.
        let k = 1 << 14;
        let h2 = h.second_derivative();
        let mut var = 0.0;
        let mut c2: f64 = 0.0;
        let root = |t: f64| eval(&h, t).re.max(0.0).sqrt();
        let mut prev = root(0.0);
        for i in 1..=k {
            let t = i as f64 / k as f64;
            let r = root(t);
            var += (r - prev).abs();
            prev = r;
            c2 = c2.max(eval(&h, t).norm()).max(eval(&h2, t).norm());
        }
        let bound = 1.01 * c2.sqrt();
        worst = worst.max(var / bound).max(lib.value / lib.bound);
        ok &= lib.pass && var <= bound;
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(2, ok && secs < 30.0, format!("worst V/bound = {worst:.4}, {secs:.1}s"));
}

#[test]
fn ac3_phi_bessel_and_inverse() {
    let pp = PhiPsi::default();
    // J₀(δ) = Σ (−1)^k (δ/2)^{2k} / (k!)²
    let j0 = |d: f64| {
        let x = d * d / 4.0;
        let (mut term, mut sum) = (1.0f64, 1.0f64);
        for k in 1..60 {
            term *= -x / (k as f64 * k as f64);
            sum += term;
        }
        sum
    };
    let bessel = (0..=1000)
        .map(|i| {
            let d = 2.0 * i as f64 / 1000.0;
            (1.0 - pp.phi(d * d) - j0(d)).abs()
        })
        .fold(0.0, f64::max);
    let inverse = (0..=1000)
        .map(|i| {
            let x = i as f64 / 1000.0;
            (pp.psi(pp.phi(x)).unwrap() - x).abs()
        })
        .fold(0.0, f64::max);
    verdict(3, bessel <= 1e-12 && inverse <= 1e-10, format!("Bessel gap {bessel:e}, ψ∘φ gap {inverse:e}"));
}

#[test]
fn ac4_walsh_identity() {
    let w = |x: f64, y: f64, z: f64| x + y + z - x * y * z;
    let mut exact = true;
    for bits in 0..8 {
        let s = |b: i32| if bits >> b & 1 == 1 { 1.0 } else { -1.0 };
        exact &= w(s(0), s(1), s(2)).abs() == 2.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..1_000_000 {
        let (x, y, z) = (rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
        worst = worst.max(w(x, y, z));
    }
    verdict(4, exact && worst <= 2.0 + 1e-15, format!("sign patterns exact: {exact}, random max {worst}"));
}

#[test]
fn ac5_single_interval_correction() {
    let start = Instant::now();
    let f = dip_poly();
    assert_eq!(f.degree(), 4);
    let (a, b) = dip_interval().unwrap();
    let out = correct_interval(&f, a, b, 0.1).unwrap();
    let lib_ok = out.checks.iter().all(|c| c.pass);
    // Oracle on a 2^16 grid by direct evaluation.
    let tau = eval(&f, a).norm();
    let k = 1 << 16;
    let (mut inside, mut outside) = (0.0f64, 0.0f64);
    for i in 0..k {
        let t = i as f64 / k as f64;
        let big = eval(&out.poly, t);
        if t >= a && t <= b {
            inside = inside.max((big.norm() - tau).abs());
        } else {
            outside = outside.max((big - eval(&f, t)).norm());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = lib_ok && inside < 0.1 && outside < 0.1 && extends(&out.poly, &f) && secs < 120.0;
    verdict(
        5,
        ok,
        format!("||F| − τ| on [a,b] = {inside:.4}, |F − f| off = {outside:.4}, M = {}, deg F = {}, {secs:.1}s", out.m, out.poly.degree()),
    );
}

#[test]
fn ac6_interval_lifting() {
    let f = lifting_poly();
    let g = partner(&f, 0.37, 0.5);
    let out = lift_pair_interval(&f, &g, (0.1, 0.35), (0.0, 1.0), 0.8, 0.8, 0.2, 1).unwrap();
    let mu = (0.8f64 * 0.8 + 0.25 * (1.0 - 0.8 * 0.8)).sqrt();
    let mu_gap = (out.mu - mu).abs().max((lift_mu(0.8, 0.8, 1) - mu).abs());
    let residual = moduli_gap(&out.f, &out.g);
    let ok = out.cert_f.passes() && out.cert_g.passes() && mu_gap <= 1e-14 && residual <= 1e-12;
    verdict(
        6,
        ok,
        format!(
            "F clauses {:?}, G clauses {:?}, exception measures {:.3}/{:.3}, |μ − formula| = {mu_gap:e}, residual = {residual:e}",
            out.cert_f.first_failure(),
            out.cert_g.first_failure(),
            out.cert_f.clause2_exception_measure,
            out.cert_g.clause2_exception_measure
        ),
    );
}

#[test]
fn ac7_sign_flattening() {
    let coeffs: Vec<(i64, Complex64)> = (1..=256).map(|n| (n, Complex64::new(1.0, 0.0))).collect();
    let a = flatten_best(&coeffs, 7, 3.0, 64).unwrap();
    let b = flatten_best(&coeffs, 7, 3.0, 64).unwrap();
    let bound = 3.0 * 16.0 * 256f64.ln().sqrt();
    let all_plus = 256.0;
    let same = a.signs == b.signs && a.sup.hi.to_bits() == b.sup.hi.to_bits();
    let ok = a.sup.hi <= bound && a.sup.hi < 0.5 * all_plus && same;
    verdict(7, ok, format!("certified sup {:.3} (bound {bound:.3}, half all-plus {}), reproducible: {same}", a.sup.hi, 0.5 * all_plus));
}

#[test]
fn ac8_initial_pair() {
    let start = Instant::now();
    let opts = InitOptions::default();
    let eps = calibrate_init_eps(0.005, 0.45, 8, 11, &opts).unwrap();
    let (pair, rep) = init_partners_with(eps, 11, &opts).unwrap();
    let wf = winding(&pair.f).unwrap().value;
    let wg = winding(&pair.g).unwrap().value;
    let k = (16 * pair.f.degree() as usize).max(4096);
    let (of, og) = (winding_oracle(&pair.f, k), winding_oracle(&pair.g, k));
    let residual = moduli_gap(&pair.f, &pair.g);
    let sums = (fourier_winding_sum(&pair.f, None) - fourier_winding_sum(&pair.g, None)).abs();
    let secs = start.elapsed().as_secs_f64();
    let ok = wf == 1 && of == 1 && wg == 0 && og == 0 && residual <= 1e-12 && sums <= 1e-10 && secs < 60.0;
    verdict(
        8,
        ok,
        format!(
            "ε = {eps:.4}, deg f₁ = {}, windings ({wf}, {wg}) oracle ({of}, {og}), residual {residual:e}, Σn|c|² gap {sums:e}, K(l2) = {:.3}, {secs:.1}s",
            rep.degree, rep.k_l2
        ),
    );
}

fn relaxed(dir: &Path) -> Config {
    let mut cfg = Config::with_preset(Preset::Relaxed);
    cfg.constants.eps = 0.05;
    cfg.constants.stage_budget = 2;
    cfg.seed = 2024;
    cfg.output_dir = Some(dir.to_path_buf());
    cfg
}

#[test]
fn ac9_two_stage_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = relaxed(dir.path());
    let start = Instant::now();
    match run(&cfg) {
        Ok(out) => {
            let mut ok = out.stages.len() == 3;
            for r in &out.stages {
                ok &= r.winding_f == 1 && r.winding_g == 0 && r.moduli_residual <= 1e-11;
                if r.stage > 1 {
                    let bound = 6.0 * cfg.constants.eps * 0.5f64.powi(r.stage as i32) * CERT_SLACK;
                    ok &= r.dist_f < bound && r.dist_g < bound;
                }
                ok &= winding_oracle(&TrigPoly::from_text(&fs::read_to_string(dir.path().join(format!("stage_{}/f.poly", r.stage))).unwrap()).unwrap(), 1 << 16) == 1;
            }
            let trace: Vec<(f64, f64)> = out.stages.iter().map(|r| (r.dist_f, r.dist_g)).collect();
            verdict(9, ok, format!("dist trace {trace:?}, {:.1}s", start.elapsed().as_secs_f64()));
        }
        Err(abort) => {
            let trace: Vec<(u32, f64, f64, i64, i64)> =
                abort.completed.iter().map(|r| (r.stage, r.dist_f, r.dist_g, r.winding_f, r.winding_g)).collect();
            verdict(9, false, format!("{abort}; completed {trace:?}; {:.1}s", start.elapsed().as_secs_f64()));
        }
    }
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().display().to_string(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn ac10_determinism() {
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let r1 = run(&relaxed(d1.path()));
    let r2 = run(&relaxed(d2.path()));
    let outcome = |r: &Result<_, pauli_core::pipeline::RunAbort>| match r {
        Ok(_) => "completed".to_string(),
        Err(a) => format!("aborted at stage {}: {}", a.stage, a.error),
    };
    let (s1, s2) = (snapshot(d1.path()), snapshot(d2.path()));
    let ok = !s1.is_empty() && s1 == s2 && outcome(&r1) == outcome(&r2);
    verdict(10, ok, format!("{} files identical across runs; both runs {}", s1.len(), outcome(&r1)));
}
