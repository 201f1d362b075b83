//! Property tests for the invariants the constructions rely on.

use num_complex::Complex64;
use pauli_core::blocks::{flatten_best, pythagoras_lift};
use pauli_core::metrics::{fourier_winding_sum, winding};
use pauli_core::pipeline::{base4_digits, carve, Config, Preset};
use pauli_core::{extends, moduli_equal, SimpleSet, TrigPoly};
use proptest::collection::vec;
use proptest::prelude::*;
use std::f64::consts::TAU;

fn coeff() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex64::new(re, im))
}

fn poly(max_deg: i64, max_terms: usize) -> impl Strategy<Value = TrigPoly> {
    vec((-max_deg..=max_deg, coeff()), 1..=max_terms).prop_map(TrigPoly::from_coeffs)
}

/// `c·e(kt)` plus a perturbation of ℓ¹ norm below `|c|/2`; never vanishes.
fn dominated(k: i64) -> impl Strategy<Value = TrigPoly> {
    (0.0..TAU, vec((-6i64..=6, coeff()), 0..6)).prop_map(move |(phase, rest)| {
        let small = TrigPoly::from_coeffs(rest.into_iter().filter(|&(n, _)| n != k));
        let scale = if small.l1_norm() > 0.0 { 0.45 / small.l1_norm() } else { 0.0 };
        &TrigPoly::monomial(k, Complex64::from_polar(1.0, phase)) + &small.scale(scale)
    })
}

fn coeff_gap(p: &TrigPoly, q: &TrigPoly) -> f64 {
    p.coeffs().chain(q.coeffs()).map(|(n, _)| (p.coeff(n) - q.coeff(n)).norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn parseval_matches_grid_quadrature(p in poly(40, 12)) {
        let k = 128;
        let quad: f64 = p.grid_values(k).unwrap().iter().map(|z| z.norm_sqr()).sum::<f64>() / k as f64;
        let l2 = p.l2_norm().powi(2);
        prop_assert!((l2 - quad).abs() <= 1e-10 * l2.max(1e-300));
    }

    #[test]
    fn rotation_keeps_moduli(p in poly(50, 10), a in -3.0f64..3.0) {
        let q = p.rotate(a);
        for (n, c) in p.coeffs() {
            prop_assert!((q.coeff(n).norm() - c.norm()).abs() <= 1e-15 * c.norm().max(1.0));
        }
        prop_assert!((q.l2_norm() - p.l2_norm()).abs() <= 1e-14 * p.l2_norm());
        prop_assert!(moduli_equal(&p, &q, 1e-14).pass);
    }

    #[test]
    fn multiply_commutes_and_distributes(p in poly(30, 8), q in poly(30, 8), r in poly(30, 8)) {
        let scale = p.l1_norm() * (q.l1_norm() + r.l1_norm());
        prop_assert!(coeff_gap(&p.multiply(&q), &q.multiply(&p)) <= 1e-13 * scale);
        let lhs = p.multiply(&(&q + &r));
        let rhs = &p.multiply(&q) + &p.multiply(&r);
        prop_assert!(coeff_gap(&lhs, &rhs) <= 1e-13 * scale);
    }

    #[test]
    fn sup_bound_sandwiches_dense_maximum(p in poly(64, 16)) {
        let b = p.sup_norm_certified();
        // A grid eight times finer contains the certification grid.
        let dense = p.grid_values(8 * b.grid_size).unwrap().iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(b.lo <= dense * (1.0 + 1e-12));
        prop_assert!(dense <= b.hi * (1.0 + 1e-12));
    }

    #[test]
    fn extension_chains_are_transitive(p in poly(10, 6), t1 in vec((11i64..40, coeff()), 1..5), t2 in vec((41i64..90, coeff()), 1..5)) {
        let tail1 = TrigPoly::from_coeffs(t1.into_iter().flat_map(|(n, c)| [(n, c), (-n, c.conj())]));
        let tail2 = TrigPoly::from_coeffs(t2.into_iter().map(|(n, c)| (-n, c)));
        let q = p.extend_with(&tail1).unwrap();
        let r = q.extend_with(&tail2).unwrap();
        prop_assert!(extends(&p, &p));
        prop_assert!(extends(&q, &p) && extends(&r, &q) && extends(&r, &p));
    }

    #[test]
    fn winding_ignores_rotation(k in -5i64..=5, a in 0.0f64..1.0) {
        let p = TrigPoly::monomial(k, 1.0);
        prop_assert_eq!(winding(&p.rotate(a)).unwrap().value, k);
    }

    #[test]
    fn winding_of_dominated_curves(p in (-4i64..=4).prop_flat_map(dominated), a in 0.0f64..1.0) {
        let k = p.coeffs().max_by(|x, y| x.1.norm().total_cmp(&y.1.norm())).unwrap().0;
        prop_assert_eq!(winding(&p).unwrap().value, k);
        prop_assert_eq!(winding(&p.rotate(a)).unwrap().value, k);
    }

    #[test]
    fn winding_adds_under_products(p in (-3i64..=3).prop_flat_map(dominated), q in (-3i64..=3).prop_flat_map(dominated)) {
        let (wp, wq) = (winding(&p).unwrap().value, winding(&q).unwrap().value);
        prop_assert_eq!(winding(&p.multiply(&q)).unwrap().value, wp + wq);
    }

    #[test]
    fn fourier_sum_sees_only_moduli(p in poly(40, 10), a in -2.0f64..2.0, seed in any::<u64>()) {
        let base = fourier_winding_sum(&p, None);
        let phased = p.map_coeffs(|n, c| c * Complex64::from_polar(1.0, (seed.wrapping_mul(n as u64 | 1) % 1000) as f64));
        prop_assert!((fourier_winding_sum(&p.rotate(a), None) - base).abs() <= 1e-12 * base.abs().max(1.0));
        prop_assert!((fourier_winding_sum(&phased, None) - base).abs() <= 1e-12 * base.abs().max(1.0));
    }

    #[test]
    fn unit_exponentials_wind_by_their_sum(k in -20i64..=20) {
        let p = TrigPoly::monomial(k, 1.0);
        prop_assert_eq!(winding(&p).unwrap().value as f64, fourier_winding_sum(&p, None));
    }

    #[test]
    fn pythagoras_lift_is_orthogonal(tau in 0.01f64..3.0, r in 0.0f64..1.0, theta in 0.0..TAU, sigma in -1.0f64..1.0) {
        let eta = Complex64::from_polar(tau * r, theta);
        let z = pythagoras_lift(eta, tau, sigma).unwrap();
        let expect = eta.norm_sqr() + sigma * sigma * (tau * tau - eta.norm_sqr());
        prop_assert!((z.norm_sqr() - expect).abs() <= 1e-14 * tau * tau);
    }

    #[test]
    fn base4_digits_rebuild_the_number(x in 0.0f64..1.0, tol in 1e-9f64..1e-2) {
        let (digits, rest) = base4_digits(x, tol);
        let sum: f64 = digits.iter().map(|&(l, a)| a as f64 * 0.25f64.powi(l as i32)).sum();
        prop_assert!(digits.iter().all(|&(_, a)| (1..=3).contains(&a)));
        prop_assert!(digits.windows(2).all(|w| w[0].0 < w[1].0));
        prop_assert!(rest < tol && rest >= 0.0);
        prop_assert!((sum + rest - x).abs() < 1e-12);
    }

    #[test]
    fn carved_pieces_are_disjoint_with_requested_measures(
        cuts in vec(0.0f64..1.0, 4..10),
        fractions in vec(0.01f64..1.0, 1..5),
    ) {
        let mut pts = cuts;
        pts.sort_by(f64::total_cmp);
        let raw: Vec<(f64, f64)> = pts.chunks(2).filter(|c| c.len() == 2 && c[1] > c[0]).map(|c| (c[0], c[1])).collect();
        let set = SimpleSet::new(raw).unwrap();
        prop_assume!(set.measure() > 1e-3);
        let total: f64 = fractions.iter().sum();
        let measures: Vec<f64> = fractions.iter().map(|f| f / total * set.measure() * 0.999).collect();
        let parts = carve(&set, &measures).unwrap();
        for (i, p) in parts.iter().enumerate() {
            prop_assert!((p.measure() - measures[i]).abs() < 1e-12);
            prop_assert!((p.intersect(&set).measure() - p.measure()).abs() < 1e-12);
            for q in &parts[i + 1..] {
                prop_assert!(p.intersect(q).measure() < 1e-12);
            }
        }
    }

    #[test]
    fn config_text_round_trips(seed in any::<u64>(), relaxed in any::<bool>(), eps in 0.001f64..0.4) {
        let mut cfg = Config { seed, ..Config::default() };
        cfg.set("preset", if relaxed { "relaxed" } else { "paper-strict" }).unwrap();
        cfg.set("eps", &eps.to_string()).unwrap();
        let back = Config::parse(&cfg.to_text()).unwrap();
        prop_assert_eq!(back.preset, if relaxed { Preset::Relaxed } else { Preset::PaperStrict });
        prop_assert_eq!(back, cfg);
    }
}

#[test]
fn flattening_is_reproducible() {
    let coeffs: Vec<(i64, Complex64)> = (1..=64).map(|n| (n, Complex64::from_polar(1.0, n as f64))).collect();
    for seed in 0..8 {
        let a = flatten_best(&coeffs, seed, 3.0, 16).unwrap();
        let b = flatten_best(&coeffs, seed, 3.0, 16).unwrap();
        assert_eq!(a.signs, b.signs);
        assert_eq!(a.sup.hi.to_bits(), b.sup.hi.to_bits());
    }
}
