mod common;

use common::*;
use proptest::prelude::*;
use tcmc::birkhoff::{
    detect_cell, factor_left, normalize_plus, omega2_plus_factor, plus_norm, switch_formula, Stratum,
};
use tcmc::loopalg::LoopMatrix;

#[test]
fn construct_then_factor_recovers_both_factors() {
    let mut r = rng(7);
    for _ in 0..100 {
        let gm = random_minus(&mut r, 0.5);
        let gp = random_plus(&mut r, 0.5);
        let f = factor_left(&gm.multiply(&gp)).expect("product lies on the big cell");
        assert!(f.minus.max_diff(&gm) < 1e-9, "minus off by {}", f.minus.max_diff(&gm));
        assert!(f.plus.max_diff(&gp) < 1e-9, "plus off by {}", f.plus.max_diff(&gp));
        assert!(f.residual < 1e-9);
    }
}

#[test]
fn switch_lemma_agrees_with_factorization() {
    let mut r = rng(11);
    let mut checked = [0, 0];
    while checked.iter().any(|&c| c < 100) {
        let h = random_minus_unnormalized(&mut r, 0.5);
        for (slot, k) in [(0, 1), (1, -1)] {
            let pivot = if k == 1 { entry(&h, 1, 0, -1) } else { entry(&h, 0, 1, -1) };
            if pivot.abs() < 0.05 {
                continue;
            }
            let closed = switch_formula(k, &h).unwrap();
            let numeric = factor_left(&LoopMatrix::omega(N, k).multiply(&h)).unwrap();
            assert!(closed.minus.max_diff(&numeric.minus) < 1e-9);
            assert!(closed.plus.max_diff(&numeric.plus) < 1e-9);
            checked[slot] += 1;
        }
    }
}

#[test]
fn omega_two_lemma_plus_factor() {
    let mut r = rng(13);
    let mut checked = 0;
    while checked < 50 {
        let h = random_minus_unnormalized(&mut r, 0.5);
        let Some(expected) = omega2_plus_factor(&h) else { continue };
        if expected.norm_inf() > 50.0 {
            continue;
        }
        let f = factor_left(&LoopMatrix::omega(N, 2).multiply(&h)).unwrap();
        let got = normalize_plus(&f.plus);
        assert!(got.max_diff(&expected) < 1e-9, "G₊ off by {}", got.max_diff(&expected));
        checked += 1;
    }
}

#[test]
fn strata_of_constructed_points() {
    let mut r = rng(17);
    for k in [1, -1, 2, -2] {
        for _ in 0..20 {
            let gm = random_minus(&mut r, 0.2);
            let gp = random_plus(&mut r, 0.2);
            let phi = gm.multiply(&LoopMatrix::omega(N, k)).multiply(&gp);
            assert_eq!(detect_cell(&phi).stratum, Stratum::from_index(k), "k = {k}");
        }
    }
}

#[test]
fn plus_factor_blows_up_towards_minus_one_cell() {
    let mut last = 0.0;
    for t in [1e-1, 1e-2, 1e-3] {
        let phi = LoopMatrix::omega(N, -1).multiply(&unipotent(true, t, -1));
        let f = factor_left(&phi).unwrap();
        let norm = plus_norm(&f);
        assert!(norm > last * 5.0, "plus norm {norm} at t = {t}");
        last = norm;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn factors_are_normalized_and_reconstruct(seed in any::<u64>()) {
        let mut r = rng(seed);
        let phi = random_minus(&mut r, 0.5).multiply(&random_plus(&mut r, 0.5));
        let f = factor_left(&phi).unwrap();
        prop_assert_eq!(f.minus.coeff(0), tcmc::loopalg::identity2());
        prop_assert!(f.minus.max_degree().unwrap_or(0) <= 0);
        prop_assert!(f.plus.min_degree().unwrap_or(0) >= 0);
        prop_assert!(f.minus.multiply(&f.plus).max_diff(&phi) <= 1e-9);
        prop_assert!(f.minus.check_structure(true).parity_violation == 0.0);
    }
}
