mod common;

use agler_core::agler::{
    closed_form_product, extremal_pair, restriction_gram_defect, sample_points, solve_constraints, torus_points,
    AglerPair, Flavor,
};
use agler_core::corpus::corpus;
use agler_core::innerfn::{product_to_rational, RationalInner};
use agler_core::linalg::max_abs;
use agler_core::poly2::Var;
use proptest::prelude::*;

fn identity_residual(theta: &RationalInner<f64>, pair: &AglerPair) -> f64 {
    sample_points(99, 200, 0.95)
        .chunks(2)
        .map(|w| pair.identity_residual(theta, w[0], w[1]))
        .fold(0.0, f64::max)
}

fn gram_gap(a: &AglerPair, b: &AglerPair) -> f64 {
    let gap = |x: &agler_core::agler::GramKernel, y: &agler_core::agler::GramKernel| {
        if x.gram.is_empty() && y.gram.is_empty() {
            0.0
        } else {
            max_abs(&(&x.gram - &y.gram))
        }
    };
    gap(&a.k1, &b.k1).max(gap(&a.k2, &b.k2))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn solver_pairs_for_random_products(f in common::product(2, 2)) {
        let theta = product_to_rational(&f);
        let (m, n) = theta.degree();
        let sys = solve_constraints(&theta).unwrap();
        let (cmax, cmin) = closed_form_product(&f);
        for (flavor, closed) in [(Flavor::Max1Min2, cmax), (Flavor::Min1Max2, cmin)] {
            let pair = extremal_pair(&sys, flavor).unwrap();
            prop_assert!(identity_residual(&theta, &pair) <= 1e-8);
            prop_assert!(identity_residual(&theta, &closed) <= 1e-8);
            prop_assert_eq!((pair.k1.rank(1e-8), pair.k2.rank(1e-8)), (n, m), "deg ({}, {}) {:?}", m, n, flavor);
            prop_assert!(gram_gap(&pair, &closed) <= 1e-7, "{:e}", gram_gap(&pair, &closed));
        }
    }

    #[test]
    fn restriction_isometry_for_random_products(f in common::product(2, 2), seed in 0u64..1000) {
        let (max, min) = closed_form_product(&f);
        let ts = torus_points(seed, 5);
        prop_assert!(restriction_gram_defect(&max.k2, Var::Z2, &ts, 128).unwrap() <= 1e-7);
        prop_assert!(restriction_gram_defect(&min.k2, Var::Z2, &ts, 128).unwrap() <= 1e-7);
    }
}

#[test]
fn corpus_pairs_satisfy_identity_and_rank_law() {
    for e in corpus() {
        let theta = e.function.to_rational();
        let (m, n) = theta.degree();
        let sys = solve_constraints(&theta).unwrap();
        for flavor in [Flavor::Max1Min2, Flavor::Min1Max2] {
            let pair = extremal_pair(&sys, flavor).unwrap();
            assert!(identity_residual(&theta, &pair) <= 1e-8, "{}", e.name);
            assert_eq!((pair.k1.rank(1e-8), pair.k2.rank(1e-8)), (n, m), "{}", e.name);
            assert!(pair.k1.is_psd(1e-9) && pair.k2.is_psd(1e-9));
        }
    }
}

#[test]
fn non_product_restriction_isometry() {
    let f = agler_core::corpus::by_name("four_minus_z1_minus_z2").unwrap().function;
    let sys = solve_constraints(&f.to_rational()).unwrap();
    let ts = torus_points(3, 5);
    for flavor in [Flavor::Max1Min2, Flavor::Min1Max2] {
        let pair = extremal_pair(&sys, flavor).unwrap();
        assert!(restriction_gram_defect(&pair.k2, Var::Z2, &ts, 128).unwrap() <= 1e-7);
    }
}

#[test]
fn pair_json_round_trip() {
    let f = agler_core::corpus::by_name("blaschke_2_2").unwrap().function;
    let (max, _) = closed_form_product(f.as_product().unwrap());
    let text = serde_json::to_string(&max.to_json()).unwrap();
    let back: agler_core::agler::AglerPairJson = serde_json::from_str(&text).unwrap();
    assert_eq!(back, max.to_json());
}
