mod common;

use agler_core::hardy::sample_rational;
use agler_core::innerfn::{backshift_theta, make_rational_inner, product_to_rational};
use agler_core::linalg::c;
use agler_core::poly2::{BiPoly, StabilityVerdict, Var};
use agler_core::scalar::cis;
use agler_core::C64;
use proptest::prelude::*;

type P = BiPoly<f64>;

fn coeffs(max: usize) -> impl Strategy<Value = P> {
    (0..=max, 0..=max).prop_flat_map(|(m, n)| {
        proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), (m + 1) * (n + 1)).prop_map(move |v| {
            P::from_fn((m, n), |i, j| {
                let (re, im) = v[i * (n + 1) + j];
                c(re, im)
            })
        })
    })
}

fn univariate(max: usize) -> impl Strategy<Value = Vec<C64>> {
    proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 1..=max + 1)
        .prop_map(|v| v.into_iter().map(|(a, b)| c(a, b)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reflection_is_an_involution(p in coeffs(3)) {
        prop_assert_eq!(p.reflect().reflect(), p);
    }

    #[test]
    fn reflection_preserves_torus_modulus(p in coeffs(3), t1 in 0.0f64..6.3, t2 in 0.0f64..6.3) {
        let (z1, z2) = (cis(t1), cis(t2));
        let a = p.evaluate(z1, z2).norm();
        let b = p.reflect().evaluate(z1, z2).norm();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a));
    }

    #[test]
    fn rank_one_factorization_round_trips(a in univariate(3), b in univariate(3)) {
        let p = P::univariate(Var::Z1, &a).mul(&P::univariate(Var::Z2, &b));
        prop_assume!(p.max_abs_coeff() > 1e-3);
        let (p1, p2) = p.factor_rank1(1e-10).expect("rank one");
        let err = p.sub(&p1.mul(&p2)).max_abs_coeff();
        prop_assert!(err <= 1e-10 * p.max_abs_coeff());
    }

    #[test]
    fn product_denominators_are_stable(f in common::product(2, 2)) {
        let theta = product_to_rational(&f);
        prop_assert_eq!(theta.degree(), (f.phi.degree(), f.psi.degree()));
        prop_assert_eq!(theta.p().is_stable_bidisk(1e-9).unwrap(), StabilityVerdict::StrictlyStable);
    }

    #[test]
    fn backshift_reconstructs_theta(f in common::product(2, 2)) {
        let theta = product_to_rational(&f);
        let n = 32;
        for var in [Var::Z1, Var::Z2] {
            let b = backshift_theta(&theta, var).unwrap();
            let g = sample_rational(&b, n).unwrap();
            for j in 0..n {
                for k in 0..n {
                    let z1 = agler_core::scalar::root_of_unity::<f64>(j, n);
                    let z2 = agler_core::scalar::root_of_unity::<f64>(k, n);
                    let (zv, at_zero) = match var {
                        Var::Z1 => (z1, theta.evaluate(c(0.0, 0.0), z2)),
                        Var::Z2 => (z2, theta.evaluate(z1, c(0.0, 0.0))),
                    };
                    let lhs = theta.evaluate(z1, z2);
                    let rhs = at_zero + zv * g.sample_at(j, k);
                    prop_assert!((lhs - rhs).norm() <= 1e-10);
                }
            }
        }
    }
}

#[test]
fn strictly_stable_means_no_torus_zeros() {
    let cases = [
        P::from_real_rows(&[&[4.0, -1.0], &[-1.0, 0.0]]),
        P::from_real_rows(&[&[6.0, -2.0], &[-3.0, 1.0]]),
        P::from_real_rows(&[&[3.0, 1.0], &[1.0, 0.5]]),
    ];
    let n = 512;
    for p in cases {
        assert_eq!(p.is_stable_bidisk(1e-9).unwrap(), StabilityVerdict::StrictlyStable);
        let mut lo = f64::INFINITY;
        for j in 0..n {
            for k in 0..n {
                let z1 = agler_core::scalar::root_of_unity::<f64>(j, n);
                let z2 = agler_core::scalar::root_of_unity::<f64>(k, n);
                lo = lo.min(p.evaluate(z1, z2).norm());
            }
        }
        assert!(lo > 0.0);
    }
}

#[test]
fn boundary_zero_is_not_strictly_stable() {
    // 2 − z1 − z2 vanishes at (1, 1)
    let p = P::from_real_rows(&[&[2.0, -1.0], &[-1.0, 0.0]]);
    assert_ne!(p.is_stable_bidisk(1e-9).unwrap(), StabilityVerdict::StrictlyStable);
    assert!(make_rational_inner(p).is_err());
}

#[test]
fn single_precision_polynomials() {
    let p = BiPoly::<f32>::from_real_rows(&[&[4.0, -1.0], &[-1.0, 0.0]]);
    assert_eq!(p.reflect().reflect(), p);
    let z = agler_core::Complex::new(0.3f32, -0.2);
    let v = p.evaluate(z, z);
    assert!((v - agler_core::Complex::new(4.0f32 - 0.6, 0.4)).norm() < 1e-6);
}
